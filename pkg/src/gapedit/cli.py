"""Command line: ``gapedit <command> ...``.

Every structured result is one line of space-separated ``key=value`` pairs in
a fixed field order. Exit status: 0 on success, 1 when ``verify`` finds a
violation, 2 on bad arguments.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core_strings import SYMBOL_DTYPE, exact_edit_distance
from .driver import build_tower, derive_seed, faed, pad_to_power_of_two
from .intervals import scale_exponent
from .parameters import ScheduleInfeasible, derive_schedule, parse_mode

SEED_ENV = "GAPEDIT_SEED"
BENCH_SIZES = (2**10, 2**12, 2**14, 2**16)
BENCH_ALPHABETS = (2, 26)
BENCH_EDIT_DIVISORS = (64, 8)


class UsageError(ValueError):
    pass


def generate_pair(n: int, edits: int, alphabet: int, seed: int):
    """Uniform ``x`` of length ``n`` and ``y`` = ``x`` after ``edits`` random
    single-symbol insertions, deletions or substitutions (so ``editd <= edits``).

    Alphabets up to 26 use the letters ``a..``; larger ones use codes ``0..alphabet-1``.
    """
    if n < 0 or not 0 <= edits <= n:
        raise ValueError("need 0 <= edits <= n")
    if not 1 <= alphabet <= 256:
        raise ValueError("alphabet size must lie in 1..256")
    rng = np.random.default_rng([int(seed), 11])
    base = ord("a") if alphabet <= 26 else 0
    x = (rng.integers(0, alphabet, n) + base).astype(SYMBOL_DTYPE)
    y = list(x.tolist())
    for _ in range(edits):
        op = int(rng.integers(0, 3))
        sym = int(rng.integers(0, alphabet)) + base
        if op == 0 or not y:
            y.insert(int(rng.integers(0, len(y) + 1)), sym)
        elif op == 1:
            del y[int(rng.integers(0, len(y)))]
        else:
            y[int(rng.integers(0, len(y)))] = sym
    return x, np.asarray(y, dtype=SYMBOL_DTYPE), edits


def record(**fields) -> str:
    parts = []
    for k, v in fields.items():
        if v is None:
            v = "none"
        elif isinstance(v, bool):
            v = str(v).lower()
        elif isinstance(v, float):
            v = f"{v:.6f}"
        elif isinstance(v, int) and v.bit_length() > 64:
            v = f"2^{v.bit_length() - 1}" if v & (v - 1) == 0 else str(v)
        parts.append(f"{k}={v}")
    return " ".join(parts)


def parse_fraction(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {s!r}") from None


def parse_theta(s: str) -> Fraction:
    th = parse_fraction(s)
    try:
        scale_exponent(th)
    except ValueError as e:
        raise UsageError(str(e)) from None
    return th


def parse_T(s: str) -> Fraction:
    T = parse_fraction(s)
    m = (T - 1) * 6
    if m < 0 or m.denominator != 1:
        raise UsageError(f"--T must be 1 + m/6 for an integer m >= 0, got {s}")
    return T


def check_mode(s: str) -> str:
    try:
        parse_mode(s)
    except ValueError as e:
        raise UsageError(str(e)) from None
    return s


def read_inputs(args) -> tuple[bytes, bytes]:
    if args.x_file or args.y_file:
        if not (args.x_file and args.y_file):
            raise UsageError("give both --x-file and --y-file")
        if args.x is not None or args.y is not None:
            raise UsageError("give strings or files, not both")
        with open(args.x_file, "rb") as f:
            x = f.read()
        with open(args.y_file, "rb") as f:
            y = f.read()
        return x, y
    if args.x is None or args.y is None:
        raise UsageError("need two input strings or --x-file/--y-file")
    return args.x.encode("utf-8"), args.y.encode("utf-8")


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer") from None


# -- commands -------------------------------------------------------------------

def cmd_exact(args, out) -> int:
    x, y = read_inputs(args)
    print(record(command="exact", len_x=len(x), len_y=len(y), distance=exact_edit_distance(x, y)), file=out)
    return 0


def cmd_gap(args, out) -> int:
    from .driver import BaseOracle
    from .engine import run_gap

    x, y = read_inputs(args)
    theta = args.theta
    xp, yp, n = pad_to_power_of_two(x, y)
    padded = len(x) != n or len(y) != n
    oracle = build_tower(args.T, mode=args.quality_mode, levels=args.levels, strict=not args.relaxed)
    e = scale_exponent(theta)
    if e > max(n.bit_length() - 1, 0):
        raise UsageError(f"theta must be at least 1/n = 1/{n}")
    if args.inspect and not isinstance(oracle, BaseOracle) and oracle.runnable(n, e):
        eng = run_gap(xp, yp, theta, oracle.params_for(n), oracle.sub, args.seed, strict=False)
        dec = eng.decision.value
        for k, v in eng.report():
            print(record(inspect=k, value=v), file=out)
        fallback = False
    else:
        dec = oracle.decide(xp, yp, theta, args.seed).value
        fallback = getattr(oracle, "fallbacks", 0) > 0
    print(record(command="gap", n=n, padded=padded, theta=str(theta), T=str(args.T),
                 mode=args.quality_mode, strict=not args.relaxed, seed=args.seed,
                 quality=f"2^{oracle.quality_log2}", fallback=fallback, decision=dec), file=out)
    return 0


def approx_record(x, y, args, seed: int, *, exact: bool, timing: bool, extra: Optional[dict] = None) -> str:
    t0 = time.perf_counter()
    r = faed(x, y, args.T, seed, mode=args.quality_mode, strict=not args.relaxed,
             levels=args.levels, budget_factor=args.budget)
    wall = time.perf_counter() - t0
    fields = dict(extra or {})
    fields.update(len_x=len(x), len_y=len(y), n=r.n, T=str(r.T), mode=r.mode, strict=r.strict,
                  seed=seed, i_star=r.i_star, i_max=r.i_max, quality=f"2^{r.quality_log2}",
                  fallback=r.fallback, U=r.U, steps=r.steps)
    if exact:
        d = exact_edit_distance(x, y)
        ratio = r.ratio(d)
        fields.update(exact=d, ratio=ratio, status="OK" if r.U >= d else "VIOLATION")
    if timing:
        fields.update(wall_ms=round(wall * 1000, 3))
    return record(**fields)


def cmd_approx(args, out) -> int:
    x, y = read_inputs(args)
    print(approx_record(x, y, args, args.seed, exact=args.exact, timing=args.timing,
                        extra=dict(command="approx")), file=out)
    return 0


def cmd_gen(args, out) -> int:
    if args.n < 0 or args.edits < 0 or args.edits > args.n:
        raise UsageError("need 0 <= edits <= n")
    if not 1 <= args.alphabet <= 256:
        raise UsageError("alphabet must lie in 1..256")
    x, y, e = generate_pair(args.n, args.edits, args.alphabet, args.seed)
    with open(args.out_x, "wb") as f:
        f.write(bytes(x.astype(np.uint8).tolist()))
    with open(args.out_y, "wb") as f:
        f.write(bytes(y.astype(np.uint8).tolist()))
    print(record(command="gen", n=args.n, len_y=len(y), edits=e, alphabet=args.alphabet, seed=args.seed,
                 out_x=args.out_x, out_y=args.out_y), file=out)
    return 0


def cmd_params(args, out) -> int:
    if args.n < 1 or args.n & (args.n - 1):
        raise UsageError("--n must be a power of two")
    T = args.T
    if T == 1:
        print(record(command="params", T="1", oracle="base", quality="2^0", zeta="1"), file=out)
        return 0
    # schedule of the top speed-up step; its sub-oracle is the tower below
    sub = build_tower(T - Fraction(1, 6), mode=args.quality_mode, levels=args.levels)
    try:
        p = derive_schedule(sub.speed, args.n, 2 ** sub.quality_log2, mode=args.quality_mode,
                            zeta_sub=sub.zeta_at(args.n), levels=args.levels)
    except ScheduleInfeasible as e:
        print(record(command="params", T=str(T), n=args.n, feasible=False, reason=str(e).replace(" ", "_")),
              file=out)
        return 0
    fields = dict(command="params", T=str(T), feasible=True)
    fields.update(p.report())
    fields["time_bound_theta_1_2"] = f"{p.time_bound(1):.4g}"
    print(record(**fields), file=out)
    return 0


def cmd_verify(args, out) -> int:
    from .audit import SOFT_AUDITS, run_verify

    if args.n < 4 or args.n & (args.n - 1):
        raise UsageError("--n must be a power of two >= 4")
    if args.n > 2**12:
        raise UsageError("verify prices every certified box by exact DP; use --n <= 4096")
    modes = tuple(args.modes.split(","))
    for m in modes:
        check_mode(m)
    results = run_verify(args.n, args.trials, args.seed, modes=modes, apm_trials=args.apm_trials,
                         soft=args.soft)
    soft_names = {f.__name__ for f in SOFT_AUDITS}
    failed = False
    for r in results:
        print(r.line(), file=out)
        for ex in r.examples:
            print(record(counterexample=r.name, **{k: str(v).replace(" ", "") for k, v in ex.items()}), file=out)
        if not r.ok and r.name not in soft_names:
            failed = True
    print(record(command="verify", n=args.n, trials=args.trials, seed=args.seed,
                 result="FAIL" if failed else "PASS"), file=out)
    return 1 if failed else 0


def cmd_bench(args, out) -> int:
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else list(BENCH_SIZES)
    alphabets = [int(a) for a in args.alphabets.split(",")] if args.alphabets else list(BENCH_ALPHABETS)
    divisors = [int(d) for d in args.edit_divisors.split(",")] if args.edit_divisors else list(BENCH_EDIT_DIVISORS)
    for n in sizes:
        if n < 1:
            raise UsageError("sizes must be positive")
    for n in sizes:
        for a in alphabets:
            for dv in divisors:
                for t in range(args.trials):
                    e = n // dv
                    s = derive_seed(args.seed, n, a, dv, t)
                    x, y, _ = generate_pair(n, e, a, s)
                    extra = dict(command="bench", alphabet=a, planted=e, trial=t)
                    print(approx_record(x, y, args, s, exact=args.exact, timing=args.timing, extra=extra),
                          file=out, flush=True)
                    if args.timing and args.exact_timing:
                        t0 = time.perf_counter()
                        exact_edit_distance(x, y)
                        print(record(command="bench_exact", n=n, alphabet=a, planted=e, trial=t,
                                     wall_ms=round((time.perf_counter() - t0) * 1000, 3)), file=out, flush=True)
    return 0


# -- parser ----------------------------------------------------------------------

def _add_inputs(p):
    p.add_argument("x", nargs="?", help="first string (UTF-8)")
    p.add_argument("y", nargs="?", help="second string (UTF-8)")
    p.add_argument("--x-file", help="read the first string as raw bytes")
    p.add_argument("--y-file", help="read the second string as raw bytes")


def _add_algo(p, seed):
    p.add_argument("--T", type=str, default="7/6", help="target speed 1 + m/6 (default 7/6)")
    p.add_argument("--quality-mode", default="theoretical", help="theoretical | practical:<slack>")
    p.add_argument("--levels", type=int, default=None, help="override the level count k")
    p.add_argument("--relaxed", action="store_true",
                   help="run the engine for every theta >= 1/n instead of falling back below n^-zeta")
    p.add_argument("--budget", type=float, default=None,
                   help="step budget as a multiple of the per-run work bound (default: none)")
    p.add_argument("--seed", type=int, default=seed)


def build_parser(seed: int) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gapedit", description="Gap edit distance and FAED upper bounds.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact edit distance")
    _add_inputs(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("gap", help="gap decision at one theta")
    _add_inputs(p)
    _add_algo(p, seed)
    p.add_argument("--theta", type=str, required=True, help="power of 1/2, e.g. 1/8")
    p.add_argument("--inspect", action="store_true", help="dump per-level engine counts")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("approx", help="FAED upper bound U >= editd")
    _add_inputs(p)
    _add_algo(p, seed)
    p.add_argument("--exact", action="store_true", help="also compute the exact distance and ratio")
    p.add_argument("--timing", action="store_true", help="add wall_ms (makes output run-dependent)")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("gen", help="write a random pair with planted edits")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--edits", type=int, required=True)
    p.add_argument("--alphabet", type=int, default=4)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out-x", required=True)
    p.add_argument("--out-y", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("params", help="print the level schedule")
    p.add_argument("--T", type=str, default="7/6")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--quality-mode", default="theoretical")
    p.add_argument("--levels", type=int, default=None)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("verify", help="run the invariant audits")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--modes", default="theoretical,practical:0",
                   help="comma-separated quality modes cycled over trials")
    p.add_argument("--apm-trials", type=int, default=None)
    p.add_argument("--soft", action="store_true", help="also report the high-probability properties")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="sweep sizes and emit one record per run")
    _add_algo(p, seed)
    p.add_argument("--sizes", default=None, help="comma-separated n (default 1024,4096,16384,65536)")
    p.add_argument("--alphabets", default=None, help="comma-separated (default 2,26)")
    p.add_argument("--edit-divisors", default=None, help="planted edits n/d for each d (default 64,8)")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--timing", action="store_true")
    p.add_argument("--exact-timing", action="store_true", help="with --timing, also time exact DP")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        seed = default_seed()
        ap = build_parser(seed)
        try:
            args = ap.parse_args(argv)
        except SystemExit as e:
            return int(e.code or 0)
        if hasattr(args, "T"):
            args.T = parse_T(args.T)
        if hasattr(args, "quality_mode"):
            check_mode(args.quality_mode)
        if hasattr(args, "theta"):
            args.theta = parse_theta(args.theta)
        return args.func(args, out)
    except (UsageError, ValueError) as e:
        print(f"gapedit: error: {e}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
