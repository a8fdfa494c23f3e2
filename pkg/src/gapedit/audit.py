"""Invariant checks against exact dynamic programming.

Each check returns a :class:`AuditResult` naming the invariant, how many
items it looked at, and up to a few counterexamples that are enough to replay
the failure. Shared by the test-suite and the ``verify`` command.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core_strings import GridBox, Interval, Text, cost_profile, exact_edit_distance
from .engine import GapEngine
from .intervals import Stack, WeightedBox
from .shortcut_graph import apm, augment, column_costs_oracle

MAX_EXAMPLES = 5


@dataclass
class AuditResult:
    name: str
    checked: int = 0
    violations: int = 0
    examples: list = field(default_factory=list)
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def fail(self, example) -> None:
        self.violations += 1
        if len(self.examples) < MAX_EXAMPLES:
            self.examples.append(example)

    def merge(self, other: "AuditResult") -> None:
        self.checked += other.checked
        self.violations += other.violations
        self.examples.extend(other.examples[: MAX_EXAMPLES - len(self.examples)])

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        s = f"invariant={self.name} status={status} checked={self.checked} violations={self.violations}"
        if self.note:
            s += f" note={self.note}"
        return s


def square_costs(text: Text, h_lo: int, w: int, starts: np.ndarray) -> np.ndarray:
    """``cost({h_lo..h_lo+w} x {s..s+w})`` for each ``s``."""
    starts = np.asarray(starts, dtype=np.int64)
    if starts.size == 0:
        return np.zeros(0, dtype=np.int64)
    prof = cost_profile(text, Interval(h_lo, h_lo + w), w, starts)
    return prof[:, w]


def _ratio_ok(cost: np.ndarray, w: int, e: int) -> np.ndarray:
    """``cost / w <= 2**-e`` in integers."""
    if e >= 0:
        return (cost << e) <= w
    return cost <= (w << (-e))


# -- engine audits -----------------------------------------------------------

def certified_boxes(eng: GapEngine) -> AuditResult:
    """Every box of every ``R(j)`` has ``cost <= kappa * width``."""
    res = AuditResult("certified_boxes")
    for j, R in eng.R.items():
        w = eng.w[j]
        for h in np.unique(R.hlo).tolist():
            sel = np.flatnonzero(R.hlo == h)
            tails = R.vlo[sel]
            heights = R.vhi[sel] - tails
            uniq, inv = np.unique(tails, return_inverse=True)
            prof = cost_profile(eng.text, Interval(h, h + w), w, uniq)
            cost = prof[inv, heights]
            bad = cost * R.scale > R.cost[sel]
            res.checked += sel.size
            for k in np.flatnonzero(bad).tolist():
                b = sel[k]
                res.fail(dict(j=j, h=(h, h + w), v=(int(R.vlo[b]), int(R.vhi[b])),
                              cost=int(cost[k]), kappa=str(Fraction(int(R.cost[b]), R.scale * w))))
    return res


def _close_entries(eng: GapEngine):
    """``(j, I, i, J starts, decisions)`` for every cached classification."""
    for (j, I, i), tab in eng._close.items():
        idx = np.flatnonzero(tab >= 0)
        if idx.size:
            yield j, I, i, idx.astype(np.int64), tab[idx] == 1


def enumerate_soundness(eng: GapEngine) -> AuditResult:
    """CLOSE at level ``j``, scale ``i`` implies ``ncost <= eps(i - close[j])``."""
    res = AuditResult("enumerate_soundness")
    for j, I, i, Js, dec in _close_entries(eng):
        Jc = Js[dec]
        if Jc.size == 0:
            continue
        w = eng.w[j]
        cost = square_costs(eng.text, I, w, Jc)
        ok = _ratio_ok(cost, w, eng.prof.close_exp(j, i))
        res.checked += Jc.size
        for k in np.flatnonzero(~ok).tolist():
            res.fail(dict(j=j, I=(I, I + w), J=(int(Jc[k]), int(Jc[k]) + w), i=i,
                          cost=int(cost[k]), bound_exp=eng.prof.close_exp(j, i)))
    return res


def enumerate_completeness(eng: GapEngine) -> AuditResult:
    """Candidates with ``ncost <= eps(i)`` that were classified FAR. Completeness
    only holds with high probability, so the miss count is reported."""
    res = AuditResult("enumerate_completeness")
    for j, I, i, Js, dec in _close_entries(eng):
        w = eng.w[j]
        cost = square_costs(eng.text, I, w, Js)
        near = _ratio_ok(cost, w, i)
        res.checked += int(near.sum())
        for k in np.flatnonzero(near & ~dec).tolist():
            res.fail(dict(j=j, I=(I, I + w), J=(int(Js[k]), int(Js[k]) + w), i=i, cost=int(cost[k])))
    return res


def bdense_soundness(eng: GapEngine) -> AuditResult:
    """``J in Bdense(j, I, i)`` with ``i > q_j`` implies ``ncost <= eps(i - q_j)``."""
    res = AuditResult("bdense_soundness")
    for (j, I, i), Y in eng.bdense.items():
        if Y.size == 0:
            continue
        w = eng.w[j]
        cost = square_costs(eng.text, I, w, Y)
        ok = _ratio_ok(cost, w, eng.prof.weight_exp(j, i))
        res.checked += Y.size
        for k in np.flatnonzero(~ok).tolist():
            res.fail(dict(j=j, I=(I, I + w), J=(int(Y[k]), int(Y[k]) + w), i=i, cost=int(cost[k])))
    return res


def pivot_disjointness(eng: GapEngine) -> AuditResult:
    """True ``eps(i)``-neighbourhoods of distinct pivots at one ``(j, i)`` do not meet."""
    res = AuditResult("pivot_disjointness")
    groups: dict = {}
    for pr in eng.pivots:
        groups.setdefault((pr.j, pr.i), []).append(pr.I)
    for (j, i), piv in groups.items():
        w = eng.w[j]
        fam = eng.family(w, i + 3)
        owner: dict = {}
        for P in piv:
            cost = square_costs(eng.text, P, w, fam)
            near = fam[_ratio_ok(cost, w, i)].tolist()
            res.checked += len(near)
            for J in near:
                if J in owner:
                    res.fail(dict(j=j, i=i, pivots=(owner[J], P), J=(J, J + w)))
                else:
                    owner[J] = P
    return res


def last_level_sparse_empty(eng: GapEngine) -> AuditResult:
    res = AuditResult("last_level_sparse_empty")
    for (j, i), s in eng.sparse.items():
        if j != eng.k:
            continue
        res.checked += 1
        if s:
            res.fail(dict(j=j, i=i, sparse=sorted(s)[:8]))
    return res


def sparse_validity(eng: GapEngine) -> AuditResult:
    """Sparse ``I`` have at most ``2 d_j`` true ``eps(i)``-neighbours (holds
    when the pivot-test sample behaves; reported, not required)."""
    res = AuditResult("sparse_validity")
    for (j, i), s in eng.sparse.items():
        w = eng.w[j]
        fam = eng.family(w, i + 3)
        for I in sorted(s):
            cost = square_costs(eng.text, I, w, fam)
            res.checked += 1
            cnt = int(_ratio_ok(cost, w, i).sum())
            if cnt > 2 * eng.p.d[j]:
                res.fail(dict(j=j, I=(I, I + w), i=i, close=cnt, limit=2 * eng.p.d[j]))
    return res


def final_soundness(eng: GapEngine) -> AuditResult:
    """ACCEPT implies ``editd(x, y) <= Q * theta * n``."""
    res = AuditResult("final_soundness", checked=1)
    if eng.decision is not None and eng.decision:
        d = exact_edit_distance(eng.text.x, eng.text.y)
        limit = Fraction(eng.p.profile.quality * eng.n, 2 ** eng.L)
        if d > limit:
            res.fail(dict(distance=d, limit=str(limit)))
    return res


ENGINE_AUDITS = (certified_boxes, enumerate_soundness, bdense_soundness,
                 last_level_sparse_empty, final_soundness)
SOFT_AUDITS = (enumerate_completeness, pivot_disjointness, sparse_validity)


def audit_engine(eng: GapEngine, soft: bool = False) -> list[AuditResult]:
    checks = ENGINE_AUDITS + (SOFT_AUDITS if soft else ())
    return [c(eng) for c in checks]


# -- APM audits --------------------------------------------------------------

@dataclass
class ApmInstance:
    text: Text
    h: Interval
    vs: list
    kappa: Fraction
    boxes: list


def random_apm_instance(rng: np.random.Generator, *, max_width: int = 64, max_boxes: int = 50,
                        max_stack: int = 32, alphabet: int = 2, certified: bool = True) -> ApmInstance:
    w = int(2 ** rng.integers(0, int(np.log2(max_width)) + 1))
    n = max(w, int(2 ** rng.integers(int(np.log2(w)), int(np.log2(max_width)) + 1)))
    z = rng.integers(0, alphabet, 2 * n).astype(np.int32)
    text = Text(z, n)
    h_lo = int(rng.integers(0, n - w + 1))
    h = Interval(h_lo, h_lo + w)
    # stacks stay low in the grid so the oracle table stays small
    top = min(2 * n, 2 * w + 16)
    nv = int(rng.integers(1, max_stack + 1))
    vs = sorted({int(s) for s in rng.integers(0, top - w + 1, nv)})
    vs = [Interval(s, s + w) for s in vs]
    boxes = []
    for _ in range(int(rng.integers(0, max_boxes + 1))):
        a = int(rng.integers(h.lo, h.hi))
        b = int(rng.integers(a + 1, h.hi + 1))
        bw = b - a
        c = int(rng.integers(0, top))
        d = int(rng.integers(c, min(top, c + 2 * bw) + 1))
        if certified:
            cost = exact_edit_distance(z[a:b], z[c:d])
            # smallest dyadic kappa >= cost / bw, sometimes loosened
            kappa = Fraction(cost, bw)
            if rng.random() < 0.5:
                kappa += Fraction(int(rng.integers(0, 3)), bw)
        else:
            kappa = Fraction(int(rng.integers(0, 3 * bw)), bw)
        boxes.append(WeightedBox(Interval(a, b), Interval(c, d), kappa))
    num = int(rng.integers(0, 2 * w + 1))
    kappa = Fraction(num, 2 * w) if rng.random() < 0.8 else Fraction(int(rng.integers(0, 3)))
    return ApmInstance(text, h, vs, kappa, boxes)


def apm_equivalence(trials: int, seed: int = 0, **kw) -> tuple[AuditResult, AuditResult]:
    """APM's accept set equals oracle thresholding on ``R+``; Prop 6.1
    (``cost_R+(I x J0) <= cost_R(I x J)`` and ``cost(I x J) <= 2 cost_R+(I x J0)``)."""
    rng = np.random.default_rng(seed)
    eq = AuditResult("apm_oracle_equivalence")
    p61 = AuditResult("apm_prop_6_1")
    for t in range(trials):
        inst = random_apm_instance(rng, **kw)
        h, vs, boxes = inst.h, inst.vs, inst.boxes
        got = set(apm(Stack(h, vs), inst.kappa, boxes))
        top = max(v.hi for v in vs)
        col = column_costs_oracle(augment(h, vs, boxes), _box(h, 0, top))
        for v in vs:
            c_plus = col[v.hi]
            want = c_plus <= inst.kappa * h.width
            eq.checked += 1
            if want != (v in got):
                eq.fail(dict(trial=t, seed=seed, h=h, J=v, kappa=str(inst.kappa), oracle=str(c_plus)))
            # Prop 6.1 on certified instances
            c_R = column_costs_oracle(boxes, _box(h, v.lo, v.hi))[-1]
            c_true = exact_edit_distance(inst.text.z[h.lo:h.hi], inst.text.z[v.lo:v.hi])
            p61.checked += 1
            if not (c_plus <= c_R and c_true <= 2 * c_plus):
                p61.fail(dict(trial=t, seed=seed, h=h, J=v, c_plus=str(c_plus), c_R=str(c_R), cost=c_true))
    return eq, p61


def _box(h: Interval, lo: int, hi: int) -> GridBox:
    return GridBox(h, Interval(lo, hi))


def fit_length(y: np.ndarray, n: int, rng: np.random.Generator, lo: int, hi: int) -> np.ndarray:
    """Cut ``y`` to ``n`` symbols or extend it with random ones from ``lo..hi``."""
    if len(y) >= n:
        return y[:n]
    tail = rng.integers(lo, hi + 1, n - len(y)).astype(y.dtype)
    return np.concatenate([y, tail])


def run_verify(n: int, trials: int, seed: int, modes=("theoretical", "practical:0"),
               apm_trials: Optional[int] = None, soft: bool = False, log=None) -> list[AuditResult]:
    """Engine audits over seeded random pairs plus the APM oracle comparison."""
    from .cli import generate_pair
    from .parameters import derive_schedule
    from .engine import run_gap

    totals: dict = {}
    rng = np.random.default_rng(seed)
    for t in range(trials):
        mode = modes[t % len(modes)]
        levels = 1 if mode.startswith("practical") else None
        p = derive_schedule(1, n, mode=mode, levels=levels)
        L = int(rng.integers(1, p.log_n + 1))
        alpha = int(rng.choice([2, 4, 26]))
        e = int(rng.choice([0, n // 64, n // 8, n // 2]))
        x, y, _ = generate_pair(n, e, alpha, int(rng.integers(0, 2**31)))
        y = fit_length(y, n, rng, int(x.min()), int(x.max()))
        eng = run_gap(x, y, Fraction(1, 2 ** L), p, seed=seed + t, strict=False)
        for r in audit_engine(eng, soft=soft):
            for ex in r.examples:
                ex.update(trial=t, n=n, mode=mode, theta_exp=L, alphabet=alpha, edits=e)
            totals.setdefault(r.name, AuditResult(r.name)).merge(r)
        if log:
            log(f"trial={t} mode={mode} theta=2^-{L} decision={eng.decision.value}")
    out = list(totals.values())
    eq, p61 = apm_equivalence(apm_trials if apm_trials is not None else max(trials, 20), seed)
    return out + [eq, p61]
