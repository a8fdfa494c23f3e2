"""Outer constructions: padding, amplification, step budgets, the oracle tower
and the FAED upper-bound estimator."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .core_strings import (SENTINEL, SYMBOL_DTYPE, GapDecision, Text, as_symbols,
                           base_gap_decide, exact_edit_distance)
from .engine import (TAG_AMPLIFY, TAG_BUDGET, BaseGapOracle, BudgetExceeded,
                     run_gap)
from .parameters import ScheduleInfeasible, derive_schedule, level_count, make_profile
from .intervals import scale_exponent


def derive_seed(*key: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in key]).generate_state(1, dtype=np.uint64)[0] >> 1)


def pad_to_power_of_two(x, y):
    """Pad both strings with the sentinel to the least power of two ``n >= max(|x|, |y|)``
    (``n >= 1``)."""
    x = as_symbols(x)
    y = as_symbols(y)
    n = 1
    while n < max(len(x), len(y)):
        n *= 2
    out = []
    for s in (x, y):
        p = np.full(n, SENTINEL, dtype=SYMBOL_DTYPE)
        p[: len(s)] = s
        out.append(p)
    return out[0], out[1], n


class _OracleBase:
    """Shared ``decide`` / ``decide_stack`` in terms of ``decide_ex``."""

    def decide_ex(self, x, y, theta_exp: int, seed: int) -> tuple[bool, bool]:
        raise NotImplementedError

    def decide(self, x, y, theta, seed: int = 0) -> GapDecision:
        ok, _ = self.decide_ex(x, y, scale_exponent(theta), seed)
        return GapDecision.ACCEPT if ok else GapDecision.REJECT

    def decide_stack(self, text: Text, h_lo: int, w: int, starts, i: int, seed: int):
        a = text.z[h_lo:h_lo + w]
        out = np.zeros(len(starts), dtype=bool)
        rnd = False
        for k, s in enumerate(np.asarray(starts).tolist()):
            ok, r = self.decide_ex(a, text.z[s:s + w], i, derive_seed(seed, h_lo, s, w, i))
            out[k] = ok
            rnd |= r
        return out, rnd


class BaseOracle(_OracleBase, BaseGapOracle):
    """``A_0``: the banded exact threshold test."""

    def zeta_at(self, n: int) -> Fraction:
        return Fraction(1)

    def decide_ex(self, x, y, theta_exp, seed):
        return bool(base_gap_decide(x, y, Fraction(1, 2 ** theta_exp))), False

    def decide_stack(self, text, h_lo, w, starts, i, seed):
        return BaseGapOracle.decide_stack(self, text, h_lo, w, starts, i, seed)


class AmplifiedOracle(_OracleBase):
    """``r`` independent runs, ACCEPT if any accepts."""

    def __init__(self, inner, runs: int):
        if runs < 1:
            raise ValueError("need at least one run")
        self.inner = inner
        self.runs = runs
        self.quality_log2 = inner.quality_log2
        self.speed = inner.speed
        self.name = f"amplified({inner.name},r={runs})"
        self.runs_used = 0

    def zeta_at(self, n):
        return self.inner.zeta_at(n)

    def decide_ex(self, x, y, theta_exp, seed):
        any_rnd = False
        for r in range(self.runs):
            self.runs_used += 1
            ok, rnd = self.inner.decide_ex(x, y, theta_exp, derive_seed(seed, TAG_AMPLIFY, r))
            any_rnd |= rnd
            if ok:
                return True, any_rnd
            if not rnd:
                # a run that drew no random bits would repeat itself
                break
        return False, any_rnd


def amplification_runs(delta) -> int:
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return max(1, math.ceil(math.log2(1 / delta)))


def amplify(oracle, delta) -> AmplifiedOracle:
    """Failure probability ``<= delta`` from ``ceil(log2(1/delta))`` runs."""
    return AmplifiedOracle(oracle, amplification_runs(delta))


def budgeted_run(call: Callable[[Optional[int]], GapDecision], budget: Optional[float]) -> GapDecision:
    """Run ``call(budget)``; REJECT if the step budget runs out."""
    if budget is None or budget == math.inf:
        return call(None)
    if budget <= 0:
        return GapDecision.REJECT
    try:
        return call(int(budget))
    except BudgetExceeded:
        return GapDecision.REJECT


class EngineGapOracle(_OracleBase):
    """``A_m``: the speed-up over a sub-oracle.

    Falls back to the base test (quality 1, so still within the quality
    bound) when no schedule exists at a length or, in strict mode, when
    ``theta`` is below ``n**-zeta``.
    """

    def __init__(self, sub, *, mode: str = "theoretical", levels: Optional[int] = None,
                 strict: bool = True, budget_factor: Optional[float] = None):
        self.sub = sub
        self.mode = mode
        self.levels = levels
        self.strict = strict
        self.budget_factor = budget_factor
        self.speed = sub.speed + Fraction(1, 6)
        k = levels if levels is not None else level_count(sub.speed)
        self.profile = make_profile(mode, sub.quality_log2, k)
        self.quality_log2 = self.profile.quality_log2
        self.name = f"engine(T={self.speed},{mode})"
        self._params: dict = {}
        self.fallbacks = 0
        self.engine_runs = 0
        self.steps = 0

    def params_for(self, n: int):
        if n not in self._params:
            try:
                self._params[n] = derive_schedule(
                    self.sub.speed, n, 2 ** self.sub.quality_log2, mode=self.mode,
                    zeta_sub=self.sub.zeta_at(n), levels=self.levels)
            except ScheduleInfeasible:
                self._params[n] = None
        return self._params[n]

    def zeta_at(self, n: int) -> Fraction:
        p = self.params_for(n)
        return p.zeta if p is not None else Fraction(0)

    def runnable(self, n: int, theta_exp: int) -> bool:
        p = self.params_for(n)
        if p is None:
            return False
        return p.admissible(theta_exp) if self.strict else 0 <= theta_exp <= p.log_n

    def decide_ex(self, x, y, theta_exp, seed):
        n = len(x)
        if not self.runnable(n, theta_exp):
            self.fallbacks += 1
            return bool(base_gap_decide(x, y, Fraction(1, 2 ** theta_exp))), False
        p = self.params_for(n)
        sub = self.sub
        if not isinstance(sub, BaseOracle):
            # inner failure probability n^-12
            sub = AmplifiedOracle(sub, max(1, 12 * p.log_n))
        rnd = [False]

        def one(s):
            def call(budget):
                eng = run_gap(x, y, Fraction(1, 2 ** theta_exp), p, sub, s, strict=False, budget=budget)
                self.engine_runs += 1
                self.steps += eng.steps
                rnd[0] |= eng.randomized
                return eng.decision
            return call

        if self.budget_factor is None:
            ok = bool(one(seed)(None))
        else:
            tau = self.budget_factor * p.time_bound(theta_exp)
            # two budgeted runs, accept if either accepts
            ok = bool(budgeted_run(one(derive_seed(seed, TAG_BUDGET, 0)), tau)) or \
                bool(budgeted_run(one(derive_seed(seed, TAG_BUDGET, 1)), tau))
        return ok, rnd[0]


def tower_height(T) -> int:
    T = Fraction(T)
    m = (T - 1) * 6
    if m < 0 or m.denominator != 1:
        raise ValueError(f"T must be 1 + m/6 for an integer m >= 0, got {T}")
    return int(m)


def build_tower(T=Fraction(7, 6), *, mode: str = "theoretical", levels: Optional[int] = None,
                strict: bool = True, budget_factor: Optional[float] = None):
    """``A_0`` (exact threshold) and ``6(T-1)`` speed-up steps on top of it."""
    oracle = BaseOracle()
    for _ in range(tower_height(T)):
        oracle = EngineGapOracle(oracle, mode=mode, levels=levels, strict=strict,
                                 budget_factor=budget_factor)
    return oracle


@dataclass
class FaedResult:
    U: int
    n: int
    i_star: int
    i_max: int
    quality_log2: int
    fallback: bool
    T: Fraction
    mode: str
    strict: bool
    runs: int
    steps: int

    def ratio(self, exact: int) -> Optional[float]:
        if exact == 0:
            return None
        return float(Fraction(self.U, exact))


def faed(x, y, T=Fraction(7, 6), seed: int = 0, *, mode: str = "theoretical", strict: bool = True,
         levels: Optional[int] = None, budget_factor: Optional[float] = None) -> FaedResult:
    """Upper bound ``U >= editd`` of the padded pair.

    Tests ``theta = 2**-i`` for ``i = i_max .. 1`` (each ``i`` with its own
    seed) and stops at the first ACCEPT, which is the largest accepting
    ``i``. ``U = Q * 2**-i* * n``. In strict mode ``i_max = floor(zeta log n)``;
    when that is 0 or no schedule exists the exact distance is returned and
    flagged as a fallback. Non-strict mode runs ``i`` up to ``log n``.
    """
    T = Fraction(T)
    xp, yp, n = pad_to_power_of_two(x, y)
    log_n = n.bit_length() - 1
    oracle = build_tower(T, mode=mode, levels=levels, strict=strict, budget_factor=budget_factor)

    def fallback():
        d = exact_edit_distance(xp, yp)
        return FaedResult(d, n, 0, 0, 0, True, T, mode, strict, 0, 0)

    if isinstance(oracle, BaseOracle):
        zeta = Fraction(1)
    else:
        p = oracle.params_for(n)
        if p is None:
            return fallback()
        zeta = p.zeta if strict else Fraction(1)
    i_max = math.floor(zeta * log_n)
    if i_max == 0:
        if strict and not isinstance(oracle, BaseOracle):
            return fallback()
        return FaedResult((2 ** oracle.quality_log2) * n, n, 0, 0, oracle.quality_log2, False,
                          T, mode, strict, 0, 0)
    delta = 1 / (zeta * n * log_n)
    amp = AmplifiedOracle(oracle, amplification_runs(delta)) if delta < 1 else oracle
    i_star = 0
    for i in range(i_max, 0, -1):
        ok, _ = amp.decide_ex(xp, yp, i, derive_seed(seed, 7, i))
        if ok:
            i_star = i
            break
    Q = 2 ** oracle.quality_log2
    U = (Q * n) >> i_star
    steps = getattr(oracle, "steps", 0)
    runs = getattr(amp, "runs_used", 1)
    return FaedResult(U, n, i_star, i_max, oracle.quality_log2, False, T, mode, strict, runs, steps)
