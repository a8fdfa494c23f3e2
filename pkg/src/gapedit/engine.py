"""The k-level speed-up: MAIN, Preprocess, Enumerate and ProcessDense.

Intervals are handled by their lower ends; the width of a level-``j`` interval
is ``w[j]``. Box costs in ``R(j)`` are integers in units of ``1/(2n)``.

Per-``(j, I, i)`` data (Bbelow, SparseSample) is built on first use. Each piece
depends only on the finished lower levels and on its own random stream, so the
result is the same as building everything up front.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core_strings import GapDecision, Text, base_gap_stack
from .intervals import displacement_bound, grain, scale_exponent
from .parameters import LevelParams
from .shortcut_graph import BoxArray, apm_mask, partition_array, stack_costs

# stream tags for np.random.default_rng([seed, tag, ...])
TAG_SPARSE_SAMPLE = 1
TAG_PIVOT_TEST = 2
TAG_SUB_ORACLE = 3
TAG_AMPLIFY = 4
TAG_BUDGET = 5


class BudgetExceeded(RuntimeError):
    pass


class ThetaInadmissible(ValueError):
    """``theta`` is below ``n**-zeta`` for this schedule."""


class BaseGapOracle:
    """Exact banded threshold test; quality 1, deterministic."""

    quality_log2 = 0
    speed = Fraction(1)
    zeta = Fraction(1)
    name = "base"

    def decide_stack(self, text: Text, h_lo: int, w: int, starts: np.ndarray, i: int, seed: int):
        return base_gap_stack(text, h_lo, w, starts, i), False


def scaled_threshold(unit: int, e: int) -> int:
    """``floor(unit * 2**-e)``."""
    return unit >> e if e >= 0 else unit << (-e)


def grid_union(lo: np.ndarray, hi: np.ndarray, g: int) -> np.ndarray:
    """Sorted distinct multiples of ``g`` lying in some ``[lo[k], hi[k]]``."""
    first = -(-lo // g) * g
    cnt = np.maximum((hi - first) // g + 1, 0)
    total = int(cnt.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    base = np.repeat(first, cnt)
    offs = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    return np.unique(base + offs * g)


@dataclass
class PivotRecord:
    j: int
    i: int
    I: int
    X: np.ndarray
    Y: np.ndarray


@dataclass
class EnumerateRecord:
    j: int
    I: int
    i: int
    vs: np.ndarray
    out: np.ndarray


@dataclass
class LevelStats:
    boxes: int = 0
    sparse: dict = field(default_factory=dict)
    pivots: int = 0
    bbelow_built: int = 0
    samples_built: int = 0


class GapEngine:
    """State of one run of MAIN on ``z = xy`` at ``theta = 2**-theta_exp``."""

    def __init__(self, text: Text, params: LevelParams, theta_exp: int, sub_oracle=None,
                 seed: int = 0, *, budget: Optional[int] = None, record: bool = False):
        if params.n != text.n:
            raise ValueError("schedule was derived for a different length")
        if theta_exp < 0 or theta_exp > params.log_n:
            raise ValueError(f"theta exponent {theta_exp} outside 0..log n")
        self.text = text
        self.p = params
        self.prof = params.profile
        self.n = text.n
        self.S = 2 * text.n
        self.L = theta_exp
        self.k = params.k
        self.w = params.w
        self.sub = sub_oracle if sub_oracle is not None else BaseGapOracle()
        self.seed = int(seed)
        self.budget = budget
        self.record = record
        self.steps = 0
        self.randomized = False
        self.oracle_calls = 0
        self._oracle_memo: dict = {}
        self._close: dict = {}
        self._bbelow: dict = {}
        self._ss: dict = {}
        self.sparse: dict = {}
        self.dense_all: dict = {}
        self.bdense: dict = {}
        self.R: dict = {}
        self.R_parts: dict = {}
        self.pivots: list[PivotRecord] = []
        self.enum_log: list[EnumerateRecord] = []
        self.stats = {j: LevelStats() for j in range(1, self.k + 1)}
        self.decision: Optional[GapDecision] = None
        self.final_cost: Optional[int] = None
        self.final_threshold: Optional[int] = None

    # -- bookkeeping -------------------------------------------------------

    def charge(self, units: int) -> None:
        self.steps += int(units)
        if self.budget is not None and self.steps > self.budget:
            raise BudgetExceeded(f"step budget {self.budget} exhausted")

    def _rng(self, tag: int, *key: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, tag, *key])

    def family(self, w: int, i: int) -> np.ndarray:
        """Lower ends of ``Intervals(w, eps(i))`` over ``{0..2n}``."""
        g = grain(w, i)
        return np.arange(0, 2 * self.n - w + 1, g, dtype=np.int64)

    def horizontal(self, w: int) -> np.ndarray:
        """Lower ends of ``Intervals(w)`` over ``{0..n}``."""
        return np.arange(0, self.n - w + 1, w, dtype=np.int64)

    def _slot(self, table: dict, key) -> np.ndarray:
        arr = table.get(key)
        if arr is None:
            arr = np.full(2 * self.n + 1, -1, dtype=np.int8)
            table[key] = arr
        return arr

    # -- sub-oracle ----------------------------------------------------------

    def oracle(self, I: int, w: int, starts: np.ndarray, i: int) -> np.ndarray:
        """Sub-oracle decisions for ``z_I`` vs ``z_J`` at ``eps(i)``; repeated
        questions get the answer given the first time."""
        memo = self._slot(self._oracle_memo, (w, I, i))
        todo = starts[memo[starts] < 0]
        if todo.size:
            self.charge(todo.size)
            self.oracle_calls += int(todo.size)
            sub_seed = int(np.random.SeedSequence([self.seed, TAG_SUB_ORACLE]).generate_state(1)[0])
            res, rnd = self.sub.decide_stack(self.text, I, w, todo, i, sub_seed)
            self.randomized |= bool(rnd)
            memo[todo] = np.asarray(res, dtype=np.int8)
        return memo[starts] == 1

    # -- Preprocess ----------------------------------------------------------

    def bbelow(self, j: int, I: int, i: int) -> Optional[np.ndarray]:
        """Membership mask (indexed by lower end) of ``Bbelow(j, I, i)``."""
        if j == 1:
            return None
        key = (j, I, i)
        m = self._bbelow.get(key)
        if m is None:
            w = self.w[j]
            boxes = self.R_parts[j - 1].get(I) or BoxArray.empty(self.S)
            vs = self.family(w, i + 3)
            thr = scaled_threshold(w * self.S, self.prof.bbelow_exp(j, i))
            self.charge(len(boxes) + vs.size)
            ok = apm_mask(I, w, vs, thr, boxes)
            m = np.zeros(2 * self.n + 1, dtype=bool)
            m[vs[ok]] = True
            self._bbelow[key] = m
            self.stats[j].bbelow_built += 1
        return m

    def sparse_sample(self, j: int, I: int, i: int) -> np.ndarray:
        """Distinct members of ``SparseSample(j, I, i)`` (repeats add nothing)."""
        if j == 1:
            return np.zeros(0, dtype=np.int64)
        key = (j, I, i)
        got = self._ss.get(key)
        if got is None:
            wj, wl = self.w[j], self.w[j - 1]
            pool = sorted(s for s in self.sparse.get((j - 1, i), ()) if I <= s <= I + wj - wl)
            if not pool:
                got = np.zeros(0, dtype=np.int64)
            else:
                if len(pool) > 1:
                    self.randomized = True
                draw = self._rng(TAG_SPARSE_SAMPLE, j, I, i).choice(
                    np.asarray(pool, dtype=np.int64), size=self.p.sample_count, replace=True)
                got = np.unique(draw)
            self._ss[key] = got
            self.stats[j].samples_built += 1
        return got

    # -- Enumerate -----------------------------------------------------------

    def enumerate(self, j: int, I: int, vs: np.ndarray, i: int) -> np.ndarray:
        """CLOSE members of the stack ``I x vs`` (level ``j``, scale ``i``).

        Membership of a ``J`` never depends on the rest of the stack, so
        answers are cached per ``(j, I, i, J)``.
        """
        vs = np.asarray(vs, dtype=np.int64)
        self.charge(vs.size)
        close = self._slot(self._close, (j, I, i))
        todo = vs[close[vs] < 0]
        if todo.size:
            close[todo] = self._classify(j, I, todo, i).astype(np.int8)
        out = vs[close[vs] == 1]
        if self.record:
            self.enum_log.append(EnumerateRecord(j, I, i, vs.copy(), out.copy()))
        return out

    def _classify(self, j: int, I: int, vs: np.ndarray, i: int) -> np.ndarray:
        w = self.w[j]
        if j == 1:
            return self.oracle(I, w, vs, i)
        bb = self.bbelow(j, I, i)
        res = bb[vs].copy()
        rest = vs[~res]
        if rest.size == 0:
            return res
        wl = self.w[j - 1]
        bound = displacement_bound(w, i)
        g_out = grain(w, i + 3)
        K = np.zeros(2 * self.n + 1, dtype=bool)
        for i2 in range(0, i + 1):
            g_in = grain(wl, i2 + 3)
            for I2 in self.sparse_sample(j, I, i2).tolist():
                # ZoomIn over the remaining stack
                centre = rest + (I2 - I)
                sub = grid_union(np.maximum(centre - bound, rest),
                                 np.minimum(centre + bound, rest + w - wl), g_in)
                if sub.size == 0:
                    continue
                hits = self.enumerate(j - 1, I2, sub, i2)
                if hits.size == 0:
                    continue
                # every J whose ZoomIn contains a hit
                centre = hits - (I2 - I)
                back = grid_union(np.maximum(centre - bound, hits + wl - w),
                                  np.minimum(centre + bound, hits), g_out)
                back = back[(back >= 0) & (back <= 2 * self.n - w)]
                K[back] = True
        cand = rest[K[rest]]
        if cand.size:
            ok = self.oracle(I, w, cand, i)
            accepted = np.zeros(2 * self.n + 1, dtype=bool)
            accepted[cand[ok]] = True
            res[~res] = accepted[rest]
        return res

    # -- ProcessDense --------------------------------------------------------

    def process_dense(self, j: int) -> None:
        w = self.w[j]
        qj = self.prof.q[j]
        dj = self.p.d[j]
        rate = self.p.sampling_rate(j)
        self.dense_all[j] = min(self.L, qj)
        for i in range(qj + 1, self.L + 1):
            sparse = set()
            remaining = set(self.horizontal(w).tolist())
            cands = self.family(w, i + 3)
            h1 = self.prof.h1(j, i)
            h2 = self.prof.h2(j, i)
            while remaining:
                I = min(remaining)
                if rate < 1:
                    self.randomized = True
                    pick = self._rng(TAG_PIVOT_TEST, j, I, i).random(cands.size) < float(rate)
                    sample = cands[pick]
                else:
                    sample = cands
                count = self.enumerate(j, I, sample, i).size
                if count < rate * dj:
                    sparse.add(I)
                    remaining.discard(I)
                    continue
                X = self.enumerate(j, I, self.horizontal(w), h1)
                Yp = self.enumerate(j, I, self.family(w, h2 + 3), h2)
                g2 = grain(w, h2 + 3)
                mark = np.zeros(2 * self.n + 1, dtype=bool)
                mark[Yp] = True
                Y = cands[mark[(cands // g2) * g2]]
                for I2 in X.tolist():
                    key = (j, I2, i)
                    old = self.bdense.get(key)
                    self.bdense[key] = Y if old is None else np.union1d(old, Y)
                remaining.difference_update(X.tolist())
                remaining.discard(I)
                self.pivots.append(PivotRecord(j, i, I, X, Y))
                self.stats[j].pivots += 1
            self.sparse[(j, i)] = sparse
            self.stats[j].sparse[i] = len(sparse)
        self._build_R(j)

    def _build_R(self, j: int) -> None:
        w = self.w[j]
        unit = w * self.S
        hl, vl, cs = [], [], []
        top = self.dense_all[j]
        if top >= 0:
            # i <= q_j: every candidate approved at weight 1; the finest family
            # contains all coarser ones
            H = self.horizontal(w)
            V = self.family(w, top + 3)
            hl.append(np.repeat(H, V.size))
            vl.append(np.tile(V, H.size))
            cs.append(np.full(H.size * V.size, unit, dtype=np.int64))
        for (jj, I, i), Y in self.bdense.items():
            if jj != j or Y.size == 0:
                continue
            hl.append(np.full(Y.size, I, dtype=np.int64))
            vl.append(Y)
            cs.append(np.full(Y.size, min(unit, scaled_threshold(unit, self.prof.weight_exp(j, i))), dtype=np.int64))
        if hl:
            hlo = np.concatenate(hl)
            vlo = np.concatenate(vl)
            cost = np.concatenate(cs)
        else:
            hlo = vlo = cost = np.zeros(0, dtype=np.int64)
        hlo, vlo, vhi, cost = _dedup(hlo, vlo, vlo + w, cost)
        # INDUCED: J/[t] at cost + 2t
        parts = [(hlo, vlo, vhi, cost)]
        t = 1
        while 2 * t <= w:
            parts.append((hlo, vlo + t, vhi - t, cost + 2 * t * self.S))
            t *= 2
        hlo, vlo, vhi, cost = _dedup(*(np.concatenate(c) for c in zip(*parts)))
        R = BoxArray(hlo, hlo + w, vlo, vhi, cost, self.S)
        self.R[j] = R
        self.R_parts[j] = partition_array(R, self.w[j + 1])
        self.stats[j].boxes = len(R)
        self.charge(len(R))

    # -- MAIN ----------------------------------------------------------------

    def run(self) -> GapDecision:
        for j in range(1, self.k + 1):
            self.process_dense(j)
        R = self.R[self.k]
        thr = scaled_threshold(self.n * self.S, self.prof.final_exp(self.L))
        self.charge(len(R) + 1)
        cost = int(stack_costs(0, self.n, np.array([self.n], dtype=np.int64), self.n, R)[0])
        self.final_cost = cost
        self.final_threshold = thr
        self.decision = GapDecision.ACCEPT if cost <= thr else GapDecision.REJECT
        return self.decision

    def report(self) -> list[tuple[str, str]]:
        rows = [("n", str(self.n)), ("theta", f"2^-{self.L}"), ("quality_mode", self.prof.name),
                ("decision", self.decision.value if self.decision else "none"),
                ("steps", str(self.steps)), ("oracle_calls", str(self.oracle_calls)),
                ("randomized", str(self.randomized).lower())]
        for j in range(1, self.k + 1):
            st = self.stats[j]
            nsparse = sum(st.sparse.values())
            rows += [(f"level_{j}_width", str(self.w[j])), (f"level_{j}_boxes", str(st.boxes)),
                     (f"level_{j}_trivially_dense_upto", str(self.dense_all.get(j, -1))),
                     (f"level_{j}_pivots", str(st.pivots)), (f"level_{j}_sparse", str(nsparse)),
                     (f"level_{j}_bbelow_built", str(st.bbelow_built)),
                     (f"level_{j}_samples_built", str(st.samples_built))]
        return rows


def _dedup(hlo, vlo, vhi, cost):
    """Keep one row per box with the smallest cost."""
    if hlo.size == 0:
        return hlo, vlo, vhi, cost
    order = np.lexsort((cost, vhi, vlo, hlo))
    hlo, vlo, vhi, cost = hlo[order], vlo[order], vhi[order], cost[order]
    keep = np.ones(hlo.size, dtype=bool)
    keep[1:] = (hlo[1:] != hlo[:-1]) | (vlo[1:] != vlo[:-1]) | (vhi[1:] != vhi[:-1])
    return hlo[keep], vlo[keep], vhi[keep], cost[keep]


def theta_exponent(theta) -> int:
    return scale_exponent(theta)


def run_gap(x, y, theta, params: LevelParams, sub_oracle=None, seed: int = 0, *,
            strict: bool = True, budget: Optional[int] = None, record: bool = False) -> GapEngine:
    """Run MAIN and return the engine (decision in ``.decision``).

    With ``strict`` a ``theta`` below ``n**-zeta`` raises
    :class:`ThetaInadmissible`; otherwise any ``theta >= 1/n`` is run.
    """
    text = x if isinstance(x, Text) and y is None else Text.from_pair(x, y)
    e = theta_exponent(theta)
    if strict and not params.admissible(e):
        raise ThetaInadmissible(
            f"theta=2^-{e} below n^-zeta (zeta={params.zeta}, n={params.n}); use the exact fallback")
    eng = GapEngine(text, params, e, sub_oracle, seed, budget=budget, record=record)
    eng.run()
    return eng


def main_gap(x, y, theta, params: LevelParams, sub_oracle=None, seed: int = 0, *,
             strict: bool = True, budget: Optional[int] = None) -> GapDecision:
    return run_gap(x, y, theta, params, sub_oracle, seed, strict=strict, budget=budget).decision
