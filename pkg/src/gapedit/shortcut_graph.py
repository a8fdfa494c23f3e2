"""Shortcut graphs over certified boxes and the APM stack query.

``apm`` answers, for every interval ``J`` of a stack ``I x vs``, whether the
traversal cost of ``I x {0..max J}`` in the graph augmented with free vertical
edges ``(min I, 0) -> (min I, min J')`` is at most ``kappa * width(I)``. The
costs of a whole stack come out of one sweep over vertical coordinates with a
prefix-maximum tree on horizontal coordinates (edge costs turned into
benefits). ``cost_via_shortcuts_oracle`` is a plain shortest-path table used
to check it.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numba
import numpy as np

from .core_strings import GridBox, Interval
from .intervals import Stack, WeightedBox

ORACLE_CELL_LIMIT = 200_000


@dataclass
class BoxArray:
    """Columnar set of weighted boxes; ``cost`` is ``kappa * width(h)`` in
    units of ``1/scale``."""

    hlo: np.ndarray
    hhi: np.ndarray
    vlo: np.ndarray
    vhi: np.ndarray
    cost: np.ndarray
    scale: int

    @classmethod
    def empty(cls, scale: int = 1) -> "BoxArray":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z.copy(), z.copy(), z.copy(), z.copy(), scale)

    @classmethod
    def from_boxes(cls, boxes: Sequence[WeightedBox], scale: int | None = None) -> "BoxArray":
        boxes = list(boxes)
        if scale is None:
            scale = 1
            for b in boxes:
                scale = lcm(scale, Fraction(b.cost).denominator)
        cost = []
        for b in boxes:
            c = Fraction(b.cost) * scale
            if c.denominator != 1:
                raise ValueError(f"box cost {b.cost} not representable at scale {scale}")
            cost.append(int(c))
        col = lambda f: np.fromiter((f(b) for b in boxes), dtype=np.int64, count=len(boxes))
        return cls(col(lambda b: b.h.lo), col(lambda b: b.h.hi), col(lambda b: b.v.lo),
                   col(lambda b: b.v.hi), np.asarray(cost, dtype=np.int64).reshape(-1), scale)

    def __len__(self) -> int:
        return int(self.hlo.shape[0])

    def take(self, idx) -> "BoxArray":
        return BoxArray(self.hlo[idx], self.hhi[idx], self.vlo[idx], self.vhi[idx], self.cost[idx], self.scale)

    def to_boxes(self) -> list[WeightedBox]:
        out = []
        for a, b, c, d, k in zip(self.hlo.tolist(), self.hhi.tolist(), self.vlo.tolist(),
                                 self.vhi.tolist(), self.cost.tolist()):
            w = b - a
            kappa = Fraction(k, self.scale * w) if w else Fraction(0)
            out.append(WeightedBox(Interval(a, b), Interval(c, d), kappa))
        return out


def _oracle_table(boxes: Iterable[WeightedBox], b: GridBox, limit: int) -> dict:
    xs = range(b.h.lo, b.h.hi + 1)
    ys = range(b.v.lo, b.v.hi + 1)
    if len(xs) * len(ys) > limit:
        raise ValueError(f"grid of {len(xs)}x{len(ys)} points exceeds the oracle limit {limit}")
    into: dict[tuple[int, int], list] = {}
    for wb in boxes:
        tail = (wb.h.lo, wb.v.lo)
        head = (wb.h.hi, wb.v.hi)
        if tail == head:
            continue
        if b.h.contains(wb.h) and b.v.contains(wb.v):
            into.setdefault(head, []).append((tail, Fraction(wb.cost)))
    dist: dict[tuple[int, int], Fraction] = {}
    x0, y0 = b.h.lo, b.v.lo
    for x in xs:
        for y in ys:
            if x == x0 and y == y0:
                d = Fraction(0)
            else:
                d = None
                if x > x0:
                    d = dist[(x - 1, y)] + 1
                if y > y0:
                    c = dist[(x, y - 1)] + 1
                    d = c if d is None or c < d else d
            for tail, c in into.get((x, y), ()):
                cand = dist[tail] + c
                if cand < d:
                    d = cand
            dist[(x, y)] = d
    return dist


def cost_via_shortcuts_oracle(boxes: Iterable[WeightedBox], b: GridBox,
                              limit: int = ORACLE_CELL_LIMIT) -> Fraction:
    """Exact min-cost traversal of ``b`` using unit H/V edges and the boxes'
    shortcut edges lying inside ``b``. Zero-width boxes give edges of cost 0."""
    return _oracle_table(boxes, b, limit)[(b.h.hi, b.v.hi)]


def column_costs_oracle(boxes: Iterable[WeightedBox], b: GridBox,
                        limit: int = ORACLE_CELL_LIMIT) -> list[Fraction]:
    """``cost(b.h x {b.v.lo..y})`` for every ``y`` in ``b.v``, from one table.

    Edges above ``y`` cannot lie on a monotone path ending at height ``y``, so
    restricting to ``b`` instead of the shorter box changes nothing.
    """
    dist = _oracle_table(boxes, b, limit)
    return [dist[(b.h.hi, y)] for y in range(b.v.lo, b.v.hi + 1)]


def augment(h: Interval, vs: Iterable[Interval], boxes: Iterable[WeightedBox]) -> list[WeightedBox]:
    """``R+``: the boxes plus free vertical edges ``(min h, 0) -> (min h, min J)``."""
    out = list(boxes)
    for m in sorted({v.lo for v in vs}):
        if m > 0:
            out.append(WeightedBox(Interval(h.lo, h.lo), Interval(0, m), Fraction(0)))
    return out


@numba.njit(cache=True)
def _sweep(tx, ty, hx, hy, ben, order_t, order_h, qy, order_q, width):
    """Max benefit of a path from ``(0, 0)`` to the line ``y = qy[k]``.

    ``order_t`` lists edges by tail height, zero-height edges first and by
    tail x; ``order_h`` lists positive-height edges by head height.
    """
    size = width + 1
    fen = np.zeros(size + 1, dtype=np.int64)
    gmax = 0
    q = np.zeros(tx.shape[0], dtype=np.int64)
    res = np.zeros(qy.shape[0], dtype=np.int64)
    big = np.int64(1) << 62
    pt = 0
    ph = 0
    pq = 0
    nt = order_t.shape[0]
    nh = order_h.shape[0]
    nq = order_q.shape[0]
    while pq < nq:
        cur = qy[order_q[pq]]
        if pt < nt and ty[order_t[pt]] < cur:
            cur = ty[order_t[pt]]
        if ph < nh and hy[order_h[ph]] < cur:
            cur = hy[order_h[ph]]
        while ph < nh and hy[order_h[ph]] == cur:
            e = order_h[ph]
            v = q[e]
            if v > gmax:
                gmax = v
            k = hx[e] + 1
            while k <= size:
                if fen[k] < v:
                    fen[k] = v
                k += k & (-k)
            ph += 1
        while pt < nt and ty[order_t[pt]] == cur:
            e = order_t[pt]
            best = 0
            k = tx[e] + 1
            while k > 0:
                if fen[k] > best:
                    best = fen[k]
                k -= k & (-k)
            v = best + ben[e]
            if hy[e] == ty[e]:
                if v > gmax:
                    gmax = v
                k = hx[e] + 1
                while k <= size:
                    if fen[k] < v:
                        fen[k] = v
                    k += k & (-k)
            else:
                q[e] = v
            pt += 1
        while pq < nq and qy[order_q[pq]] == cur:
            res[order_q[pq]] = gmax
            pq += 1
        if cur >= big:
            break
    return res


def stack_costs(h_lo: int, width: int, v_los: np.ndarray, v_width: int, boxes: BoxArray) -> np.ndarray:
    """``cost_{R+}(I x {0..max J})`` for every ``J`` (scaled by ``boxes.scale``).

    Boxes must lie within ``I``; those reaching above the tallest ``J`` are
    ignored by the sweep.
    """
    s = boxes.scale
    v_los = np.asarray(v_los, dtype=np.int64)
    if v_los.size == 0:
        return np.zeros(0, dtype=np.int64)
    mins = np.unique(v_los)
    mins = mins[mins > 0]
    tx = np.concatenate([boxes.hlo - h_lo, np.zeros(mins.size, dtype=np.int64)])
    hx = np.concatenate([boxes.hhi - h_lo, np.zeros(mins.size, dtype=np.int64)])
    ty = np.concatenate([boxes.vlo, np.zeros(mins.size, dtype=np.int64)])
    hy = np.concatenate([boxes.vhi, mins])
    cost = np.concatenate([boxes.cost, np.zeros(mins.size, dtype=np.int64)])
    ben = s * ((hx - tx) + (hy - ty)) - cost
    zero = (hy == ty).astype(np.int64)
    order_t = np.lexsort((tx, 1 - zero, ty)).astype(np.int64)
    pos = np.flatnonzero(zero == 0)
    order_h = pos[np.argsort(hy[pos], kind="stable")].astype(np.int64)
    qy = v_los + v_width
    order_q = np.argsort(qy, kind="stable").astype(np.int64)
    benefit = _sweep(tx, ty, hx, hy, ben, order_t, order_h, qy, order_q, width)
    return s * (width + qy) - benefit


def apm_mask(h_lo: int, width: int, v_los: np.ndarray, threshold: int, boxes: BoxArray) -> np.ndarray:
    """Accept mask for a stack; ``threshold`` is ``kappa * width`` scaled."""
    return stack_costs(h_lo, width, v_los, width, boxes) <= threshold


def apm(stack: Stack, kappa, boxes: Sequence[WeightedBox]) -> list[Interval]:
    """Subset of ``stack.vs`` accepted at threshold ``kappa``.

    Every ``J`` with ``cost_R(I x J) <= kappa*width(I)`` is returned and no
    ``J`` with ``cost(I x J) > 2*kappa*width(I)`` is, provided the boxes are
    certified.
    """
    h = stack.h
    vs = list(stack.vs)
    if not vs:
        return []
    if any(v.width != h.width for v in vs):
        raise ValueError("stack intervals must share the width of the horizontal side")
    for b in boxes:
        if not h.contains(b.h):
            raise ValueError(f"box {b} is not inside the stack's horizontal side {h}")
    kappa = Fraction(kappa)
    arr = BoxArray.from_boxes(boxes)
    s = lcm(arr.scale, (kappa * h.width).denominator)
    if s != arr.scale:
        arr = BoxArray(arr.hlo, arr.hhi, arr.vlo, arr.vhi, arr.cost * (s // arr.scale), s)
    threshold = kappa * h.width * s
    mask = apm_mask(h.lo, h.width, np.array([v.lo for v in vs], dtype=np.int64), int(threshold), arr)
    return [v for v, ok in zip(vs, mask.tolist()) if ok]


def partition_by_horizontal(boxes: Iterable[WeightedBox], family: Sequence[Interval]) -> dict[Interval, list[WeightedBox]]:
    """Assign every box to the unique member of ``family`` containing its ``h``."""
    fam = sorted(family)
    out: dict[Interval, list[WeightedBox]] = {I: [] for I in fam}
    los = [I.lo for I in fam]
    for b in boxes:
        k = bisect.bisect_right(los, b.h.lo) - 1
        if k < 0 or not fam[k].contains(b.h):
            raise ValueError(f"box {b} straddles the family; level state is corrupt")
        out[fam[k]].append(b)
    return out


def partition_array(boxes: BoxArray, w: int) -> dict[int, BoxArray]:
    """Group boxes by the aligned ``w``-interval containing ``h`` (keyed by its lower end)."""
    if len(boxes) == 0:
        return {}
    key = (boxes.hlo // w) * w
    # a box may end exactly at the next member's start, but never start there
    bad = boxes.hhi > key + w
    if bad.any():
        raise ValueError("box straddles two aligned intervals; level state is corrupt")
    order = np.argsort(key, kind="stable")
    sk = key[order]
    cuts = np.flatnonzero(np.diff(sk)) + 1
    out = {}
    for chunk in np.split(order, cuts):
        out[int(key[chunk[0]])] = boxes.take(chunk)
    return out
