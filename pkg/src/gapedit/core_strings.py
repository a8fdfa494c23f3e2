"""Symbols, the concatenated text ``z = xy``, edit-distance kernels and box costs.

Grid conventions: an interval ``{lo..hi}`` of grid indices names the substring
made of characters ``lo+1..hi`` (1-based), i.e. ``z[lo:hi]`` in Python slicing.
A box ``h x v`` stands for the pair ``(z[h], z[v])`` and its cost is their edit
distance.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Sequence, Union

import numba
import numpy as np

SENTINEL = 256
SYMBOL_DTYPE = np.int32

SymbolsLike = Union[bytes, bytearray, str, Sequence[int], np.ndarray]


class GapDecision(str, Enum):
    ACCEPT = "ACCEPT"
    REJECT = "REJECT"

    def __bool__(self) -> bool:
        return self is GapDecision.ACCEPT


class Interval(NamedTuple):
    """Closed range of grid indices ``{lo..hi}``; its width is ``hi - lo``."""

    lo: int
    hi: int

    @property
    def width(self) -> int:
        return self.hi - self.lo

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __repr__(self) -> str:
        return f"{{{self.lo}..{self.hi}}}"


class GridBox(NamedTuple):
    h: Interval
    v: Interval

    @property
    def square(self) -> bool:
        return self.h.width == self.v.width


def as_symbols(s: SymbolsLike) -> np.ndarray:
    """Convert user input to a symbol array, rejecting the padding sentinel.

    ``str`` is UTF-8 encoded first; integer sequences must lie in ``0..255``.
    """
    if isinstance(s, str):
        s = s.encode("utf-8")
    if isinstance(s, (bytes, bytearray)):
        return np.frombuffer(bytes(s), dtype=np.uint8).astype(SYMBOL_DTYPE)
    arr = np.asarray(s)
    if arr.size == 0:
        return np.zeros(0, dtype=SYMBOL_DTYPE)
    if arr.ndim != 1 or not np.issubdtype(arr.dtype, np.integer):
        raise ValueError("symbols must be a 1-d integer sequence")
    if arr.min() < 0 or arr.max() > 255:
        raise ValueError("symbol codes must lie in 0..255; 256 is the reserved pad symbol")
    return arr.astype(SYMBOL_DTYPE)


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True)
class Text:
    """The concatenation ``z = xy`` of two equal power-of-two length halves."""

    z: np.ndarray
    n: int

    def __post_init__(self):
        if not is_power_of_two(self.n):
            raise ValueError(f"half length {self.n} is not a power of two")
        if len(self.z) != 2 * self.n:
            raise ValueError("len(z) must equal 2n")

    @classmethod
    def from_pair(cls, x, y) -> "Text":
        # padded inputs may contain the sentinel, so no re-validation here
        x = np.asarray(x, dtype=SYMBOL_DTYPE) if isinstance(x, np.ndarray) else as_symbols(x)
        y = np.asarray(y, dtype=SYMBOL_DTYPE) if isinstance(y, np.ndarray) else as_symbols(y)
        if len(x) != len(y):
            raise ValueError("x and y must have equal length")
        return cls(np.concatenate([x, y]).astype(SYMBOL_DTYPE), len(x))

    @property
    def x(self) -> np.ndarray:
        return self.z[: self.n]

    @property
    def y(self) -> np.ndarray:
        return self.z[self.n:]

    def substring(self, iv: Interval) -> np.ndarray:
        if not 0 <= iv.lo <= iv.hi <= 2 * self.n:
            raise ValueError(f"interval {iv} outside the grid of this text")
        return self.z[iv.lo:iv.hi]


@numba.njit(cache=True)
def _edit_distance_kernel(a, b):
    m = b.shape[0]
    prev = np.arange(m + 1, dtype=np.int64)
    cur = np.empty(m + 1, dtype=np.int64)
    for r in range(1, a.shape[0] + 1):
        cur[0] = r
        ar = a[r - 1]
        for c in range(1, m + 1):
            best = prev[c - 1] + (0 if ar == b[c - 1] else 1)
            if prev[c] + 1 < best:
                best = prev[c] + 1
            if cur[c - 1] + 1 < best:
                best = cur[c - 1] + 1
            cur[c] = best
        prev, cur = cur, prev
    return prev[m]


@numba.njit(cache=True)
def _banded_kernel(a, b, band, limit):
    """Edit distance restricted to diagonals ``|c - r| <= band``.

    Returns the exact distance when it is at most ``limit`` (``limit <= band``),
    otherwise some value above ``limit``. Stops as soon as a whole row exceeds
    ``limit``.
    """
    n = a.shape[0]
    m = b.shape[0]
    big = n + m + 1
    width = 2 * band + 1
    # column c of row r lives at slot c - r + band
    prev = np.full(width + 1, big, dtype=np.int64)
    cur = np.full(width + 1, big, dtype=np.int64)
    for c in range(0, min(m, band) + 1):
        prev[c + band] = c
    for r in range(1, n + 1):
        ar = a[r - 1]
        k0 = band - r if r < band else 0
        k1 = m - r + band
        if k1 > width - 1:
            k1 = width - 1
        if k0 > 0:
            cur[k0 - 1] = big
        row_min = big
        for k in range(k0, k1 + 1):
            c = r + k - band
            if c == 0:
                best = r
            else:
                # diagonal predecessor (r-1, c-1) sits in the same slot of prev
                best = prev[k] + (0 if ar == b[c - 1] else 1)
                if k > k0 and cur[k - 1] + 1 < best:
                    best = cur[k - 1] + 1
            # vertical predecessor (r-1, c) is one slot to the right in prev
            if prev[k + 1] + 1 < best:
                best = prev[k + 1] + 1
            cur[k] = best
            if best < row_min:
                row_min = best
        for k in range(k1 + 1, width + 1):
            cur[k] = big
        if row_min > limit:
            return limit + 1
        prev, cur = cur, prev
    k = m - n + band
    if k < 0 or k >= width:
        return limit + 1
    return prev[k]


def exact_edit_distance(a: SymbolsLike, b: SymbolsLike) -> int:
    """Levenshtein distance by the full quadratic table (two rows of memory)."""
    a = _coerce(a)
    b = _coerce(b)
    if len(a) < len(b):
        a, b = b, a
    if len(b) == 0:
        return len(a)
    return int(_edit_distance_kernel(a, b))


def banded_edit_distance(a: SymbolsLike, b: SymbolsLike, limit: int) -> int:
    """Exact distance if it is ``<= limit``, else ``limit + 1``.

    The table is restricted to ``2*limit + 1`` diagonals; a path leaving that
    band already costs more than ``limit``.
    """
    a = _coerce(a)
    b = _coerce(b)
    if limit < 0:
        raise ValueError("limit must be non-negative")
    if abs(len(a) - len(b)) > limit:
        return limit + 1
    return int(min(_banded_kernel(a, b, limit, limit), limit + 1))


def _coerce(s) -> np.ndarray:
    if isinstance(s, np.ndarray) and s.dtype == SYMBOL_DTYPE:
        return s
    if isinstance(s, np.ndarray):
        return s.astype(SYMBOL_DTYPE)
    return as_symbols(s)


def _theta_threshold(theta, n_sub: int) -> int:
    theta = Fraction(theta)
    if not 0 < theta <= 1 or theta.numerator != 1 or not is_power_of_two(theta.denominator):
        raise ValueError(f"theta must be a power of 1/2 in (0, 1], got {theta}")
    return int(theta * n_sub)  # floor


def base_gap_decide(a: SymbolsLike, b: SymbolsLike, theta) -> GapDecision:
    """Quality-1 gap decision: ACCEPT iff ``editd(a, b) <= theta * len(a)``.

    Deterministic. The table is confined to the ``2*theta*n' + 1`` diagonals
    around the main one (a path leaving them already costs more than
    ``theta*n'``), so the cost is ``O(n' * theta * n')``.
    """
    a = _coerce(a)
    b = _coerce(b)
    if len(a) != len(b) or not is_power_of_two(len(a)):
        raise ValueError("base_gap_decide needs equal power-of-two lengths")
    t = _theta_threshold(theta, len(a))
    if np.array_equal(a, b):
        return GapDecision.ACCEPT
    if t == 0:
        return GapDecision.REJECT
    d = _banded_kernel(a, b, t, t)
    return GapDecision.ACCEPT if d <= t else GapDecision.REJECT


def box_cost(t: Text, b: GridBox) -> int:
    return exact_edit_distance(t.substring(b.h), t.substring(b.v))


def ncost(t: Text, b: GridBox) -> Fraction:
    if b.h.width == 0:
        raise ValueError("normalized cost undefined for zero-width horizontal side")
    return Fraction(box_cost(t, b), b.h.width)


def displacement(inner: GridBox, outer: GridBox) -> int:
    """Vertical shift that puts ``inner``'s diagonal on ``outer``'s diagonal."""
    if not outer.h.contains(inner.h):
        raise ValueError("inner.h must be contained in outer.h")
    return abs((inner.v.lo - outer.v.lo) - (inner.h.lo - outer.h.lo))


@numba.njit(cache=True)
def _cost_profile_kernel(a, z, tails, max_height):
    out = np.empty((tails.shape[0], max_height + 1), dtype=np.int64)
    n = a.shape[0]
    prev = np.empty(max_height + 1, dtype=np.int64)
    cur = np.empty(max_height + 1, dtype=np.int64)
    for ti in range(tails.shape[0]):
        t = tails[ti]
        m = min(max_height, z.shape[0] - t)
        for c in range(m + 1):
            prev[c] = c
        for r in range(1, n + 1):
            cur[0] = r
            ar = a[r - 1]
            for c in range(1, m + 1):
                best = prev[c - 1] + (0 if ar == z[t + c - 1] else 1)
                if prev[c] + 1 < best:
                    best = prev[c] + 1
                if cur[c - 1] + 1 < best:
                    best = cur[c - 1] + 1
                cur[c] = best
            prev, cur = cur, prev
        for c in range(m + 1):
            out[ti, c] = prev[c]
        for c in range(m + 1, max_height + 1):
            out[ti, c] = -1
    return out


def cost_profile(t: Text, h: Interval, max_height: int, tails=None) -> np.ndarray:
    """``out[k, c] = cost(h x {tails[k]..tails[k]+c})`` for every listed tail.

    One quadratic table per tail; entries whose vertical side would leave the
    grid are ``-1``. Used by the audit suites to price many boxes at once.
    """
    if tails is None:
        tails = np.arange(0, 2 * t.n + 1, dtype=np.int64)
    tails = np.asarray(tails, dtype=np.int64)
    return _cost_profile_kernel(t.substring(h), t.z, tails, int(max_height))


@numba.njit(cache=True)
def _stack_gap_kernel(a, z, starts, t):
    w = a.shape[0]
    out = np.zeros(starts.shape[0], dtype=np.bool_)
    for k in range(starts.shape[0]):
        b = z[starts[k]:starts[k] + w]
        # Hamming distance bounds the edit distance from above
        ham = 0
        for c in range(w):
            if a[c] != b[c]:
                ham += 1
                if ham > t:
                    break
        if ham <= t:
            out[k] = True
        elif t > 0:
            out[k] = _banded_kernel(a, b, t, t) <= t
    return out


def base_gap_stack(t: Text, h_lo: int, w: int, starts: np.ndarray, i: int) -> np.ndarray:
    """:func:`base_gap_decide` at ``theta = 2**-i`` for ``z[h_lo:h_lo+w]``
    against every ``z[s:s+w]``, ``s`` in ``starts``."""
    starts = np.asarray(starts, dtype=np.int64)
    if starts.size and (starts.min() < 0 or starts.max() + w > 2 * t.n):
        raise ValueError("stack leaves the grid")
    thr = w >> i if i >= 0 else w << -i
    return _stack_gap_kernel(t.z[h_lo:h_lo + w], t.z, starts, thr)
