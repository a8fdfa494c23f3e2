"""Aligned interval families, Round, ZoomIn and the INDUCED box expansion.

Scales are passed as exponents: ``eps(i) = 2**-i``. An interval of width ``w``
is ``eps(i)``-aligned when its lower end is a multiple of ``grain(w, i)``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, NamedTuple

from .core_strings import GridBox, Interval, is_power_of_two


class WeightedBox(NamedTuple):
    h: Interval
    v: Interval
    kappa: Fraction

    @property
    def box(self) -> GridBox:
        return GridBox(self.h, self.v)

    @property
    def cost(self) -> Fraction:
        """Weight of the shortcut edge, ``kappa * width(h)``."""
        return self.kappa * self.h.width


class Stack(NamedTuple):
    h: Interval
    vs: list


def eps(i: int) -> Fraction:
    return Fraction(1, 2**i) if i >= 0 else Fraction(2 ** (-i))


def scale_exponent(delta) -> int:
    """Exponent ``i`` with ``delta == 2**-i``; ``delta`` must be a power of 1/2."""
    delta = Fraction(delta)
    if delta <= 0 or delta > 1 or delta.numerator != 1 or not is_power_of_two(delta.denominator):
        raise ValueError(f"{delta} is not a power of 1/2 in (0, 1]")
    return delta.denominator.bit_length() - 1


def grain(w: int, i: int) -> int:
    """Alignment step ``max(eps(i) * w, 1)`` for width ``w``."""
    if i <= 0:
        return w << (-i)
    return max(w >> i, 1)


def family_starts(w: int, i: int, lo: int, hi: int) -> range:
    """Lower ends of all ``eps(i)``-aligned ``w``-intervals inside ``{lo..hi}``."""
    g = grain(w, i)
    first = -(-lo // g) * g
    return range(first, hi - w + 1, g)


def aligned_family(w: int, delta, span: Interval) -> list[Interval]:
    if not is_power_of_two(w):
        raise ValueError("width must be a power of two")
    i = scale_exponent(delta)
    return [Interval(s, s + w) for s in family_starts(w, i, span.lo, span.hi)]


def round_interval(J: Interval, delta) -> Interval:
    g = grain(J.width, scale_exponent(delta))
    lo = (J.lo // g) * g
    return Interval(lo, lo + J.width)


def round_start(lo: int, g: int) -> int:
    return (lo // g) * g


def displacement_bound(w: int, i: int) -> int:
    """Largest integer displacement allowed by ``2 * eps(i) * w``."""
    return (2 * w) >> i if i >= 0 else (2 * w) << (-i)


def zoom_range(b_h_lo: int, w: int, v_lo: int, v_hi: int, i: int,
               sub_lo: int, sub_w: int, sub_i: int) -> range:
    """Lower ends of the ZoomIn output for one box, as a range."""
    g = grain(sub_w, sub_i + 3)
    bound = displacement_bound(w, i)
    centre = v_lo + (sub_lo - b_h_lo)
    lo = max(centre - bound, v_lo)
    hi = min(centre + bound, v_hi - sub_w)
    first = -(-lo // g) * g
    return range(first, hi + 1, g)


def zoom_in(b: GridBox, i: int, sub: Interval, sub_i: int) -> list[Interval]:
    """All ``eps(sub_i+3)``-aligned ``J' ⊆ b.v`` of width ``width(sub)`` whose box
    with ``sub`` has displacement at most ``2 eps(i) width(b.h)`` from ``b``."""
    if not b.h.contains(sub):
        raise ValueError("sub-interval must lie inside the box's horizontal side")
    if not 0 <= sub_i <= i:
        raise ValueError("need 0 <= sub_i <= i")
    r = zoom_range(b.h.lo, b.h.width, b.v.lo, b.v.hi, i, sub.lo, sub.width, sub_i)
    return [Interval(s, s + sub.width) for s in r]


def zoom_in_stack(h: Interval, vs: Iterable[Interval], i: int, sub: Interval, sub_i: int) -> list[Interval]:
    """Union of :func:`zoom_in` over a stack, sorted by lower end."""
    starts = set()
    for v in vs:
        starts.update(zoom_range(h.lo, h.width, v.lo, v.hi, i, sub.lo, sub.width, sub_i))
    return [Interval(s, s + sub.width) for s in sorted(starts)]


def zoom_out_starts(sub_lo: int, sub_v_lo: int, sub_w: int, h_lo: int, w: int, i: int) -> range:
    """Lower ends of ``eps(i+3)``-aligned ``w``-intervals ``J`` such that the
    sub-box ``{sub_lo..} x {sub_v_lo..}`` is in ``zoom_in(h x J, i, ...)``."""
    g = grain(w, i + 3)
    bound = displacement_bound(w, i)
    centre = sub_v_lo - (sub_lo - h_lo)
    lo = max(centre - bound, sub_v_lo + sub_w - w)
    hi = min(centre + bound, sub_v_lo)
    first = -(-lo // g) * g
    return range(first, hi + 1, g)


def shrink(J: Interval, t: int) -> Interval:
    """``J/[t]``: drop ``t`` units from both ends."""
    if 2 * t > J.width:
        raise ValueError("cannot shrink past the midpoint")
    return Interval(J.lo + t, J.hi - t)


def induced(boxes: Iterable[WeightedBox]) -> list[WeightedBox]:
    """Each box plus its vertical shrinkings ``J/[2^s]`` at weight
    ``kappa + 2^(s+1)/width(h)``. Duplicates keep the smallest weight."""
    best: dict[tuple[Interval, Interval], Fraction] = {}

    def offer(h, v, kappa):
        key = (h, v)
        old = best.get(key)
        if old is None or kappa < old:
            best[key] = kappa

    for wb in boxes:
        h, v, kappa = wb
        mu = h.width
        if not is_power_of_two(mu) or v.width != mu:
            raise ValueError("INDUCED expects square boxes of power-of-two width")
        kappa = Fraction(kappa)
        offer(h, v, kappa)
        t = 1
        while 2 * t <= v.width:
            offer(h, shrink(v, t), kappa + Fraction(2 * t, mu))
            t *= 2
    return [WeightedBox(h, v, k) for (h, v), k in best.items()]
