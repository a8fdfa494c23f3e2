"""Level schedule for the speed-up: widths, densities, quality exponents, and
the admissible-gap floor.

Exponents are kept as exact rationals; widths and densities are the powers of
two ``2**floor(exponent * log2 n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core_strings import is_power_of_two

SAMPLING_CONSTANT = 30
MIN_N = 4


class ScheduleInfeasible(ValueError):
    """No valid schedule (or no admissible gap) at this input length."""


def log2_exact(n: int) -> int:
    if not is_power_of_two(n):
        raise ValueError(f"{n} is not a power of two")
    return n.bit_length() - 1


def level_count(t_sub) -> int:
    """``ceil((T'+1)(1 + ln(T'+1)))``."""
    t = float(Fraction(t_sub))
    return math.ceil((t + 1) * (1 + math.log(t + 1)))


def schedule_constant(t_sub, k: int) -> Fraction:
    t = Fraction(t_sub)
    return (t + 1) ** k / (2 * ((t + 1) ** k - t ** k))


def width_exponent(t_sub, B: Fraction, i: int) -> Fraction:
    t = Fraction(t_sub)
    r = t / (t + 1)
    return Fraction(1, 2) + B * r - B * r ** i


def density_exponent(t_sub, B: Fraction, i: int) -> Fraction:
    t = Fraction(t_sub)
    r = t / (t + 1)
    return Fraction(1, 2) - B + B * r ** i


def gap_exponent_cap(t_sub) -> Fraction:
    t = Fraction(t_sub)
    return (3 * t - 2) / (6 * (6 * t ** 3 + 7 * t ** 2 + t))


def quality_sequence(q_sub, k: int) -> tuple[list[int], int]:
    """``q_0 = log2 Q'`` (rounded up), ``q_j = 3 q_{j-1} + 21``; returns ``(q, Q)``
    with ``Q = 2**(q_k + 6)``."""
    q_sub = Fraction(q_sub)
    if q_sub < 1:
        raise ValueError("sub-oracle quality must be >= 1")
    q0 = math.ceil(math.log2(q_sub)) if q_sub.denominator != 1 or not is_power_of_two(int(q_sub)) \
        else log2_exact(int(q_sub))
    q = [q0]
    for _ in range(k):
        q.append(3 * q[-1] + 21)
    return q, 2 ** (q[-1] + 6)


@dataclass(frozen=True)
class QualityProfile:
    """Exponent offsets that tie the thresholds of one run together.

    For a level-``j`` query at scale ``i``: ``Bbelow`` uses the APM threshold
    ``eps(i - q[j-1] - slack)``; a CLOSE answer guarantees ``ncost <=
    eps(i - close[j])``; a pivot enumerates at ``h1 = i - close[j] - 1`` and
    ``h2 = i - 2 close[j] - 2``; approved boxes get weight ``eps(i - q[j])`` with
    ``q[j] = 3 close[j] + 3``. The final test uses ``theta * 2**(q[k] + slack)``
    so the quality is ``2**(q[k] + slack + 1)``.

    The default profile reproduces the recurrence ``q_j = 3 q_{j-1} + 21``
    (``slack = 5``, ``close[j] = q[j-1] + 6``). The practical profile keeps the
    same soundness chain but starts from the exact base quality and a smaller
    slack, so that its certificates stay valid.
    """

    name: str
    slack: int
    q: tuple
    close: tuple  # index 0 unused

    @property
    def k(self) -> int:
        return len(self.q) - 1

    @property
    def quality_log2(self) -> int:
        return self.q[-1] + self.slack + 1

    @property
    def quality(self) -> int:
        return 2 ** self.quality_log2

    def bbelow_exp(self, j: int, i: int) -> int:
        return i - self.q[j - 1] - self.slack

    def close_exp(self, j: int, i: int) -> int:
        return i - self.close[j]

    def h1(self, j: int, i: int) -> int:
        return i - self.close[j] - 1

    def h2(self, j: int, i: int) -> int:
        return i - 2 * self.close[j] - 2

    def weight_exp(self, j: int, i: int) -> int:
        return i - self.q[j]

    def final_exp(self, theta_exp: int) -> int:
        """Exponent ``e`` of the final APM threshold ``2**-e``."""
        return theta_exp - self.q[-1] - self.slack


def theoretical_profile(q0: int, k: int) -> QualityProfile:
    q = [q0]
    close = [None]
    for _ in range(k):
        close.append(q[-1] + 6)
        q.append(3 * close[-1] + 3)
    return QualityProfile("theoretical", 5, tuple(q), tuple(close))


def practical_profile(q0: int, k: int, slack: int) -> QualityProfile:
    if slack < 0:
        raise ValueError("practical slack must be >= 0")
    q = [q0]
    close = [None]
    for j in range(1, k + 1):
        c = q0 if j == 1 else max(q0, q[-1] + slack + 1)
        close.append(c)
        q.append(3 * c + 3)
    return QualityProfile(f"practical:{slack}", slack, tuple(q), tuple(close))


def custom_profile(q, close, slack: int = 0) -> QualityProfile:
    """Arbitrary exponents. Nothing ties them together, so certificates built
    with them need not hold; meant for exercising deep levels on small inputs."""
    q = tuple(int(v) for v in q)
    close = (None,) + tuple(int(v) for v in close)
    if len(close) != len(q):
        raise ValueError("need one closeness exponent per level")
    return QualityProfile("custom", int(slack), q, close)


def parse_mode(mode: str) -> tuple[str, Optional[int]]:
    """``"theoretical"`` or ``"practical:<slack>"``."""
    if mode == "theoretical":
        return mode, None
    if mode.startswith("practical:"):
        try:
            slack = int(mode.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad quality mode {mode!r}") from None
        if slack < 0:
            raise ValueError("practical slack must be >= 0")
        return "practical", slack
    raise ValueError(f"bad quality mode {mode!r}; use 'theoretical' or 'practical:<slack>'")


def make_profile(mode: str, q0: int, k: int) -> QualityProfile:
    kind, slack = parse_mode(mode)
    if kind == "theoretical":
        return theoretical_profile(q0, k)
    return practical_profile(q0, k, slack)


@dataclass(frozen=True)
class LevelParams:
    n: int
    t_sub: Fraction
    k: int
    B: Fraction
    gamma: tuple  # gamma[1..k], index 0 unused
    delta: tuple  # delta[0..k]
    w: tuple      # w[1..k+1], index 0 unused
    d: tuple      # d[0..k]
    profile: QualityProfile
    zeta: Fraction
    zeta_sub: Fraction
    M: Fraction
    c0: int = SAMPLING_CONSTANT
    sample_count: int = 0
    repaired: bool = False
    notes: tuple = field(default_factory=tuple)

    @property
    def q(self) -> tuple:
        return self.profile.q

    @property
    def Q(self) -> int:
        return self.profile.quality

    @property
    def log_n(self) -> int:
        return log2_exact(self.n)

    def admissible(self, theta_exp: int) -> bool:
        """``theta = 2**-theta_exp >= n**-zeta``."""
        return 0 <= theta_exp and theta_exp <= self.zeta * self.log_n

    def max_admissible_exp(self) -> int:
        return math.floor(self.zeta * self.log_n)

    def eq1_holds(self) -> bool:
        return all(self.n // self.w[j] >= self.d[j] for j in range(1, self.k + 1))

    def eq2_holds(self, theta_exp: int) -> bool:
        # w_j / w_{j+1} <= theta / 2  <=>  w_{j+1} >= w_j * 2**(theta_exp + 1)
        return all(self.w[j + 1] >= self.w[j] << (theta_exp + 1) for j in range(1, self.k + 1))

    def sampling_rate(self, j: int) -> Fraction:
        return min(Fraction(1), Fraction(self.c0 * self.log_n, self.d[j]))

    def time_bound(self, theta_exp: int) -> float:
        """Numerical value of the per-level work bound summed over levels
        (polylog factors dropped)."""
        t = float(self.t_sub)
        theta = 2.0 ** -theta_exp
        total = 0.0
        for j in range(1, self.k + 1):
            inner = sum(self.d[h - 1] * self.w[h] ** (1 + 1 / t) for h in range(1, j + 1))
            total += self.n / (theta ** 2 * self.w[j] * self.d[j]) * inner
        return total

    def report(self) -> list[tuple[str, str]]:
        rows = [("n", str(self.n)), ("T_sub", str(self.t_sub)), ("k", str(self.k)), ("B", str(self.B))]
        rows += [(f"gamma_{i}", str(self.gamma[i])) for i in range(1, self.k + 1)]
        rows += [(f"delta_{i}", str(self.delta[i])) for i in range(0, self.k + 1)]
        rows += [(f"w_{i}", str(self.w[i])) for i in range(1, self.k + 2)]
        rows += [(f"d_{i}", str(self.d[i])) for i in range(0, self.k + 1)]
        rows += [(f"q_{i}", str(v)) for i, v in enumerate(self.q)]
        rows += [("quality_mode", self.profile.name), ("Q", f"2^{self.profile.quality_log2}"),
                 ("M", str(self.M)), ("zeta", str(self.zeta)),
                 ("max_admissible_theta_exp", str(self.max_admissible_exp())),
                 ("c0", str(self.c0)), ("sample_count", str(self.sample_count)),
                 ("repaired", str(self.repaired).lower())]
        return rows


def pwr_floor_exp(e: Fraction, log_n: int) -> int:
    """``log2`` of the largest power of two ``<= n**e``."""
    return math.floor(e * log_n)


def derive_schedule(t_sub, n: int, q_sub=1, *, mode: str = "theoretical",
                    zeta_sub=Fraction(1), levels: Optional[int] = None,
                    profile: Optional[QualityProfile] = None) -> LevelParams:
    """Schedule for one speed-up step over a sub-oracle of speed ``t_sub`` and
    quality ``q_sub`` at half-length ``n``.

    Raises :class:`ScheduleInfeasible` when the widths cannot be made strictly
    increasing below ``n``. A schedule with no admissible gap (``zeta*log n < 1``)
    is still returned; callers check :meth:`LevelParams.admissible`.
    ``profile`` replaces the quality exponents outright (its length fixes ``k``).
    """
    t_sub = Fraction(t_sub)
    if t_sub < 1:
        raise ValueError("sub-oracle speed must be >= 1")
    if not is_power_of_two(n) or n < MIN_N:
        raise ScheduleInfeasible(f"n={n} is below the minimum {MIN_N} or not a power of two")
    log_n = log2_exact(n)
    if profile is not None:
        levels = profile.k
    k = level_count(t_sub) if levels is None else int(levels)
    if k < 1:
        raise ValueError("need at least one level")
    B = schedule_constant(t_sub, k)
    gamma = (None,) + tuple(width_exponent(t_sub, B, i) for i in range(1, k + 1))
    delta = tuple(density_exponent(t_sub, B, i) for i in range(0, k + 1))

    notes = []
    wexp = [None] + [pwr_floor_exp(gamma[i], log_n) for i in range(1, k + 1)] + [log_n]
    repaired = False
    for j in range(2, k + 1):
        if wexp[j] <= wexp[j - 1]:
            wexp[j] = wexp[j - 1] + 1
            repaired = True
    if wexp[k] >= log_n:
        raise ScheduleInfeasible(f"n={n} too small for {k} strictly increasing widths")
    dexp = [pwr_floor_exp(delta[i], log_n) for i in range(0, k + 1)]
    dexp[k] = 0
    for j in range(1, k + 1):
        cap = min(dexp[j - 1], log_n - wexp[j])
        if dexp[j] > cap:
            dexp[j] = cap
            repaired = True
    if repaired:
        notes.append("rounded widths/densities repaired for monotonicity")
    w = (None,) + tuple(2 ** e for e in wexp[1:])
    d = tuple(2 ** e for e in dexp)

    M = min(Fraction(wexp[j + 1] - wexp[j], log_n) for j in range(1, k + 1))
    zeta = min(Fraction(zeta_sub), M / 2, gap_exponent_cap(t_sub))

    q_seq, _ = quality_sequence(q_sub, k)
    if profile is None:
        profile = make_profile(mode, q_seq[0], k)
    return LevelParams(
        n=n, t_sub=t_sub, k=k, B=B, gamma=gamma, delta=delta, w=w, d=d, profile=profile,
        zeta=zeta, zeta_sub=Fraction(zeta_sub), M=M,
        sample_count=math.ceil(SAMPLING_CONSTANT * log_n), repaired=repaired, notes=tuple(notes),
    )
