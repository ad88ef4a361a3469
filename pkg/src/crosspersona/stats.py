"""Statistical battery: cross-platform trait changes, change-magnitude tables,
CCDFs, the two-sample KS test and point-biserial correlation."""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass
from typing import Sequence

from .domain import TRAITS, CrossPlatformProfile
from .errors import DataError

log = logging.getLogger(__name__)

# Absolute changes are compared as |delta| >= m - CHANGE_EPS so that
# differences such as 2.3 - 1.3 count as a full point.
CHANGE_EPS = 1e-9


@dataclass(frozen=True)
class TraitChange:
    user_key: str
    from_platform: str
    to_platform: str
    delta: tuple[float, ...]

    @property
    def abs_delta(self) -> tuple[float, ...]:
        return tuple(abs(d) for d in self.delta)


@dataclass(frozen=True)
class KsResult:
    d_statistic: float
    p_value: float
    n1: int
    n2: int


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_value: float
    n: int


def trait_changes(
    profiles: Sequence[CrossPlatformProfile], from_platform: str, to_platform: str
) -> list[TraitChange]:
    """Signed per-trait change ``to - from`` for users with vectors on both platforms."""
    out = []
    for prof in profiles:
        a, b = prof.traits_on(from_platform), prof.traits_on(to_platform)
        if a is None or b is None:
            continue
        out.append(TraitChange(prof.user, from_platform, to_platform, tuple(y - x for x, y in zip(a, b))))
    skipped = len(profiles) - len(out)
    if skipped:
        log.info("trait_changes: skipped %d users lacking %s or %s vectors", skipped, from_platform, to_platform)
    if not out:
        raise DataError(f"no users have personality vectors on both {from_platform} and {to_platform}")
    return out


def change_magnitude_table(
    changes: Sequence[TraitChange], magnitudes: Sequence[float] = (1.0, 2.0, 3.0)
) -> list[list[float]]:
    """``table[n-1][j]``: percentage of users with at least n traits changed by >= magnitudes[j]."""
    if not changes:
        raise DataError("no trait changes")
    n_users = len(changes)
    table = []
    for n in range(1, len(TRAITS) + 1):
        row = []
        for m in magnitudes:
            hits = sum(1 for c in changes if sum(d >= m - CHANGE_EPS for d in c.abs_delta) >= n)
            row.append(100.0 * hits / n_users)
        table.append(row)
    return table


def ccdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """``(x, fraction of values >= x)`` at each distinct value, ascending."""
    if not values:
        raise DataError("ccdf of an empty sample")
    ordered = sorted(values)
    n = len(ordered)
    out = []
    for x in sorted(set(ordered)):
        out.append((x, (n - bisect.bisect_left(ordered, x)) / n))
    return out


def ks_statistic(a: Sequence[float], b: Sequence[float]) -> float:
    sa, sb = sorted(a), sorted(b)
    na, nb = len(sa), len(sb)
    d = 0.0
    for x in sorted(set(sa) | set(sb)):
        fa = bisect.bisect_right(sa, x) / na
        fb = bisect.bisect_right(sb, x) / nb
        d = max(d, abs(fa - fb))
    return d


def kolmogorov_q(lam: float, tol: float = 1e-12, max_terms: int = 100) -> float:
    """Kolmogorov survival series ``2 sum (-1)^(j-1) exp(-2 j^2 lam^2)``, clipped to [0, 1]."""
    if lam <= 0.0:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, max_terms + 1):
        term = sign * 2.0 * math.exp(-2.0 * j * j * lam * lam)
        total += term
        if abs(term) < tol:
            return min(1.0, max(0.0, total))
        sign = -sign
    # series did not settle: lam is tiny and the tail probability is ~1
    return 1.0


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> KsResult:
    """Two-sample KS test with the asymptotic, small-sample-corrected p-value."""
    if not a or not b:
        raise DataError("KS test needs two nonempty samples")
    d = ks_statistic(a, b)
    n1, n2 = len(a), len(b)
    ne = n1 * n2 / (n1 + n2)
    lam = d * (math.sqrt(ne) + 0.12 + 0.11 / math.sqrt(ne))
    return KsResult(d, kolmogorov_q(lam), n1, n2)


def _betacf(a: float, b: float, x: float, eps: float = 1e-15, max_iter: int = 500) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must be in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    """Two-sided tail probability ``P(|T| >= |t|)`` for Student's t."""
    if math.isinf(t):
        return 0.0
    return betainc_regularized(df / 2.0, 0.5, df / (df + t * t))


def point_biserial(binary: Sequence[int], values: Sequence[float]) -> CorrelationResult:
    """Point-biserial correlation of a 0/1 flag with a continuous variable.

    Computed from the group means, ``r = (m1 - m0) / s * sqrt(p q)`` with the
    population standard deviation ``s``; this equals the Pearson correlation
    of the 0/1 coding.
    """
    n = len(binary)
    if n != len(values):
        raise DataError("binary and values must have equal lengths")
    if n < 3:
        raise DataError("point-biserial correlation needs at least 3 observations")
    flags = [int(b) for b in binary]
    if any(b not in (0, 1) for b in flags):
        raise DataError("binary variable must be coded 0/1")
    n1 = sum(flags)
    n0 = n - n1
    if n1 == 0 or n0 == 0:
        raise DataError("binary variable has only one class present")
    vals = [float(v) for v in values]
    if min(vals) == max(vals):
        raise DataError("values have zero variance")
    mean = math.fsum(vals) / n
    s = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / n)
    m1 = math.fsum(v for v, f in zip(vals, flags) if f) / n1
    m0 = math.fsum(v for v, f in zip(vals, flags) if not f) / n0
    r = (m1 - m0) / s * math.sqrt(n1 * n0 / (n * n))
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) >= 1.0:
        p = 0.0
    else:
        t = r * math.sqrt(df / (1.0 - r * r))
        p = t_two_sided_p(t, df)
    return CorrelationResult(r, min(1.0, max(0.0, p)), n)
