"""Parameter schedules (cut round m, degree cap tau) for the structural analysis.

``n`` is always the number of growth rounds, so the graph has n + k vertices.
Logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .graphs import Family


def default_slow_function(n: float) -> float:
    """max(3, ln ln ln n): grows without bound but stays tiny at desk scale."""
    if n <= math.exp(math.e):
        return 3.0
    return max(3.0, math.log(math.log(math.log(n))))


@dataclass(frozen=True)
class Schedule:
    n: int
    k: int
    m: int
    q: int
    tau: float
    f: float


def _clamp(m: float, n: int) -> int:
    return int(min(max(1, math.ceil(m)), max(n, 1)))


def upper_schedule(
    n: int,
    k: int,
    family: Family | str = Family.KTREE,
    f: float | Callable[[float], float] | None = None,
    m: int | None = None,
    q: int | None = None,
    tau: float | None = None,
) -> Schedule:
    """m, q and tau used for highway forests and nice/bad classification.

    k-trees:     m = n / (f^{3/(k-1)} (ln n)^{2/(k-1)}),  tau = 2k + q (n/m)^{1-1/k}
    Apollonian:  m = n / ((ln n)^{2/(k-1)} f^{(2k-2)/(k^2-2k)}),  tau = 2k + q (n/m)^{(k-2)/(k-1)}
    with q = ceil(4 ln ln n). Explicit ``m``, ``q`` or ``tau`` override.
    """
    family = Family(family)
    fval = _f_value(f, n)
    ln = math.log(max(n, 3))
    if m is None:
        if family is Family.KTREE:
            m = n / (fval ** (3 / (k - 1)) * ln ** (2 / (k - 1)))
        else:
            if k < 3:
                raise ValueError("Apollonian schedule needs k >= 3")
            m = n / (ln ** (2 / (k - 1)) * fval ** ((2 * k - 2) / (k * k - 2 * k)))
    m = _clamp(m, n)
    if q is None:
        q = math.ceil(4 * math.log(max(ln, 1.0 + 1e-9)))
        q = max(q, 1)
    if tau is None:
        expo = 1 - 1 / k if family is Family.KTREE else (k - 2) / (k - 1)
        tau = 2 * k + q * (n / m) ** expo
    return Schedule(n, k, m, q, float(tau), fval)


@dataclass(frozen=True)
class LowerSchedule:
    n: int
    k: int
    m: int
    f: float

    @property
    def moderate_band(self) -> tuple[float, float]:
        return self.n / (self.m * self.f), self.n * self.f / self.m


def lower_schedule(n: int, k: int, f=None, m: int | None = None) -> LowerSchedule:
    """m = f n^{1 - k/(k^2+k-1)}; pieces with vertex counts in the moderate band count."""
    fval = _f_value(f, n)
    if m is None:
        m = fval * n ** (1 - k / (k * k + k - 1))
    return LowerSchedule(n, k, _clamp(m, n), fval)


def lower_bound_exponent(k: int) -> float:
    """(k-1)/(k^2+k-1): polynomial order of the time needed to inform everyone."""
    return (k - 1) / (k * k + k - 1)


def upper_bound_rounds(n: int, k: int, family: Family | str = Family.KTREE, f=None) -> float:
    """Shape of the almost-all bound, without its constant."""
    family = Family(family)
    fval = _f_value(f, n)
    ln = math.log(n)
    if family is Family.KTREE:
        return ln ** (1 + 2 / k) * math.log(ln) * fval ** (3 / k)
    return ln ** ((k * k - 3) / (k - 1) ** 2) * math.log(ln) * fval ** (2 / k)


def _f_value(f, n) -> float:
    if f is None:
        return default_slow_function(n)
    if callable(f):
        return float(f(n))
    return float(f)
