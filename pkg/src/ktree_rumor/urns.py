"""Two-colour urn models: samplers and exact rational oracles.

Replacement matrices follow one convention everywhere in this package::

    [[alpha, beta],     # a BLACK ball was drawn: add alpha black, beta white
     [gamma, delta]]    # a WHITE ball was drawn: add gamma black, delta white

so column 0 counts black balls added and column 1 counts white balls added.
Use :func:`clique_urn_matrix` to build the matrix that tracks the number of
k-cliques containing a fixed vertex of a random k-tree.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

_INT64_MAX = np.iinfo(np.int64).max


class InvalidUrnError(ValueError):
    pass


@dataclass(frozen=True)
class UrnSpec:
    white0: int
    black0: int
    replacement: tuple[tuple[int, int], tuple[int, int]]
    draws: int

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.replacement)
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise InvalidUrnError(f"replacement must be 2x2, got {self.replacement!r}")
        object.__setattr__(self, "replacement", rows)
        if self.white0 < 0 or self.black0 < 0 or self.draws < 0:
            raise InvalidUrnError("ball counts and draws must be non-negative")
        if any(x < 0 for r in rows for x in r):
            raise InvalidUrnError("replacement entries must be non-negative")
        if self.white0 + self.black0 < 1:
            raise InvalidUrnError("urn must start with at least one ball")

    @classmethod
    def polya(cls, white0: int, black0: int, s: int, draws: int) -> "UrnSpec":
        """Pólya-Eggenberger urn: the drawn colour is reinforced by ``s`` balls."""
        return cls(white0, black0, ((s, 0), (0, s)), draws)

    @property
    def alpha(self) -> int:
        return self.replacement[0][0]

    @property
    def beta(self) -> int:
        return self.replacement[0][1]

    @property
    def gamma(self) -> int:
        return self.replacement[1][0]

    @property
    def delta(self) -> int:
        return self.replacement[1][1]

    @property
    def is_polya(self) -> bool:
        return self.beta == 0 and self.gamma == 0 and self.alpha == self.delta

    @property
    def is_triangular(self) -> bool:
        return self.beta == 0

    def max_total(self) -> int:
        step = max(self.alpha + self.beta, self.gamma + self.delta)
        return self.white0 + self.black0 + self.draws * step


def clique_urn_matrix(k: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """The matrix [[k, 0], [1, k-1]] governing clique counts in random k-trees.

    White balls are the k-cliques containing a tracked vertex: choosing one of
    them creates k-1 new cliques with the vertex and one without it.
    """
    if k < 2:
        raise InvalidUrnError("k must be at least 2")
    return ((k, 0), (1, k - 1))


def _check_overflow(spec: UrnSpec) -> None:
    if spec.max_total() > _INT64_MAX:
        raise OverflowError(f"ball count may exceed int64 for {spec}")


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def urn_sample(spec: UrnSpec, rng=None) -> int:
    """Run the urn for ``spec.draws`` draws and return the final white count."""
    _check_overflow(spec)
    rng = _rng(rng)
    white, black = spec.white0, spec.black0
    (a, b), (c, d) = spec.replacement
    if spec.draws == 0:
        return white
    for u in rng.random(spec.draws):
        if u * (white + black) < white:
            black += c
            white += d
        else:
            black += a
            white += b
    return white


def urn_sample_triangular(spec: UrnSpec, rng=None) -> int:
    if not spec.is_triangular:
        raise InvalidUrnError("triangular urn requires beta == 0")
    return urn_sample(spec, rng)


def urn_sample_many(spec: UrnSpec, trials: int, rng=None) -> np.ndarray:
    """Independent runs of the same urn, vectorised across trials."""
    _check_overflow(spec)
    rng = _rng(rng)
    white = np.full(trials, spec.white0, dtype=np.int64)
    black = np.full(trials, spec.black0, dtype=np.int64)
    (a, b), (c, d) = spec.replacement
    for _ in range(spec.draws):
        drew_white = rng.random(trials) * (white + black) < white
        white += np.where(drew_white, d, b)
        black += np.where(drew_white, c, a)
    return white


def urn_distribution(spec: UrnSpec) -> dict[int, Fraction]:
    """Exact law of the white count after ``spec.draws`` draws.

    Dynamic programming over (white, black) states with rational weights;
    meant for small urns only.
    """
    (a, b), (c, d) = spec.replacement
    states: dict[tuple[int, int], Fraction] = {(spec.white0, spec.black0): Fraction(1)}
    for _ in range(spec.draws):
        nxt: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
        for (w, bl), p in states.items():
            total = w + bl
            if w:
                nxt[(w + d, bl + c)] += p * Fraction(w, total)
            if bl:
                nxt[(w + b, bl + a)] += p * Fraction(bl, total)
        states = nxt
    out: dict[int, Fraction] = defaultdict(Fraction)
    for (w, _), p in states.items():
        out[w] += p
    return dict(sorted(out.items()))


def urn_mean_variance(white0: int, black0: int, s: int, n: int) -> tuple[Fraction, Fraction]:
    """Closed-form mean and variance of a Pólya-Eggenberger urn."""
    UrnSpec.polya(white0, black0, s, n)
    a, b, w = white0, black0, white0 + black0
    mean = a + Fraction(a * s * n, w)
    var = Fraction(a * b * s * s * n * (s * n + w), w * w * (w + s))
    return mean, var


def urn_survival_probability(white0: int, black0: int, s: int, n: int) -> Fraction:
    """P[no white ball is ever drawn] for a Pólya urn, i.e. P[X = white0]."""
    a, b = white0, black0
    if a == 0:
        return Fraction(1)
    UrnSpec.polya(a, b, s, n)
    p = Fraction(1)
    for i in range(n):
        p *= 1 - Fraction(a, a + b + i * s)
        if p == 0:
            break
    return p


def survival_upper_bound_holds(white0: int, black0: int, s: int, n: int, c: Fraction | int | None = None) -> bool:
    """Check P[X = a] <= (c / (c + n))^(a / s) exactly, for c >= (a + b)/s.

    Both sides are raised to the power ``s`` so the comparison stays rational.
    """
    a, b = white0, black0
    if c is None:
        c = math.ceil(Fraction(a + b, s))
    c = Fraction(c)
    if c < Fraction(a + b, s):
        raise ValueError("c must be at least (a + b) / s")
    p = urn_survival_probability(a, b, s, n)
    return p**s <= (c / (c + n)) ** a


def urn_moment_estimate(spec: UrnSpec, r: int, trials: int, rng=None) -> float:
    """Monte Carlo estimate of E[X^r]."""
    if r < 1 or trials < 1:
        raise ValueError("r and trials must be positive")
    x = urn_sample_many(spec, trials, rng).astype(float)
    return float(np.mean(x**r))


def moment_leading_bound(spec: UrnSpec, r: int) -> float:
    """Leading term of the moment bound for triangular urns with alpha = gamma + delta.

    (alpha n / (W0 + B0))^(r delta / alpha) * prod_{i<r} (W0 + i delta);
    the lower-order remainder has no explicit constant.
    """
    alpha, gamma, delta = spec.alpha, spec.gamma, spec.delta
    if not (spec.is_triangular and gamma > 0 and delta > 0 and alpha == gamma + delta):
        raise InvalidUrnError("bound needs beta = 0, gamma, delta > 0 and alpha = gamma + delta")
    if r * delta < alpha:
        raise InvalidUrnError("bound needs r * delta >= alpha")
    n, w0 = spec.draws, spec.white0
    lead = (alpha * n / (spec.white0 + spec.black0)) ** (r * delta / alpha)
    return lead * math.prod(w0 + i * delta for i in range(r))


def distribution_moment(dist: dict[int, Fraction], r: int) -> Fraction:
    return sum((Fraction(x) ** r * p for x, p in dist.items()), Fraction(0))


def degree_from_clique_count(cliques: np.ndarray | int, k: int, degree0: int = None, cliques0: int = None):
    """Map the clique count of a vertex to its degree.

    Each new neighbour adds ``k - 1`` cliques, so
    ``deg = degree0 + (cliques - cliques0) / (k - 1)``; defaults are a newborn
    vertex (degree k, in k cliques).
    """
    degree0 = k if degree0 is None else degree0
    cliques0 = k if cliques0 is None else cliques0
    return degree0 + (np.asarray(cliques) - cliques0) // (k - 1)


def frequencies(samples: Sequence[int]) -> dict[int, float]:
    vals, counts = np.unique(np.asarray(samples), return_counts=True)
    return {int(v): c / len(samples) for v, c in zip(vals, counts)}
