"""Samplers for the scaled limit laws of dual-pivot Quickselect costs.

Laws
----
``toll``
    Normalised cost of one partition, ``1 + U2 (2 - U1 - U2)`` where
    ``U1 < U2`` are the order statistics of two uniforms.
``grand_fixedpoint``
    Random-rank cost, obtained by iterating the three-branch fixed-point map
    (exactly one sub-array survives per level).
``grand_perpetuity``
    The same law written as a perpetuity ``sum_j g(X_j, W_j) prod_{k<j} X_k``
    with ``(X, W)`` of joint density ``6x`` on ``0 < x < w < 1``.
``extremal``
    Cost of finding the minimum: perpetuity with factor ``U1`` and summand the
    toll built from the *same* pair.

All samplers are vectorised over a :class:`numpy.random.Generator`.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import stats

LAWS = ("toll", "grand_fixedpoint", "grand_perpetuity", "extremal")

TOLL_MEAN = 19 / 12
GRAND_MEAN = 19 / 6
GRAND_SECOND_MOMENT = 193 / 18
GRAND_VARIANCE = 25 / 36
EXTREMAL_MEAN = 19 / 8
EXTREMAL_MIN_VARIANCE = 1261 / 4800
EXTREMAL_MAX_VARIANCE = 1717 / 4800

DEFAULT_FIXEDPOINT_ITERS = 50
DEFAULT_PERPETUITY_DEPTH = 60
DEFAULT_EXTREMAL_DEPTH = 40
CHUNK = 1 << 16


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class UniformPair:
    u1: float
    u2: float

    @property
    def lo(self) -> float:
        return min(self.u1, self.u2)

    @property
    def hi(self) -> float:
        return max(self.u1, self.u2)


@dataclass(frozen=True)
class XWDraw:
    x: float
    w: float


@dataclass(frozen=True)
class LimitDraw:
    value: float
    law: str
    depth_or_iters: int


def uniform_pairs(rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    u = rng.random((2, size))
    return np.minimum(u[0], u[1]), np.maximum(u[0], u[1])


def toll_value(lo, hi):
    return 1.0 + hi * (2.0 - lo - hi)


def toll_limit(rng: np.random.Generator, size: int) -> np.ndarray:
    lo, hi = uniform_pairs(rng, size)
    return toll_value(lo, hi)


def xw_pairs(rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``(X, W)`` with density ``6x`` on the triangle ``0 < x < w < 1``.

    ``W`` has marginal density ``3w^2``; given ``W = w``, ``X`` has density
    ``2x / w^2`` on ``(0, w)``.  Both are inverted in closed form.
    """
    u = rng.random((2, size))
    w = np.cbrt(u[0])
    x = w * np.sqrt(u[1])
    return x, w


def g_mixture(x, w, branch):
    """Toll of the surviving branch, expressed through ``(X, W)``.

    ``branch`` may be a scalar or an integer array with values in {1, 2, 3}.
    """
    b = np.asarray(branch)
    if np.any((b < 1) | (b > 3)):
        raise DomainError("branch must be 1, 2 or 3")
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    out = np.where(b == 1, 1.0 + w * (2.0 - x - w),
                   np.where(b == 2, 1.0 + (1.0 + x - w) * (2.0 * w - x),
                            1.0 + (1.0 - x) * (x + w)))
    return out if out.ndim else float(out)


def grand_perpetuity(rng: np.random.Generator, size: int,
                     depth: int = DEFAULT_PERPETUITY_DEPTH) -> np.ndarray:
    """Truncated perpetuity; E[X] = 1/2 so the dropped tail has mean (19/6) 2^-depth."""
    if depth < 0:
        raise DomainError("depth must be >= 0")
    total = np.zeros(size)
    prod = np.ones(size)
    for _ in range(depth):
        x, w = xw_pairs(rng, size)
        branch = rng.integers(1, 4, size)
        total += prod * g_mixture(x, w, branch)
        prod *= x
    return total


def grand_fixedpoint(rng: np.random.Generator, size: int,
                     iters: int = DEFAULT_FIXEDPOINT_ITERS,
                     start: float = GRAND_MEAN) -> np.ndarray:
    """Iterate the three-branch map ``iters`` times from the constant ``start``.

    Each level draws one uniform pair and an independent ``V``; ``V`` picks the
    spacing (left, middle, right) that scales the surviving copy, and the toll
    reuses the same pair.
    """
    if iters < 1:
        raise DomainError("iters must be >= 1")
    value = np.full(size, float(start))
    for _ in range(iters):
        lo, hi = uniform_pairs(rng, size)
        v = rng.random(size)
        coef = np.where(v < lo, lo, np.where(v < hi, hi - lo, 1.0 - hi))
        value = coef * value + toll_value(lo, hi)
    return value


def extremal_perpetuity(rng: np.random.Generator, size: int,
                        depth: int = DEFAULT_EXTREMAL_DEPTH) -> np.ndarray:
    """Perpetuity for the minimum; E[U1] = 1/3 so the tail has mean (19/8) 3^-depth."""
    if depth < 0:
        raise DomainError("depth must be >= 0")
    total = np.zeros(size)
    prod = np.ones(size)
    for _ in range(depth):
        lo, hi = uniform_pairs(rng, size)
        total += prod * toll_value(lo, hi)
        prod *= lo
    return total


def _default_depth(law: str) -> int:
    return {"toll": 1, "grand_fixedpoint": DEFAULT_FIXEDPOINT_ITERS,
            "grand_perpetuity": DEFAULT_PERPETUITY_DEPTH,
            "extremal": DEFAULT_EXTREMAL_DEPTH}[law]


def sample_array(law: str, rng: np.random.Generator, size: int,
                 depth: int | None = None) -> np.ndarray:
    if law not in LAWS:
        raise DomainError(f"unknown law {law!r}")
    d = _default_depth(law) if depth is None else depth
    if law == "toll":
        return toll_limit(rng, size)
    if law == "grand_fixedpoint":
        return grand_fixedpoint(rng, size, d)
    if law == "grand_perpetuity":
        return grand_perpetuity(rng, size, d)
    return extremal_perpetuity(rng, size, d)


def draw_many(law: str, size: int, seed: int, depth: int | None = None,
              chunk: int = CHUNK) -> np.ndarray:
    """Seeded draws in fixed-size chunks.

    Chunk ``i`` uses its own generator built from ``(seed, i)``, so any chunk
    can be produced independently (e.g. by another worker) with the same result.
    """
    parts = []
    for i, start in enumerate(range(0, size, chunk)):
        rng = np.random.default_rng([seed, i])
        parts.append(sample_array(law, rng, min(chunk, size - start), depth))
    return np.concatenate(parts) if parts else np.empty(0)


def sample_toll_limit(rng: np.random.Generator) -> LimitDraw:
    return LimitDraw(float(toll_limit(rng, 1)[0]), "toll", 1)


def sample_xw(rng: np.random.Generator) -> XWDraw:
    x, w = xw_pairs(rng, 1)
    return XWDraw(float(x[0]), float(w[0]))


def sample_grand_perpetuity(rng: np.random.Generator,
                            depth: int = DEFAULT_PERPETUITY_DEPTH) -> LimitDraw:
    return LimitDraw(float(grand_perpetuity(rng, 1, depth)[0]), "grand_perpetuity", depth)


def sample_grand_fixedpoint(rng: np.random.Generator,
                            iters: int = DEFAULT_FIXEDPOINT_ITERS) -> LimitDraw:
    return LimitDraw(float(grand_fixedpoint(rng, 1, iters)[0]), "grand_fixedpoint", iters)


def sample_extremal(rng: np.random.Generator,
                    depth: int = DEFAULT_EXTREMAL_DEPTH) -> LimitDraw:
    return LimitDraw(float(extremal_perpetuity(rng, 1, depth)[0]), "extremal", depth)


@dataclass
class MomentSummary:
    """Mergeable running moments (count, mean, central sums m2..m4, min, max).

    Merging uses the pairwise update formulas of Chan et al. and Pébay.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0
    min: float = math.inf
    max: float = -math.inf

    @classmethod
    def from_array(cls, values) -> MomentSummary:
        x = np.asarray(values, dtype=float)
        if x.size == 0:
            raise DomainError("moments of an empty sample")
        mu = x.mean()
        d = x - mu
        d2 = d * d
        return cls(int(x.size), float(mu), float(d2.sum()), float((d2 * d).sum()),
                   float((d2 * d2).sum()), float(x.min()), float(x.max()))

    def push(self, x: float) -> None:
        n1 = self.count
        self.count += 1
        n = self.count
        delta = x - self.mean
        dn = delta / n
        dn2 = dn * dn
        term1 = delta * dn * n1
        self.mean += dn
        self.m4 += term1 * dn2 * (n * n - 3 * n + 3) + 6 * dn2 * self.m2 - 4 * dn * self.m3
        self.m3 += term1 * dn * (n - 2) - 3 * dn * self.m2
        self.m2 += term1
        self.min = min(self.min, x)
        self.max = max(self.max, x)

    def merge(self, other: MomentSummary) -> MomentSummary:
        if self.count == 0 or other.count == 0:
            raise DomainError("cannot merge an empty summary")
        na, nb = self.count, other.count
        n = na + nb
        delta = other.mean - self.mean
        d2, d3, d4 = delta * delta, delta ** 3, delta ** 4
        mean = self.mean + delta * nb / n
        m2 = self.m2 + other.m2 + d2 * na * nb / n
        m3 = (self.m3 + other.m3 + d3 * na * nb * (na - nb) / (n * n)
              + 3 * delta * (na * other.m2 - nb * self.m2) / n)
        m4 = (self.m4 + other.m4 + d4 * na * nb * (na * na - na * nb + nb * nb) / n ** 3
              + 6 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
              + 4 * delta * (na * other.m3 - nb * self.m3) / n)
        return MomentSummary(n, mean, m2, m3, m4, min(self.min, other.min),
                             max(self.max, other.max))

    @property
    def variance(self) -> float:
        """Unbiased sample variance."""
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.count)

    def variance_stderr(self) -> float:
        """Large-sample standard error of the variance, from the fourth moment."""
        n = self.count
        mu4 = self.m4 / n
        s2 = self.m2 / n
        return math.sqrt(max(mu4 - s2 * s2, 0.0) / n)

    def std_stderr(self) -> float:
        return self.variance_stderr() / (2 * self.std) if self.std > 0 else 0.0

    def second_moment_stderr(self) -> float:
        """Standard error of the raw second moment E[X^2]."""
        n = self.count
        mu = self.mean
        mu2, mu3, mu4 = self.m2 / n, self.m3 / n, self.m4 / n
        # Var[X^2] expressed through central moments
        var_sq = mu4 + 4 * mu * mu3 + 4 * mu * mu * mu2 - mu2 * mu2
        return math.sqrt(max(var_sq, 0.0) / n)

    @property
    def second_moment(self) -> float:
        return self.m2 / self.count + self.mean ** 2


def moments(draws: Iterable[float]) -> MomentSummary:
    s = MomentSummary()
    for x in draws:
        s.push(float(x))
    if s.count == 0:
        raise DomainError("moments of an empty stream")
    return s


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float
    level: float
    reject: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "reject", self.pvalue < self.level)


def ks_two_sample(a, b, level: float = 0.001) -> KSResult:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise DomainError("KS test needs two non-empty samples")
    res = stats.ks_2samp(a, b)
    return KSResult(float(res.statistic), float(res.pvalue), level)


def histogram_csv(values, bins: int) -> str:
    """Columns bin_lo, bin_hi, count, density."""
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins)
    width = np.diff(edges)
    total = counts.sum()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_lo", "bin_hi", "count", "density"])
    for lo, hi, c, dw in zip(edges[:-1], edges[1:], counts, width):
        w.writerow([f"{lo:.15g}", f"{hi:.15g}", int(c), f"{c / (total * dw):.15g}"])
    return buf.getvalue()
