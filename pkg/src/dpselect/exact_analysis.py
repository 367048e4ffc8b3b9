"""Exact rational expectations for dual-pivot Quickselect and the small-n oracles
that check them.

All arithmetic is done in :class:`fractions.Fraction`.  The recurrences are
evaluated with running prefix sums, so a table up to ``n = 2000`` costs O(n)
rational operations rather than O(n^2).
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import _kernels
from .select_core import CostTally, SelectionTask, partition_yaroslavskiy, quickselect_dual

MODES = ("grand", "extremal_min", "toll")
SOURCES = ("recurrence", "closed_form", "enumeration")
ENUMERATION_LIMIT = 9


class DomainError(ValueError):
    pass


class ResourceError(RuntimeError):
    pass


@dataclass
class ExactSeries:
    mode: str
    source: str
    values: dict[int, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")

    def __getitem__(self, n: int) -> Fraction:
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)

    def to_csv(self, residual_against: ExactSeries | None = None) -> str:
        """CSV text: n, exact_num, exact_den, decimal, source[, residual]."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["n", "exact_num", "exact_den", "decimal", "source"]
        if residual_against is not None:
            header.append("residual")
        w.writerow(header)
        for n in sorted(self.values):
            v = self.values[n]
            row = [n, v.numerator, v.denominator, format_decimal(v), self.source]
            if residual_against is not None:
                other = residual_against.values.get(n)
                row.append("" if other is None else str(v - other))
            w.writerow(row)
        return buf.getvalue()


def format_decimal(x: Fraction | float, digits: int = 15) -> str:
    return f"{float(x):.{digits}g}"


def harmonic(n: int) -> Fraction:
    if n < 1:
        raise DomainError("harmonic number needs n >= 1")
    return sum((Fraction(1, k) for k in range(1, n + 1)), Fraction(0))


def _harmonics(n_max: int) -> list[Fraction]:
    h = [Fraction(0)]
    for k in range(1, n_max + 1):
        h.append(h[-1] + Fraction(1, k))
    return h


def _toll(n: int) -> Fraction:
    return Fraction(19, 12) * (n + 1) - 3


def expected_toll(n: int) -> Fraction:
    """Mean comparisons of one dual-pivot partition at size ``n`` (valid for n >= 3).

    At ``n = 2`` the formula gives 7/4 while the algorithm always uses exactly
    one comparison, hence the precondition.
    """
    if n < 3:
        raise DomainError("toll formula holds only for n >= 3")
    return _toll(n)


def grand_average_recurrence(n_max: int) -> ExactSeries:
    """E[C_n] for a uniformly random rank, n = 0..n_max."""
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    e = [Fraction(0), Fraction(0), Fraction(1)]
    # s1 = sum_{p<=n} (p-1) E[p-1], s2 = sum_{p<=n} p (p-1) E[p-1]
    s1 = sum((p - 1) * e[p - 1] for p in (1, 2))
    s2 = sum(p * (p - 1) * e[p - 1] for p in (1, 2))
    for n in range(3, n_max + 1):
        s1 += (n - 1) * e[n - 1]
        s2 += n * (n - 1) * e[n - 1]
        weighted = n * s1 - s2  # sum_p (p-1)(n-p) E[p-1]
        e.append(_toll(n) + Fraction(6, n * n * (n - 1)) * weighted)
    return ExactSeries("grand", "recurrence", dict(enumerate(e[: n_max + 1])))


def grand_average_closed(n: int, h_n: Fraction | None = None) -> Fraction:
    if n < 4:
        raise DomainError("closed form holds for n >= 4")
    h = harmonic(n) if h_n is None else h_n
    return (Fraction(19, 6) * n - Fraction(37, 5) * h + Fraction(1183, 100)
            - Fraction(37, 5) * h / n - Fraction(71, 300) / n)


def extremal_average_recurrence(n_max: int) -> ExactSeries:
    """E[C_n] when seeking the minimum, n = 0..n_max."""
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    e = [Fraction(0), Fraction(0), Fraction(1)]
    s0 = e[0] + e[1]               # sum_{p<=n} E[p-1]
    s1 = 1 * e[0] + 2 * e[1]       # sum_{p<=n} p E[p-1]
    for n in range(3, n_max + 1):
        s0 += e[n - 1]
        s1 += n * e[n - 1]
        weighted = n * s0 - s1     # sum_p (n-p) E[p-1]
        e.append(_toll(n) + Fraction(2, n * (n - 1)) * weighted)
    return ExactSeries("extremal_min", "recurrence", dict(enumerate(e[: n_max + 1])))


def extremal_average_closed(n: int, h_n: Fraction | None = None) -> Fraction:
    if n < 4:
        raise DomainError("closed form holds for n >= 4")
    h = harmonic(n) if h_n is None else h_n
    num = (57 * n**4 - 48 * n**3 * h - 178 * n**3 + 144 * n**2 * h
           + 135 * n**2 - 96 * n * h - 14 * n + 24)
    return num / (24 * n * (n - 1) * (n - 2))


def closed_form_series(mode: str, n_max: int) -> ExactSeries:
    """Closed-form values for 4 <= n <= n_max."""
    f = {"grand": grand_average_closed, "extremal_min": extremal_average_closed}[mode]
    h = _harmonics(n_max)
    return ExactSeries(mode, "closed_form", {n: f(n, h[n]) for n in range(4, n_max + 1)})


def _all_permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.int64).reshape(-1, n)


def brute_force_average(n: int, rank_mode: str | int = "grand",
                        engine: str = "compiled") -> Fraction:
    """Average comparisons of dual Quickselect over all n! inputs.

    ``rank_mode`` is ``"grand"`` (also average over all ranks), ``"min"``,
    ``"max"`` or a fixed integer rank.  ``engine="python"`` runs the generic
    instrumented implementation instead of the compiled twin.
    """
    if not 1 <= n <= ENUMERATION_LIMIT:
        raise ResourceError(f"exhaustive enumeration is capped at n <= {ENUMERATION_LIMIT}")
    if rank_mode == "grand":
        ranks = range(1, n + 1)
    elif rank_mode == "min":
        ranks = [1]
    elif rank_mode == "max":
        ranks = [n]
    elif isinstance(rank_mode, int) and 1 <= rank_mode <= n:
        ranks = [rank_mode]
    else:
        raise DomainError(f"bad rank mode {rank_mode!r}")

    runs = math.factorial(n) * len(ranks)
    if engine == "python":
        total = 0
        for perm in itertools.permutations(range(1, n + 1)):
            for r in ranks:
                tally = CostTally()
                quickselect_dual(SelectionTask(list(perm), r), tally)
                total += tally.comparisons
        return Fraction(total, runs)
    if engine != "compiled":
        raise ValueError(f"unknown engine {engine!r}")
    total = _kernels.enumerate_dual(_all_permutations(n), np.array(list(ranks), np.int64))
    return Fraction(int(total), runs)


def brute_force_toll(n: int) -> Fraction:
    """Average comparisons of a single dual-pivot partition over all n! inputs."""
    if not 2 <= n <= ENUMERATION_LIMIT:
        raise ResourceError(f"toll enumeration needs 2 <= n <= {ENUMERATION_LIMIT}")
    total = 0
    for perm in itertools.permutations(range(1, n + 1)):
        tally = CostTally()
        partition_yaroslavskiy(list(perm), 0, n - 1, tally)
        total += tally.comparisons
    return Fraction(total, math.factorial(n))


def _pattern(seq: Iterable[int]) -> tuple[int, ...]:
    """Relative-order pattern: the rank of each element within ``seq``."""
    seq = list(seq)
    order = sorted(range(len(seq)), key=seq.__getitem__)
    pat = [0] * len(seq)
    for rank, idx in enumerate(order):
        pat[idx] = rank
    return tuple(pat)


@dataclass
class UniformityReport:
    n: int
    # (ip, iq) -> Counter over (left, middle, right) pattern triples
    counts: dict[tuple[int, int], Counter]
    failures: list[tuple[int, int]]

    @property
    def uniform(self) -> bool:
        return not self.failures


def randomness_preservation_check(n: int) -> UniformityReport:
    """Partition every permutation of 1..n and tabulate the three sub-array patterns.

    Uniformity is checked jointly: conditional on the pivot positions, every
    triple of (left, middle, right) order patterns must occur equally often
    and all of them must occur.  Joint uniformity implies each sub-array is
    uniform on its own.
    """
    if not 2 <= n <= 7:
        raise DomainError("randomness preservation check supports 2 <= n <= 7")
    counts: dict[tuple[int, int], Counter] = defaultdict(Counter)
    for perm in itertools.permutations(range(1, n + 1)):
        a = list(perm)
        out = partition_yaroslavskiy(a, 0, n - 1, CostTally())
        key = (_pattern(a[: out.ip]), _pattern(a[out.ip + 1: out.iq]), _pattern(a[out.iq + 1:]))
        counts[(out.ip, out.iq)][key] += 1
    failures = [key for key, c in counts.items() if not cell_is_uniform(n, *key, c)]
    return UniformityReport(n, dict(counts), sorted(failures))


def cell_is_uniform(n: int, ip: int, iq: int, counts: Counter) -> bool:
    """True when every (left, middle, right) pattern triple occurs equally often."""
    classes = (math.factorial(ip) * math.factorial(iq - ip - 1)
               * math.factorial(n - 1 - iq))
    return len(counts) == classes and len(set(counts.values())) == 1


@dataclass
class TollLawEstimate:
    n: int
    conditional_means: dict[tuple[int, int], Fraction]
    bernoulli_theta: dict[tuple[int, int], Fraction]

    def averaged(self) -> Fraction:
        pairs = self.conditional_means
        return sum(pairs.values(), Fraction(0)) / len(pairs)


def _hyper_means(n: int, p: int, q: int) -> Fraction:
    return (Fraction((n - p - 1) * (q - 2), n - 2) + Fraction((q - 2) * (n - q), n - 2))


def toll_law(n: int) -> TollLawEstimate:
    """Conditional partition cost given pivot ranks (p, q), measured exhaustively.

    The indicator probability is backed out of the enumerated conditional mean
    after removing ``n - 1`` and the two hypergeometric means.
    """
    if not 3 <= n <= 8:
        raise DomainError("toll law enumeration supports 3 <= n <= 8")
    totals: dict[tuple[int, int], int] = defaultdict(int)
    runs: dict[tuple[int, int], int] = defaultdict(int)
    for perm in itertools.permutations(range(1, n + 1)):
        key = (min(perm[0], perm[-1]), max(perm[0], perm[-1]))
        tally = CostTally()
        partition_yaroslavskiy(list(perm), 0, n - 1, tally)
        totals[key] += tally.comparisons
        runs[key] += 1
    means, theta = {}, {}
    for key in sorted(totals):
        p, q = key
        m = Fraction(totals[key], runs[key])
        means[key] = m
        theta[key] = (m - (n - 1) - _hyper_means(n, p, q)) / 3
    return TollLawEstimate(n, means, theta)


def toll_conditional_mean(n: int, p: int, q: int, law: TollLawEstimate | None = None) -> Fraction:
    if n < 3 or not 1 <= p < q <= n:
        raise DomainError(f"invalid pivot ranks ({p}, {q}) for n={n}")
    law = law if law is not None else toll_law(n)
    return n - 1 + _hyper_means(n, p, q) + 3 * law.bernoulli_theta[(p, q)]
