"""Seeded Monte Carlo driver for instrumented Quickselect runs.

Trial ``i`` of a run with seed ``s`` always sees the same shuffled input and
the same random rank, whatever the trial is batched with: its generator is
seeded from ``SeedSequence([s, i])``.  Reports are built from the per-trial
integer counts in trial order, so they are bit-identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .exact_analysis import (extremal_average_closed, extremal_average_recurrence,
                             grand_average_closed, grand_average_recurrence)
from .limit_laws import (EXTREMAL_MAX_VARIANCE, EXTREMAL_MIN_VARIANCE,
                         GRAND_VARIANCE, MomentSummary)

log = logging.getLogger(__name__)

DEFAULT_SEED = 20130415
DEFAULT_BUDGET = 5 * 10**9  # element-trials, i.e. n * trials
ALGOS = ("dual", "classic")
RANK_MODES = ("uniform", "min", "max")


class ResourceError(RuntimeError):
    pass


class ConfigMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    n: int
    trials: int
    algo: str = "dual"
    rank_mode: str | int = "uniform"
    seed: int = DEFAULT_SEED
    workers: int = 1
    trial_offset: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.algo not in ALGOS:
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if isinstance(self.rank_mode, str):
            if self.rank_mode not in RANK_MODES:
                raise ValueError(f"unknown rank mode {self.rank_mode!r}")
        elif not 1 <= self.rank_mode <= self.n:
            raise ValueError(f"fixed rank {self.rank_mode} outside [1, {self.n}]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def run_key(self) -> tuple:
        """Fields that must agree for two reports to be mergeable."""
        return (self.n, self.algo, self.rank_mode, self.seed)


@dataclass
class SimReport:
    config: SimConfig
    comparisons: MomentSummary
    swaps: MomentSummary
    wall_time: float
    trial_ranges: tuple[tuple[int, int], ...] = ()
    comparison_samples: np.ndarray | None = field(default=None, repr=False)
    swap_samples: np.ndarray | None = field(default=None, repr=False)

    def rows(self) -> list[dict]:
        out = []
        for metric, s in (("comparisons", self.comparisons), ("swaps", self.swaps)):
            out.append({
                "metric": metric,
                "algo": self.config.algo,
                "rank_mode": str(self.config.rank_mode),
                "n": self.config.n,
                "trials": s.count,
                "mean": s.mean,
                "variance": s.variance,
                "stderr": s.stderr,
                "min": s.min,
                "max": s.max,
                "paper_ref": "simulation",
            })
        return out

    def to_json(self) -> str:
        doc = {"config": asdict(self.config), "trial_ranges": list(self.trial_ranges),
               "results": self.rows()}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        return _rows_to_csv(self.rows())


def _fmt(v):
    return f"{v:.15g}" if isinstance(v, float) else v


def _rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def trial_seeds(seed: int, start: int, stop: int) -> np.ndarray:
    return np.array([np.random.SeedSequence([seed, i]).generate_state(1)[0]
                     for i in range(start, stop)], dtype=np.uint32)


def _rank_code(rank_mode) -> tuple[int, int]:
    if rank_mode == "uniform":
        return _kernels.RANK_UNIFORM, 0
    if rank_mode == "min":
        return _kernels.RANK_MIN, 0
    if rank_mode == "max":
        return _kernels.RANK_MAX, 0
    return _kernels.RANK_FIXED, int(rank_mode)


def _run_range(n: int, algo: str, rank_mode, seed: int, start: int, stop: int):
    seeds = trial_seeds(seed, start, stop)
    cmp_ = np.zeros(stop - start, np.int64)
    swp = np.zeros(stop - start, np.int64)
    mode, fixed = _rank_code(rank_mode)
    algo_code = _kernels.ALGO_DUAL if algo == "dual" else _kernels.ALGO_CLASSIC
    _kernels.run_batch(n, seeds, algo_code, mode, fixed, cmp_, swp)
    return cmp_, swp


def run_trials(config: SimConfig, budget: int = DEFAULT_BUDGET,
               keep_samples: bool = False) -> SimReport:
    if config.n * config.trials > budget:
        raise ResourceError(f"n * trials = {config.n * config.trials} exceeds budget {budget}")
    t0 = time.perf_counter()
    start, stop = config.trial_offset, config.trial_offset + config.trials
    if config.workers == 1:
        cmp_, swp = _run_range(config.n, config.algo, config.rank_mode, config.seed, start, stop)
    else:
        bounds = np.linspace(start, stop, config.workers + 1).astype(int)
        with ProcessPoolExecutor(config.workers) as pool:
            futs = [pool.submit(_run_range, config.n, config.algo, config.rank_mode,
                                config.seed, int(a), int(b))
                    for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
            parts = [f.result() for f in futs]
        cmp_ = np.concatenate([p[0] for p in parts])
        swp = np.concatenate([p[1] for p in parts])
    elapsed = time.perf_counter() - t0
    log.info("n=%d trials=%d %s/%s in %.1fs", config.n, config.trials, config.algo,
             config.rank_mode, elapsed)
    return SimReport(config, MomentSummary.from_array(cmp_), MomentSummary.from_array(swp),
                     elapsed, ((start, stop),),
                     cmp_ if keep_samples else None, swp if keep_samples else None)


def merge_reports(a: SimReport, b: SimReport) -> SimReport:
    """Combine two runs of the same experiment over disjoint trial ranges."""
    if a is None or b is None:
        raise ConfigMismatch("cannot merge with an empty report")
    if a.config.run_key() != b.config.run_key():
        raise ConfigMismatch("reports come from different experiments")
    ranges = sorted(a.trial_ranges + b.trial_ranges)
    for (_, hi), (lo, _) in zip(ranges, ranges[1:]):
        if lo < hi:
            raise ConfigMismatch("trial ranges overlap")
    total = a.config.trials + b.config.trials
    cfg = SimConfig(a.config.n, total, a.config.algo, a.config.rank_mode, a.config.seed,
                    a.config.workers, min(r[0] for r in ranges))
    samples = None, None
    if a.comparison_samples is not None and b.comparison_samples is not None:
        first, second = (a, b) if a.trial_ranges[0] < b.trial_ranges[0] else (b, a)
        samples = (np.concatenate([first.comparison_samples, second.comparison_samples]),
                   np.concatenate([first.swap_samples, second.swap_samples]))
    return SimReport(cfg, a.comparisons.merge(b.comparisons), a.swaps.merge(b.swaps),
                     a.wall_time + b.wall_time, tuple(ranges), *samples)


# --- the results table -------------------------------------------------------

@dataclass
class Table1Row:
    measure: str          # comparisons | swaps
    statistic: str        # mean | std
    regime: str           # uniform | min | max
    algo: str
    estimate: float
    stderr: float
    reference: float
    z: float
    rel_error: float
    convention_sensitive: bool
    passed: bool
    paper_ref: str


@dataclass
class Table1Report:
    n_small: int
    n_large: int
    trials_small: int
    trials_large: int
    seed: int
    rows: list[Table1Row]
    wall_time: float
    reports: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_json(self) -> str:
        doc = {
            "config": {"n_small": self.n_small, "n_large": self.n_large,
                       "trials_small": self.trials_small, "trials_large": self.trials_large,
                       "seed": self.seed},
            "rows": [asdict(r) for r in self.rows],
            "passed": self.passed,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        return _rows_to_csv([asdict(r) for r in self.rows])

    def format(self) -> str:
        lines = [f"{'measure':<12}{'stat':<6}{'regime':<9}{'algo':<9}{'estimate':>11}"
                 f"{'reference':>11}{'z':>8}  ok"]
        for r in self.rows:
            lines.append(f"{r.measure:<12}{r.statistic:<6}{r.regime:<9}{r.algo:<9}"
                         f"{r.estimate:>11.6f}{r.reference:>11.6f}{r.z:>8.2f}  "
                         f"{'yes' if r.passed else 'NO'}")
        return "\n".join(lines)


# (measure, statistic, regime, algo, reference coefficient)
TABLE1_CELLS = (
    ("comparisons", "mean", "uniform", "dual", 19 / 6),
    ("comparisons", "mean", "uniform", "classic", 3.0),
    ("comparisons", "std", "uniform", "dual", math.sqrt(GRAND_VARIANCE)),
    ("comparisons", "std", "uniform", "classic", 1.0),
    ("swaps", "mean", "uniform", "dual", 1.0),
    ("swaps", "mean", "uniform", "classic", 0.5),
    ("comparisons", "mean", "min", "dual", 19 / 8),
    ("comparisons", "mean", "min", "classic", 2.0),
    ("comparisons", "std", "min", "dual", math.sqrt(EXTREMAL_MIN_VARIANCE)),
    ("comparisons", "std", "max", "dual", math.sqrt(EXTREMAL_MAX_VARIANCE)),
    ("comparisons", "std", "min", "classic", math.sqrt(0.5)),
    ("swaps", "mean", "min", "dual", 0.75),
    ("swaps", "mean", "min", "classic", 1 / 3),
)

Z_LIMIT = 4.0
SWAP_REL_LIMIT = 0.05


def _cell(measure, statistic, regime, algo, ref, small: SimReport, large: SimReport) -> Table1Row:
    pick = (lambda r: r.comparisons) if measure == "comparisons" else (lambda r: r.swaps)
    s, l = pick(small), pick(large)
    n_s, n_l = small.config.n, large.config.n
    if statistic == "mean":
        # slope between the two sizes cancels the constant term
        est = (l.mean - s.mean) / (n_l - n_s)
        se = math.hypot(l.stderr, s.stderr) / (n_l - n_s)
    else:
        est = l.std / n_l
        se = l.std_stderr() / n_l
    z = (est - ref) / se if se > 0 else math.inf
    rel = (est - ref) / ref
    sensitive = measure == "swaps"
    passed = abs(rel) < SWAP_REL_LIMIT if sensitive else abs(z) < Z_LIMIT
    tag = f"results table: {algo} {regime} {measure} {statistic}"
    return Table1Row(measure, statistic, regime, algo, est, se, ref, z, rel,
                     sensitive, passed, tag)


def table1(n_small: int = 1000, n_large: int = 10_000, trials_small: int = 100_000,
           trials_large: int = 100_000, seed: int = DEFAULT_SEED, workers: int = 1,
           keep_samples: bool = False) -> Table1Report:
    t0 = time.perf_counter()
    runs = sorted({(algo, regime) for _, _, regime, algo, _ in TABLE1_CELLS})
    reports: dict[tuple, SimReport] = {}
    for algo, regime in runs:
        for n, trials in ((n_small, trials_small), (n_large, trials_large)):
            cfg = SimConfig(n, trials, algo, regime, seed, workers)
            reports[(algo, regime, n)] = run_trials(cfg, keep_samples=keep_samples)
    rows = [_cell(m, st, rg, al, ref, reports[(al, rg, n_small)], reports[(al, rg, n_large)])
            for m, st, rg, al, ref in TABLE1_CELLS]
    return Table1Report(n_small, n_large, trials_small, trials_large, seed, rows,
                        time.perf_counter() - t0, reports)


def exact_mean(n: int, rank_mode: str) -> Fraction:
    """Exact expected comparisons of dual Quickselect at size ``n``."""
    if rank_mode not in ("uniform", "min"):
        raise ValueError(f"no exact mean for rank mode {rank_mode!r}")
    if n >= 4:
        closed = grand_average_closed if rank_mode == "uniform" else extremal_average_closed
        return closed(n)
    rec = grand_average_recurrence if rank_mode == "uniform" else extremal_average_recurrence
    return rec(2)[n] if n <= 2 else rec(n)[n]
