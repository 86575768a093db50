"""Monte-Carlo engine for the uniform event/censoring study.

Event times are uniform on (0, lam) so the linear-in-time model is
perfectly calibrated by construction; censoring times are uniform on
(0, omega), with omega solved analytically from a target unknown-status
rate.  Each replicate draws a cohort, runs all four estimators, and a
design run aggregates replicate means, interval widths, and coverage of
the true ratio 1.

Determinism contract: replicate ``r`` of a design with seed ``s`` draws
from a counter-based generator keyed by ``(s, r)``, so results are
independent of execution order and of how replicates are distributed
across processes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .calibration import METHODS, CalibrationReport, evaluate
from .errors import (
    DegenerateVarianceError,
    HorizonError,
    NoEventsError,
    ValidationError,
)
from .risk_models import UniformModel
from .survival import Cohort

__all__ = [
    "PAPER_GRID_SEED",
    "SimulationDesign",
    "ReplicateTruth",
    "MethodSummary",
    "SimulationSummary",
    "replicate_rng",
    "solve_omega",
    "design_for_rate",
    "paper_grid_designs",
    "run_replicate",
    "run_design",
    "run_paper_grid",
]

GRID_LAMBDAS = (100.0, 200.0, 400.0)
GRID_UKS_RATES = (0.0, 0.05, 0.10, 0.20)
GRID_N = 20_000
GRID_T0 = 10.0
GRID_REPLICATES = 1_000

# Default master seed of the built-in grid; the acceptance suite pins it.
PAPER_GRID_SEED = 2


@dataclass(frozen=True)
class SimulationDesign:
    """One (event bound, censoring bound) configuration.

    ``omega=None`` disables censoring.  ``seed`` keys the per-replicate
    generator streams.
    """

    lam: float
    omega: Optional[float]
    n: int
    t0: float
    replicates: int
    seed: int

    def __post_init__(self):
        if not self.lam > self.t0 > 0:
            raise ValidationError("event-time bound must exceed the horizon")
        if self.omega is not None and self.omega <= 0:
            raise ValidationError("censoring bound must be positive")
        if self.n < 1 or self.replicates < 1:
            raise ValidationError("cohort size and replicate count must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must fit in 64 bits")


@dataclass(frozen=True)
class ReplicateTruth:
    """Quantities knowable only because the simulation sees true event times."""

    o_full: int
    o_uks: int


@dataclass(frozen=True)
class MethodSummary:
    mean_point: float
    mean_width: float
    coverage: float


@dataclass(frozen=True)
class SimulationSummary:
    """Aggregates over a design's replicates.

    Degenerate replicates (no observed events, or too little follow-up
    to evaluate the horizon) are excluded from every mean and counted in
    ``excluded``; the summary is flagged invalid when they exceed 1% of
    the replicates.
    """

    design: SimulationDesign
    target_uks_rate: Optional[float]
    methods: Dict[str, MethodSummary]
    mean_observed_cases: float
    mean_c0_tilde: float
    mean_c1: float
    mean_uks_rate: float
    mean_true_event_rate: float
    excluded: int
    valid: bool


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Counter-based generator stream for one replicate.

    Distinct ``(seed, replicate)`` keys yield independent streams, so
    replicates can run in any order or in parallel without coordination.
    """
    key = np.array([seed, replicate], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def solve_omega(lam: float, t0: float, target_uks_rate: float) -> float:
    """Censoring bound giving a target unknown-status rate.

    With both times uniform, the probability of being censored
    event-free before the horizon is ``(t0 - t0^2 / (2 lam)) / omega``
    as long as ``omega > t0``; inverting gives the bound.  Targets so
    large that the bound would not exceed the horizon fall outside this
    regime and are rejected.
    """
    if not lam > t0 > 0:
        raise ValidationError("event-time bound must exceed the horizon")
    limit = 1.0 - t0 / (2.0 * lam)
    if not 0.0 < target_uks_rate < limit:
        raise ValidationError(
            f"target unknown-status rate must lie in (0, {limit}) "
            f"for lam={lam}, t0={t0}"
        )
    return (t0 - t0 * t0 / (2.0 * lam)) / target_uks_rate


def design_for_rate(
    lam: float,
    target_uks_rate: float,
    n: int,
    t0: float,
    replicates: int,
    seed: int,
) -> SimulationDesign:
    """Design for a nominal unknown-status rate (0 means no censoring)."""
    omega = None if target_uks_rate == 0.0 else solve_omega(lam, t0, target_uks_rate)
    return SimulationDesign(
        lam=lam, omega=omega, n=n, t0=t0, replicates=replicates, seed=seed
    )


def _design_seed(master_seed: int, index: int) -> int:
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def paper_grid_designs(
    seed: int = PAPER_GRID_SEED,
    n: int = GRID_N,
    t0: float = GRID_T0,
    replicates: int = GRID_REPLICATES,
) -> Tuple[Tuple[SimulationDesign, float], ...]:
    """The built-in 3x4 grid: lam in {100,200,400} x rate in {0,5,10,20}%."""
    out = []
    index = 0
    for lam in GRID_LAMBDAS:
        for rate in GRID_UKS_RATES:
            design = design_for_rate(
                lam, rate, n, t0, replicates, _design_seed(seed, index)
            )
            out.append((design, rate))
            index += 1
    return tuple(out)


def run_replicate(
    design: SimulationDesign, replicate: int
) -> Tuple[CalibrationReport, ReplicateTruth]:
    """Draw one cohort and run all four estimators on it.

    The truth record keeps the event counts that right censoring hides:
    the full-cohort count and the unknown-status share.
    """
    rng = replicate_rng(design.seed, replicate)
    y = rng.uniform(0.0, design.lam, design.n)
    if design.omega is None:
        z = y
        delta = np.ones(design.n, dtype=np.int8)
    else:
        c = rng.uniform(0.0, design.omega, design.n)
        z = np.minimum(y, c)
        delta = (y <= c).astype(np.int8)

    cohort = Cohort(z, delta, design.t0)
    report = evaluate(cohort, UniformModel(design.lam))

    events_by_t0 = y <= design.t0
    unknown = (delta == 0) & (z < design.t0)
    truth = ReplicateTruth(
        o_full=int(np.count_nonzero(events_by_t0)),
        o_uks=int(np.count_nonzero(events_by_t0 & unknown)),
    )
    return report, truth


# Per-replicate row layout: (point, width, covers) per method, then
# o_ks, c0_tilde, c1, unknown-status rate, true event rate.
_ROW_LEN = 3 * len(METHODS) + 5


def _one_row(design: SimulationDesign, replicate: int) -> np.ndarray:
    try:
        report, truth = run_replicate(design, replicate)
    except (NoEventsError, HorizonError, DegenerateVarianceError, ValidationError):
        return np.full(_ROW_LEN, np.nan)
    row = np.empty(_ROW_LEN)
    for k, name in enumerate(METHODS):
        est = report.estimates[name]
        row[3 * k] = est.point
        row[3 * k + 1] = est.width()
        row[3 * k + 2] = 1.0 if est.covers_one() else 0.0
    row[12] = report.o_ks
    row[13] = report.c0_tilde
    row[14] = report.c1
    row[15] = report.n_uks / report.n
    row[16] = truth.o_full / report.n
    return row


def _rows_for_range(args) -> np.ndarray:
    design, start, stop = args
    out = np.empty((stop - start, _ROW_LEN))
    for k, rep in enumerate(range(start, stop)):
        out[k] = _one_row(design, rep)
    return out


def run_design(
    design: SimulationDesign,
    target_uks_rate: Optional[float] = None,
    jobs: int = 1,
) -> SimulationSummary:
    """Run every replicate of a design and aggregate.

    ``jobs > 1`` distributes replicates across processes; the summary is
    identical for any job count because rows are reassembled in
    replicate order before the reduction.
    """
    reps = design.replicates
    if jobs > 1 and reps > 1:
        jobs = min(jobs, reps)
        bounds = np.linspace(0, reps, jobs + 1).astype(int)
        chunks = [(design, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_rows_for_range, chunks))
        rows = np.vstack(parts)
    else:
        rows = _rows_for_range((design, 0, reps))

    kept = rows[~np.isnan(rows[:, 0])]
    excluded = reps - kept.shape[0]
    if kept.shape[0] == 0:
        raise NoEventsError("every replicate of the design was degenerate")
    means = kept.mean(axis=0)

    methods = {
        name: MethodSummary(
            mean_point=float(means[3 * k]),
            mean_width=float(means[3 * k + 1]),
            coverage=float(means[3 * k + 2]),
        )
        for k, name in enumerate(METHODS)
    }
    return SimulationSummary(
        design=design,
        target_uks_rate=target_uks_rate,
        methods=methods,
        mean_observed_cases=float(means[12]),
        mean_c0_tilde=float(means[13]),
        mean_c1=float(means[14]),
        mean_uks_rate=float(means[15]),
        mean_true_event_rate=float(means[16]),
        excluded=int(excluded),
        valid=excluded <= 0.01 * reps,
    )


def run_paper_grid(
    seed: int = PAPER_GRID_SEED,
    n: int = GRID_N,
    replicates: int = GRID_REPLICATES,
    t0: float = GRID_T0,
    jobs: int = 1,
) -> Tuple[SimulationSummary, ...]:
    """Run the built-in 12-design grid and return one summary per design."""
    summaries = []
    for design, rate in paper_grid_designs(seed=seed, n=n, t0=t0, replicates=replicates):
        summaries.append(run_design(design, target_uks_rate=rate, jobs=jobs))
    return tuple(summaries)
