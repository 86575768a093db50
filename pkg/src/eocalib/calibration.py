"""Expected/observed calibration ratios under right censoring.

Four estimators of the expected-to-observed event ratio over a fixed
horizon are implemented:

``m0``
    Restricts both sums to known-status subjects.  Biased low under
    censoring: the known-status group over-represents cases.
``m1``
    Sums expected risks truncated at each subject's own follow-up time
    over the whole cohort.  Biased low whenever cases occur before the
    horizon, since their contribution is cut at the event time.
``m2``
    Keeps full-horizon risks for known-status subjects and truncates
    only unknown-status ones; removes the ``m1`` truncation bias.
``m3``
    Divides the full expected sum by the Kaplan-Meier-imputed event
    count; consistent under independent censoring.

The diagnostics quantify the gaps: ``c0_tilde`` approximates m3/m0 by
the ratio of the known-status event proportion to the Kaplan-Meier
incidence (valid when censoring is independent of the covariates), and
``c1`` is exactly m2/m1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import (
    DegenerateVarianceError,
    NoEventsError,
    ValidationError,
)
from .risk_models import RiskModel
from .survival import (
    Cohort,
    KMEstimate,
    StatusPartition,
    classify_subjects,
    empirical_cdf_known,
    kaplan_meier,
)

__all__ = [
    "METHODS",
    "ExpectedSums",
    "ObservedCounts",
    "EORatioEstimate",
    "CalibrationReport",
    "GroupCalibration",
    "GroupedCalibrationReport",
    "expected_sums",
    "observed_counts",
    "estimate_m0",
    "estimate_m1",
    "estimate_m2",
    "estimate_m3",
    "ci_poisson",
    "ci_delta_km",
    "correction_c0_tilde",
    "correction_c1",
    "evaluate",
    "evaluate_grouped",
]

METHODS = ("m0", "m1", "m2", "m3")

# Multiplier of the standard 95% intervals; fixed by the published
# formulas rather than recomputed from a normal quantile.
Z95 = 1.96


@dataclass(frozen=True)
class ExpectedSums:
    """Expected-case sums: full cohort, by status group, and truncated.

    ``e_m1`` truncates every subject's risk at min(horizon, follow-up);
    ``e_m2`` truncates only unknown-status subjects.  For nondecreasing
    risk models ``e_m1 <= e_m2 <= e_full``.
    """

    e_full: float
    e_ks: float
    e_uks: float
    e_m1: float
    e_m2: float


@dataclass(frozen=True)
class ObservedCounts:
    """Observed event counts usable under censoring.

    ``o_ks`` counts events by the horizon (all of which belong to the
    known-status group); ``o_m1`` equals it by construction.  ``o_hat``
    is the Kaplan-Meier-imputed count ``n * K(t0)``, a real number.
    The full-cohort true count is unobservable and deliberately absent.
    """

    o_ks: int
    o_m1: int
    o_hat: float


@dataclass(frozen=True)
class EORatioEstimate:
    """One estimator's point estimate and 95% interval."""

    method: str
    point: float
    ci_low: float
    ci_high: float
    numerator: float
    denominator: float

    def width(self) -> float:
        return self.ci_high - self.ci_low

    def covers_one(self) -> bool:
        return self.ci_low <= 1.0 <= self.ci_high


@dataclass(frozen=True)
class CalibrationReport:
    """All requested estimates plus partition counts and diagnostics."""

    t0: float
    n: int
    n_ks: int
    n_uks: int
    o_ks: int
    km_incidence: float
    km_greenwood_var: float
    km_degenerate: bool
    c0_tilde: Optional[float]
    c1: Optional[float]
    estimates: Mapping[str, EORatioEstimate]


def _check_o_ks(o_ks: int) -> None:
    if o_ks < 1:
        raise NoEventsError("no observed events by the horizon")


def ci_poisson(point: float, o_ks: int) -> Tuple[float, float]:
    """95% interval from the Poisson variance of the log observed count.

    The bounds are ``point * exp(-+ 1.96 / sqrt(o_ks))``.  For the
    biased estimators this interval inherits the bias of the point
    estimate; it is emitted for all of m0..m2 regardless.
    """
    _check_o_ks(o_ks)
    half = Z95 / math.sqrt(o_ks)
    return point * math.exp(-half), point * math.exp(half)


def ci_delta_km(point: float, km: KMEstimate) -> Tuple[float, float]:
    """95% interval via the delta method on the log of the KM-based ratio.

    The bounds are ``point * exp(-+ 1.96 * sigma / K)`` with ``sigma``
    the Greenwood standard error and ``K`` the incidence at the horizon.
    """
    if km.incidence <= 0.0:
        raise NoEventsError("Kaplan-Meier incidence is zero at the horizon")
    if km.degenerate:
        raise DegenerateVarianceError(
            "Greenwood variance undefined: survival estimate reached zero"
        )
    half = Z95 * math.sqrt(km.greenwood_var) / km.incidence
    return point * math.exp(-half), point * math.exp(half)


def estimate_m0(e_ks: float, o_ks: int) -> EORatioEstimate:
    """Known-status-only ratio with its Poisson interval."""
    _check_o_ks(o_ks)
    point = e_ks / o_ks
    low, high = ci_poisson(point, o_ks)
    return EORatioEstimate("m0", point, low, high, e_ks, float(o_ks))


def estimate_m1(e_m1: float, o_ks: int) -> EORatioEstimate:
    """Follow-up-truncated ratio with its Poisson interval."""
    _check_o_ks(o_ks)
    point = e_m1 / o_ks
    low, high = ci_poisson(point, o_ks)
    return EORatioEstimate("m1", point, low, high, e_m1, float(o_ks))


def estimate_m2(e_m2: float, o_ks: int) -> EORatioEstimate:
    """Hybrid-truncation ratio with its Poisson interval."""
    _check_o_ks(o_ks)
    point = e_m2 / o_ks
    low, high = ci_poisson(point, o_ks)
    return EORatioEstimate("m2", point, low, high, e_m2, float(o_ks))


def estimate_m3(e_full: float, km: KMEstimate, n: int) -> EORatioEstimate:
    """Kaplan-Meier-imputed ratio with its delta-method interval."""
    if km.incidence <= 0.0:
        raise NoEventsError("Kaplan-Meier incidence is zero at the horizon")
    o_hat = n * km.incidence
    point = e_full / o_hat
    low, high = ci_delta_km(point, km)
    return EORatioEstimate("m3", point, low, high, e_full, o_hat)


def correction_c0_tilde(f_ks: float, km_incidence: float) -> float:
    """Case over-representation of the known-status group.

    Ratio of the known-status event proportion to the Kaplan-Meier
    incidence; approximates m3/m0 when censoring is independent of the
    covariates, and is at least 1 for large cohorts.
    """
    if km_incidence <= 0.0:
        raise NoEventsError("Kaplan-Meier incidence is zero at the horizon")
    return f_ks / km_incidence


def correction_c1(r2: EORatioEstimate, r1: EORatioEstimate) -> float:
    """Exact truncation-bias factor m2/m1; always at least 1."""
    if r1.point <= 0.0:
        raise ValidationError("m1 point estimate must be positive")
    return r2.point / r1.point


def observed_counts(cohort: Cohort, km: Optional[KMEstimate] = None) -> ObservedCounts:
    """Event counts observable under censoring, plus the KM-imputed one."""
    if km is None:
        km = kaplan_meier(cohort)
    o_ks = int(np.count_nonzero((cohort.delta == 1) & (cohort.z <= cohort.t0)))
    return ObservedCounts(o_ks=o_ks, o_m1=o_ks, o_hat=cohort.n * km.incidence)


def expected_sums(
    cohort: Cohort, partition: StatusPartition, model: RiskModel
) -> ExpectedSums:
    """Evaluate the risk model at the horizon and at each follow-up time.

    Raises :class:`ValidationError` if the partition does not match the
    cohort; risk-model failures carry the offending subject index.
    """
    sums, (n_ks, n_uks, _) = _sums_and_counts(cohort, model)
    if partition.n_ks != n_ks or partition.n_uks != n_uks:
        raise ValidationError("partition does not match cohort")
    return sums


def _sums_and_counts(cohort: Cohort, model: RiskModel):
    e_t0 = model.evaluate_many(cohort.covariates, np.full(cohort.n, cohort.t0))
    e_z = model.evaluate_many(cohort.covariates, cohort.z)
    n_ks, n_uks, o_ks, e_full, e_ks, e_uks, e_m1, e_m2 = _kernels.calibration_sums(
        cohort.z, cohort.delta, e_t0, e_z, cohort.t0
    )
    sums = ExpectedSums(e_full=e_full, e_ks=e_ks, e_uks=e_uks, e_m1=e_m1, e_m2=e_m2)
    return sums, (n_ks, n_uks, o_ks)


def _normalize_methods(methods: Sequence[str]) -> Tuple[str, ...]:
    chosen = tuple(m for m in METHODS if m in set(methods))
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValidationError(f"unknown methods: {sorted(unknown)}")
    if not chosen:
        raise ValidationError("at least one method must be selected")
    return chosen


def evaluate(
    cohort: Cohort,
    risk_model: RiskModel,
    t0: Optional[float] = None,
    methods: Sequence[str] = METHODS,
) -> CalibrationReport:
    """Run the selected estimators on a cohort; pure function of inputs.

    ``c1`` is filled only when both m1 and m2 are requested; the
    over-representation diagnostic ``c0_tilde`` is always computed.
    """
    methods = _normalize_methods(methods)
    if t0 is not None and t0 != cohort.t0:
        cohort = Cohort(cohort.z, cohort.delta, t0, cohort.covariates)

    partition = classify_subjects(cohort)
    sums, (n_ks, n_uks, o_ks) = _sums_and_counts(cohort, risk_model)
    if o_ks < 1:
        raise NoEventsError("cohort has no observed events by the horizon")
    km = kaplan_meier(cohort)

    estimates: Dict[str, EORatioEstimate] = {}
    if "m0" in methods:
        estimates["m0"] = estimate_m0(sums.e_ks, o_ks)
    if "m1" in methods:
        estimates["m1"] = estimate_m1(sums.e_m1, o_ks)
    if "m2" in methods:
        estimates["m2"] = estimate_m2(sums.e_m2, o_ks)
    if "m3" in methods:
        estimates["m3"] = estimate_m3(sums.e_full, km, cohort.n)

    f_ks = empirical_cdf_known(partition, cohort)
    c0 = correction_c0_tilde(f_ks, km.incidence)
    c1 = None
    if "m1" in methods and "m2" in methods:
        c1 = correction_c1(estimates["m2"], estimates["m1"])

    return CalibrationReport(
        t0=cohort.t0,
        n=cohort.n,
        n_ks=n_ks,
        n_uks=n_uks,
        o_ks=o_ks,
        km_incidence=km.incidence,
        km_greenwood_var=km.greenwood_var,
        km_degenerate=km.degenerate,
        c0_tilde=c0,
        c1=c1,
        estimates=estimates,
    )


@dataclass(frozen=True)
class GroupCalibration:
    """One risk-grouped slice of an adjusted calibration report.

    ``estimates`` is None (with ``note`` set) when the group has no
    observed events or too little follow-up to evaluate the horizon.
    """

    group: int
    risk_low: float
    risk_high: float
    n: int
    n_ks: int
    n_uks: int
    o_ks: int
    estimates: Optional[Mapping[str, EORatioEstimate]]
    note: Optional[str] = None


@dataclass(frozen=True)
class GroupedCalibrationReport:
    """Adjusted calibration by groups of predicted risk."""

    t0: float
    n: int
    groups: Tuple[GroupCalibration, ...]


def evaluate_grouped(
    cohort: Cohort,
    risk_model: RiskModel,
    t0: Optional[float] = None,
    n_groups: int = 10,
    methods: Sequence[str] = ("m0", "m3"),
) -> GroupedCalibrationReport:
    """Adjusted calibration over quantile groups of predicted risk.

    Only m0 and m3 are allowed here: the truncated sums of m1/m2 mix
    risks attached to different horizons, so grouping by predicted risk
    is not meaningful for them and m2 in particular is rejected.
    """
    methods = _normalize_methods(methods)
    bad = [m for m in methods if m not in ("m0", "m3")]
    if bad:
        raise ValidationError(
            f"adjusted (grouped) calibration supports only m0 and m3, not {bad}"
        )
    if t0 is not None and t0 != cohort.t0:
        cohort = Cohort(cohort.z, cohort.delta, t0, cohort.covariates)

    e_t0 = risk_model.evaluate_many(cohort.covariates, np.full(cohort.n, cohort.t0))
    inner = np.quantile(e_t0, np.linspace(0.0, 1.0, n_groups + 1)[1:-1])
    edges = np.unique(inner)
    labels = np.searchsorted(edges, e_t0, side="right")

    rows = []
    for g in range(len(edges) + 1):
        idx = np.flatnonzero(labels == g)
        if idx.shape[0] == 0:
            continue
        covs = [cohort.covariates[i] for i in idx] if cohort.covariates is not None else None
        risk_low = float(e_t0[idx].min())
        risk_high = float(e_t0[idx].max())
        try:
            sub = Cohort(cohort.z[idx], cohort.delta[idx], cohort.t0, covs)
            report = evaluate(sub, risk_model, methods=methods)
        except (NoEventsError, ValidationError, DegenerateVarianceError) as exc:
            unknown = (cohort.delta[idx] == 0) & (cohort.z[idx] < cohort.t0)
            n_uks = int(np.count_nonzero(unknown))
            o_ks = int(np.count_nonzero((cohort.delta[idx] == 1) & (cohort.z[idx] <= cohort.t0)))
            rows.append(
                GroupCalibration(
                    group=len(rows),
                    risk_low=risk_low,
                    risk_high=risk_high,
                    n=int(idx.shape[0]),
                    n_ks=int(idx.shape[0]) - n_uks,
                    n_uks=n_uks,
                    o_ks=o_ks,
                    estimates=None,
                    note=str(exc),
                )
            )
            continue
        rows.append(
            GroupCalibration(
                group=len(rows),
                risk_low=risk_low,
                risk_high=risk_high,
                n=report.n,
                n_ks=report.n_ks,
                n_uks=report.n_uks,
                o_ks=report.o_ks,
                estimates=report.estimates,
            )
        )
    return GroupedCalibrationReport(t0=cohort.t0, n=cohort.n, groups=tuple(rows))
