"""Censoring-aware survival primitives.

A cohort is a set of right-censored follow-up records ``(z, delta)``
evaluated against a fixed horizon ``t0``: ``z`` is the observed
follow-up time (event or censoring, whichever came first) and ``delta``
is 1 when the event time was observed.  Subjects split into a
known-status group (event by ``t0``, or followed at least ``t0`` years)
and an unknown-status group (censored event-free before ``t0``).  On
this module live that partition, the Kaplan-Meier estimate of the
cumulative event probability, its Greenwood variance, and the empirical
event proportion of the known-status group.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import HorizonError, ValidationError

__all__ = [
    "Subject",
    "Cohort",
    "StatusPartition",
    "KMPath",
    "KMEstimate",
    "classify_subjects",
    "kaplan_meier",
    "greenwood_variance",
    "empirical_cdf_known",
]


@dataclass(frozen=True)
class Subject:
    """One follow-up record: time, event indicator, optional covariates."""

    z: float
    delta: int
    covariates: object = None


@dataclass(frozen=True)
class Cohort:
    """Columnar cohort: follow-up times, event indicators, horizon.

    ``covariates`` carries one entry per subject for covariate-driven
    risk models; leave it ``None`` for models that ignore covariates.
    """

    z: np.ndarray
    delta: np.ndarray
    t0: float
    covariates: Optional[Sequence] = None

    def __post_init__(self):
        z = np.ascontiguousarray(self.z, dtype=np.float64)
        delta = np.ascontiguousarray(self.delta, dtype=np.int8)
        if z.ndim != 1 or z.shape[0] == 0:
            raise ValidationError("cohort must contain at least one subject")
        if delta.shape != z.shape:
            raise ValidationError("z and delta must have equal length")
        if not np.all(np.isfinite(z)) or np.any(z <= 0.0):
            raise ValidationError("follow-up times must be finite and > 0")
        if not np.all((delta == 0) | (delta == 1)):
            raise ValidationError("event indicators must be 0 or 1")
        if not (0.0 < self.t0 <= float(z.max())):
            raise HorizonError(
                f"horizon t0={self.t0} outside (0, max follow-up {float(z.max())}]"
            )
        if self.covariates is not None and len(self.covariates) != z.shape[0]:
            raise ValidationError("covariates must have one entry per subject")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "delta", delta)
        z.flags.writeable = False
        delta.flags.writeable = False

    @classmethod
    def from_subjects(cls, subjects: Sequence[Subject], t0: float) -> "Cohort":
        z = np.array([s.z for s in subjects], dtype=np.float64)
        delta = np.array([s.delta for s in subjects], dtype=np.int8)
        covs = [s.covariates for s in subjects]
        if all(c is None for c in covs):
            covs = None
        return cls(z, delta, t0, covs)

    @property
    def n(self) -> int:
        return int(self.z.shape[0])


@dataclass(frozen=True)
class StatusPartition:
    """Index sets of known- and unknown-status subjects at the horizon."""

    known: np.ndarray
    unknown: np.ndarray
    n_ks: int
    n_uks: int


@dataclass(frozen=True)
class KMPath:
    """Distinct event times with at-risk and event counts, in time order."""

    times: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray


@dataclass(frozen=True)
class KMEstimate:
    """Product-limit estimate of the cumulative event probability at ``t0``.

    ``incidence + survival == 1`` by construction.  ``degenerate`` marks
    the case where the survival estimate reached zero, in which the
    Greenwood variance is undefined (stored as NaN).
    """

    horizon: float
    incidence: float
    survival: float
    greenwood_var: float
    degenerate: bool
    path: KMPath = field(repr=False)


def classify_subjects(cohort: Cohort) -> StatusPartition:
    """Split a cohort into known- and unknown-status index sets.

    A subject's status at the horizon is unknown exactly when they were
    censored event-free strictly before ``t0``; everyone else (events by
    ``t0``, events after ``t0``, or follow-up reaching ``t0``) is known.
    """
    unknown_mask = (cohort.delta == 0) & (cohort.z < cohort.t0)
    unknown = np.flatnonzero(unknown_mask)
    known = np.flatnonzero(~unknown_mask)
    return StatusPartition(
        known=known,
        unknown=unknown,
        n_ks=int(known.shape[0]),
        n_uks=int(unknown.shape[0]),
    )


def kaplan_meier(cohort: Cohort, t: Optional[float] = None) -> KMEstimate:
    """Kaplan-Meier estimate of the event probability by time ``t``.

    ``survival`` is the product of ``1 - d_u / n_u`` over the distinct
    event times ``u <= t``, where ``n_u`` counts subjects whose
    follow-up reaches ``u``; the incidence is its complement.  Events at
    a tied time are processed before censorings, the standard convention
    for product-limit estimation.

    Raises :class:`HorizonError` if ``t`` lies outside
    ``(0, max follow-up]``, where the estimator is undefined.
    """
    if t is None:
        t = cohort.t0
    max_z = float(cohort.z.max())
    if not (0.0 < t <= max_z):
        raise HorizonError(f"horizon t={t} outside (0, max follow-up {max_z}]")
    times, at_risk, events, survival, gw_var, degenerate = _kernels.km_curve(
        cohort.z, cohort.delta, float(t)
    )
    return KMEstimate(
        horizon=float(t),
        incidence=1.0 - survival,
        survival=survival,
        greenwood_var=gw_var,
        degenerate=degenerate,
        path=KMPath(times=times, at_risk=at_risk, events=events),
    )


def greenwood_variance(km_path: KMPath, t: float) -> float:
    """Greenwood variance of the product-limit estimate at time ``t``.

    Evaluates ``S(t)^2 * sum d_u / (n_u (n_u - d_u))`` over the event
    times ``u <= t`` recorded in the path.  When some event time has
    ``d_u == n_u`` the sum's denominator vanishes; the result is then
    NaN rather than a division by zero.
    """
    upto = km_path.times <= t
    d = km_path.events[upto].astype(np.float64)
    n = km_path.at_risk[upto].astype(np.float64)
    if d.shape[0] == 0:
        return 0.0
    if np.any(d == n):
        return float("nan")
    survival = float(np.cumprod(1.0 - d / n)[-1])
    return survival * survival * float(np.cumsum(d / (n * (n - d)))[-1])


def empirical_cdf_known(
    partition: StatusPartition, cohort: Cohort, t0: Optional[float] = None
) -> float:
    """Event proportion by ``t0`` within the known-status group.

    This is the naive estimate of the event probability a validation
    restricted to known-status subjects would use; it over-represents
    cases relative to the full cohort whenever censoring is present.
    """
    if t0 is None:
        t0 = cohort.t0
    if partition.n_ks == 0:
        raise ValidationError("empirical CDF undefined: no known-status subjects")
    z = cohort.z[partition.known]
    delta = cohort.delta[partition.known]
    cases = int(np.count_nonzero((delta == 1) & (z <= t0)))
    return cases / partition.n_ks
