"""Risk models producing a subject's expected event risk over t years.

Two implementations are provided: a uniform toy model (risk grows
linearly up to the support bound, used by the simulation engine) and
the first Rosner-Colditz breast-cancer model, a log-linear incidence
model over reproductive history, projected to t-year risks by
accumulating yearly incidence rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import MissingCovariateError, ValidationError

__all__ = [
    "RiskModel",
    "UniformModel",
    "RosnerColditzModel",
    "RCMCovariates",
    "RCMCoefficients",
    "birth_index",
    "rcm_log_incidence",
    "t_year_risk",
    "uniform_risk",
]


class RiskModel:
    """Interface: ``evaluate(covariates, t)`` -> risk in [0, 1].

    Implementations must be nondecreasing in ``t`` with
    ``evaluate(cov, 0) == 0``.
    """

    def evaluate(self, covariates, t: float) -> float:
        raise NotImplementedError

    def evaluate_many(self, covariates: Optional[Sequence], times) -> np.ndarray:
        """Evaluate per subject; ``times`` may be scalar or one per subject.

        A failure is re-raised with the offending subject index attached.
        """
        times = np.asarray(times, dtype=np.float64)
        if covariates is None:
            if times.ndim == 0:
                raise ValidationError("scalar time requires explicit covariates")
            covariates = [None] * times.shape[0]
        if times.ndim == 0:
            times = np.full(len(covariates), float(times))
        out = np.empty(len(covariates), dtype=np.float64)
        for i, (cov, t) in enumerate(zip(covariates, times)):
            try:
                out[i] = self.evaluate(cov, float(t))
            except Exception as exc:
                raise ValidationError(f"risk evaluation failed for subject {i}: {exc}") from exc
        return out


def uniform_risk(lam: float, t: float) -> float:
    """Linear-in-time risk ``min(t / lam, 1)``."""
    if lam <= 0:
        raise ValidationError("support bound must be positive")
    if t < 0:
        raise ValidationError("horizon must be nonnegative")
    return min(t / lam, 1.0)


@dataclass(frozen=True)
class UniformModel(RiskModel):
    """Event time uniform on (0, lam): the t-year risk is t / lam."""

    lam: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValidationError("support bound must be positive")

    def evaluate(self, covariates, t: float) -> float:
        return uniform_risk(self.lam, t)

    def evaluate_many(self, covariates, times) -> np.ndarray:
        times = np.asarray(times, dtype=np.float64)
        if np.any(times < 0):
            raise ValidationError("horizon must be nonnegative")
        return np.minimum(times / self.lam, 1.0)


# Published coefficients (and standard errors) of the first
# Rosner-Colditz log-incidence model.
_RCM_DEFAULTS = {
    "alpha": -9.687,
    "beta0": 0.048,
    "beta1": 0.081,
    "beta2": 0.050,
    "beta3": 0.013,
    "beta4": -0.0036,
    "beta5": -0.00020,
}
_RCM_DEFAULT_SE = (0.265, 0.016, 0.004, 0.005, 0.004, 0.0009, 0.00012)


@dataclass(frozen=True)
class RCMCoefficients:
    """Regression coefficients of the log-incidence model.

    Defaults are the published estimates; ``se`` is informational and
    not used in any computation.
    """

    alpha: float = _RCM_DEFAULTS["alpha"]
    beta0: float = _RCM_DEFAULTS["beta0"]
    beta1: float = _RCM_DEFAULTS["beta1"]
    beta2: float = _RCM_DEFAULTS["beta2"]
    beta3: float = _RCM_DEFAULTS["beta3"]
    beta4: float = _RCM_DEFAULTS["beta4"]
    beta5: float = _RCM_DEFAULTS["beta5"]
    se: Tuple[float, ...] = _RCM_DEFAULT_SE

    @classmethod
    def from_file(cls, path) -> "RCMCoefficients":
        """Load overrides from flat key-value text (``alpha``, ``beta0``..``beta5``).

        Lines are ``name value`` or ``name = value``; blank lines and
        ``#`` comments are ignored.  Missing keys keep their defaults.
        """
        values = dict(_RCM_DEFAULTS)
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.replace("=", " ").split()
                if len(parts) != 2:
                    raise ValidationError(f"{path}: line {lineno}: expected 'name value'")
                key, text = parts
                if key not in values:
                    raise ValidationError(f"{path}: line {lineno}: unknown coefficient {key!r}")
                try:
                    values[key] = float(text)
                except ValueError as exc:
                    raise ValidationError(f"{path}: line {lineno}: bad number {text!r}") from exc
        return cls(**values)


@dataclass(frozen=True)
class RCMCovariates:
    """Reproductive-history inputs at a baseline age.

    ``age_menopause`` must be given for menopausal women; it may also be
    given for premenopausal women (a known future menopause age), in
    which case projections past it switch to the menopausal terms.
    ``birth_ages`` is the full birth history, nondecreasing, one entry
    per birth.
    """

    age: float
    age_menarche: float
    menopausal: int = 0
    age_menopause: Optional[float] = None
    parity: int = 0
    birth_ages: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "birth_ages", tuple(float(a) for a in self.birth_ages))
        if self.menopausal not in (0, 1):
            raise ValidationError("menopausal indicator must be 0 or 1")
        if self.age <= 0 or self.age_menarche <= 0:
            raise ValidationError("ages must be positive")
        if self.age < self.age_menarche:
            raise ValidationError("age must be at least age at menarche")
        if self.parity != len(self.birth_ages):
            raise ValidationError("birth_ages must have one entry per birth (parity)")
        if self.parity < 0:
            raise ValidationError("parity must be nonnegative")
        if any(b < self.age_menarche for b in self.birth_ages):
            raise ValidationError("birth ages must not precede menarche")
        if self.parity >= 1:
            if self.birth_ages[0] <= self.age_menarche:
                raise ValidationError("age at first birth must exceed age at menarche")
            if any(b2 < b1 for b1, b2 in zip(self.birth_ages, self.birth_ages[1:])):
                raise ValidationError("birth ages must be nondecreasing")
        if self.menopausal == 1:
            if self.age_menopause is None:
                raise MissingCovariateError("menopausal woman requires age at menopause")
            if self.age < self.age_menopause:
                raise ValidationError("menopausal woman must be at least age at menopause")
        elif self.age_menopause is not None and self.age_menopause <= self.age:
            raise ValidationError("premenopausal woman must be younger than age at menopause")
        if self.age_menopause is not None and self.age_menopause <= self.age_menarche:
            raise ValidationError("age at menopause must exceed age at menarche")

    @property
    def age_first_birth(self) -> Optional[float]:
        return self.birth_ages[0] if self.parity >= 1 else None


def _capped_age(cov: RCMCovariates, age: float) -> float:
    # a* = min(age, age at menopause): age-driven terms freeze at menopause.
    if cov.age_menopause is not None:
        return min(age, cov.age_menopause)
    return age


def birth_index(cov: RCMCovariates, age: Optional[float] = None) -> float:
    """Accumulated years since each birth, counted up to min(age, menopause).

    Births that have not yet occurred by the capped age contribute
    nothing; the index is piecewise linear and nondecreasing in age and
    constant after menopause.
    """
    if age is None:
        age = cov.age
    a_star = _capped_age(cov, age)
    return float(sum(a_star - b for b in cov.birth_ages if b <= a_star))


def _log_incidence_at_age(cov: RCMCovariates, coef: RCMCoefficients, age: float) -> float:
    menopausal = cov.age_menopause is not None and age >= cov.age_menopause
    a_star = _capped_age(cov, age)
    b = birth_index(cov, age)
    value = (
        coef.alpha
        + coef.beta0 * cov.age_menarche
        + coef.beta1 * (a_star - cov.age_menarche)
    )
    if cov.parity >= 1:
        value += coef.beta3 * (cov.age_first_birth - cov.age_menarche)
    value += coef.beta4 * b
    if menopausal:
        since_menopause = age - cov.age_menopause
        value += coef.beta2 * since_menopause
        value += coef.beta5 * b * since_menopause
    return value


def rcm_log_incidence(cov: RCMCovariates, coef: Optional[RCMCoefficients] = None) -> float:
    """Log yearly incidence rate at the covariates' baseline age.

    The linear predictor sums the menarche effect, years of premenopausal
    exposure (age capped at menopause), years since menopause, the
    first-birth interval, and the birth index with its postmenopausal
    interaction.
    """
    if coef is None:
        coef = RCMCoefficients()
    return _log_incidence_at_age(cov, coef, cov.age)


def t_year_risk(cov: RCMCovariates, coef: Optional[RCMCoefficients], t: float) -> float:
    """Cumulative event risk over ``t`` years from the baseline age.

    Each whole year ``j`` contributes the incidence rate evaluated at the
    start-of-year age (baseline + j - 1), with age-driven covariates
    advanced; a fractional final year contributes pro rata.  The risk is
    ``1 - exp(-sum of rates)``.
    """
    if coef is None:
        coef = RCMCoefficients()
    if t < 0:
        raise ValidationError("horizon must be nonnegative")
    whole = int(math.floor(t))
    frac = t - whole
    total = 0.0
    for j in range(whole):
        total += math.exp(_log_incidence_at_age(cov, coef, cov.age + j))
    if frac > 0.0:
        total += frac * math.exp(_log_incidence_at_age(cov, coef, cov.age + whole))
    return -math.expm1(-total)


@dataclass(frozen=True)
class RosnerColditzModel(RiskModel):
    """Rosner-Colditz log-incidence model as a t-year risk evaluator."""

    coefficients: RCMCoefficients = field(default_factory=RCMCoefficients)

    def evaluate(self, covariates, t: float) -> float:
        if covariates is None:
            raise MissingCovariateError("this model requires reproductive covariates")
        return t_year_risk(covariates, self.coefficients, t)
