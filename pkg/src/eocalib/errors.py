"""Exception types shared across the package."""


class EOCalibError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EOCalibError):
    """Invalid input data, covariates, or run configuration."""


class HorizonError(ValidationError):
    """Evaluation horizon outside (0, max observed follow-up time]."""


class NoEventsError(EOCalibError):
    """No observed events by the horizon; E/O ratios are undefined."""


class DegenerateVarianceError(EOCalibError):
    """Greenwood variance undefined: the survival estimate reached zero."""


class MissingCovariateError(ValidationError):
    """A covariate required by the risk model is absent."""


class CohortFileError(ValidationError):
    """Cohort or grid file rejected; carries every offending row.

    ``violations`` is a list of ``(row_number, message)`` pairs, 1-based
    over data rows (the header is not counted).
    """

    def __init__(self, path, violations):
        self.path = path
        self.violations = list(violations)
        lines = "; ".join(f"row {row}: {msg}" for row, msg in self.violations)
        super().__init__(f"{path}: {lines}")
