"""Exception types shared across the package.

``EstimationError`` and its subclasses signal numerical failures that a
simulation driver counts and excludes per replication; ``ConfigError`` is a
usage problem and maps to a distinct CLI exit code.
"""


class SemirespError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SemirespError):
    """Invalid configuration file, column mapping, or CLI arguments."""


class EstimationError(SemirespError):
    """Base class for numerical failures during fitting or solving."""


class EmptyCell(EstimationError):
    """A discrete cell needed by a conditional mean has no observations.

    Carries the offending cell code so callers can report which stratum
    broke the fit.
    """

    def __init__(self, code, detail=""):
        self.code = code
        msg = f"empty cell at code {code!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DegenerateWindow(EstimationError):
    """Kernel smoother denominator fell below the numeric floor."""

    def __init__(self, x0):
        self.x0 = x0
        super().__init__(f"kernel window degenerate at x0={x0!r}")


class BandwidthSelectionFailed(EstimationError):
    """Every candidate bandwidth on the cross-validation grid was unusable."""


class SingularDesign(EstimationError):
    """Outcome-model design matrix is rank deficient."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"singular design; collinear terms: {self.columns}")


class NoSignChange(EstimationError):
    """Residual has the same sign across the whole solver bracket."""

    def __init__(self, bracket, values):
        self.bracket = bracket
        self.values = values
        super().__init__(
            f"no sign change on bracket {bracket}: residual ends {values}"
        )


class NearSingularJacobian(EstimationError):
    """Sandwich slope estimate too close to zero for a usable variance."""


class MaxIterations(EstimationError):
    """Iterative solver exhausted its iteration budget."""
