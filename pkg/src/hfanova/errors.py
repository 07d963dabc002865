"""Exception types raised by hfanova."""


class HfanovaError(Exception):
    """Base class for all hfanova errors."""


class InvalidGridError(HfanovaError, ValueError):
    """Evaluation grid is malformed (too short, not strictly increasing, ...)."""


class InvalidDesignError(HfanovaError, ValueError):
    """Group layout cannot support the requested construction (e.g. k < 2)."""


class InvalidHypothesisError(HfanovaError, ValueError):
    """Hypothesis matrices/targets do not match the data dimensions."""


class InsufficientSampleError(HfanovaError, ValueError):
    """A group has too few curves for the requested estimator."""


class NumericError(HfanovaError, ValueError):
    """Non-finite input or an empty numeric argument."""


class NotPositiveSemidefiniteError(NumericError):
    """Matrix has an eigenvalue too negative to be round-off."""


class IngestionError(HfanovaError, ValueError):
    """Input file cannot be parsed into a dataset."""
