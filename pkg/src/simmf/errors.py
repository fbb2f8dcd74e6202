"""Exception types raised across the package."""


class SimMFError(Exception):
    """Base class for all package errors."""


class DatasetError(SimMFError):
    """A dataset directory or relation file is missing or unusable."""


class ValidationError(SimMFError):
    """Input data violates a declared constraint."""


class SchemaError(SimMFError):
    """Schema declaration is inconsistent, or a meta path does not fit it."""


class SimilarityError(SimMFError):
    pass


class DivergenceError(SimMFError):
    """Training produced a non-finite objective.

    The last finite iterate is kept on ``model`` and the trace up to that
    point on ``trace``.
    """

    def __init__(self, message, model=None, trace=None):
        super().__init__(message)
        self.model = model
        self.trace = trace


class NotApplicableError(SimMFError):
    """A method cannot run on the given dataset (e.g. SoMF without a social relation)."""


class ExperimentError(SimMFError):
    """Wraps a failure inside one (method, ratio, trial) cell of an experiment."""

    def __init__(self, message, method=None, ratio=None, trial=None):
        super().__init__(message)
        self.method = method
        self.ratio = ratio
        self.trial = trial
