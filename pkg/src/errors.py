"""
Errors - exception hierarchy shared by every package
"""


class MaesError(Exception):
    """Base class for all errors raised by the laboratory"""


class ConfigurationError(MaesError, ValueError):
    """Bad shapes, dimensions or configuration values"""


class UsageError(MaesError, RuntimeError):
    """API called in a state it does not support"""


class GenerationError(MaesError):
    """Synthetic data could not be generated for the given configuration"""


class TrainingError(MaesError):
    """Training aborted; carries the epoch and batch where it happened"""

    def __init__(self, message: str, epoch: int | None = None, batch: int | None = None):
        self.epoch = epoch
        self.batch = batch
        if epoch is not None:
            message = f"{message} (epoch {epoch}, batch {batch})"
        super().__init__(message)


class UndefinedMetricError(MaesError):
    """Metric has no defined value for the given inputs (e.g. AP without positives)"""
