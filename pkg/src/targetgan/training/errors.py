from ..chem.errors import EmptyBatch
from ..nets.generator import VariantMismatch


class TrainingError(Exception):
    pass


class ConfigError(TrainingError, ValueError):
    pass


class DataError(TrainingError, ValueError):
    pass


class DataExhausted(DataError):
    """The training split holds fewer molecules than one batch."""


class NonFiniteLoss(TrainingError, FloatingPointError):
    def __init__(self, message: str, checkpoint: str | None = None):
        super().__init__(message)
        self.checkpoint = checkpoint


class CheckpointCorrupt(TrainingError, ValueError):
    pass


__all__ = ["TrainingError", "ConfigError", "DataError", "DataExhausted", "NonFiniteLoss",
           "CheckpointCorrupt", "EmptyBatch", "VariantMismatch"]
