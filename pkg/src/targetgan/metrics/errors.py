from ..chem.errors import EmptyBatch, EmptyGraph


class MetricError(ValueError):
    pass


class WidthMismatch(MetricError):
    pass


class BatchTooSmall(MetricError):
    pass


class EmptySample(MetricError):
    pass


__all__ = ["MetricError", "WidthMismatch", "BatchTooSmall", "EmptySample", "EmptyBatch", "EmptyGraph"]
