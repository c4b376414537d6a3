"""Exact LP rounding pipelines for directed latency and asymmetric TSP paths."""
from .errors import CapacityError, DirlatError, InvariantError, PreconditionError, StructuralError
from .metric import Metric, ScaledInstance, generate_random, metric_closure, regret_transform, validate_metric

__all__ = [
    "CapacityError", "DirlatError", "InvariantError", "PreconditionError", "StructuralError",
    "Metric", "ScaledInstance", "generate_random", "metric_closure", "regret_transform", "validate_metric",
]
