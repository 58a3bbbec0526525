"""Exact engine, fast path and verifier for O'Hara's partition bijection."""

from ohara.errors import DomainError, InvariantError, OharaError, StepBudgetExceeded
from ohara.partitions import INF, Box, Partition, enumerate_partitions

__version__ = "0.1.0"

__all__ = [
    "INF",
    "Box",
    "DomainError",
    "InvariantError",
    "OharaError",
    "Partition",
    "StepBudgetExceeded",
    "enumerate_partitions",
    "__version__",
]
