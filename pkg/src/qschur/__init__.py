"""Simultaneous Schur decompositions of quiver representations.

A collection of matrices attached to the edges of a directed multigraph can
be brought to (quasi-)upper-triangular or trapezoidal form by one
orthogonal/unitary change of basis per vertex exactly when every connected
component of the graph contains at most one cycle.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .engine import EngineOptions, Rejection, SchurDecomposition, majority_direction, triangularize
from .errors import (
    ContractError,
    DimensionError,
    IterationLimitError,
    QSchurError,
    UnsupportedCycleError,
)
from .quiver import (
    CycleInfo,
    Edge,
    Kind,
    PseudoforestReport,
    Quiver,
    Representation,
    TraversalPlan,
    TreeStep,
    Vertex,
    classify,
    find_cycle,
    plan_traversal,
    validate_dimensions,
)
from .shapes import Shape, ShapeClass
from .verify import Tolerances, VerificationReport, verify_all

__all__ = [
    "ContractError", "CycleInfo", "DimensionError", "Edge", "EngineOptions",
    "IterationLimitError", "Kind", "PseudoforestReport", "QSchurError", "Quiver",
    "Rejection", "Representation", "SchurDecomposition", "Shape", "ShapeClass",
    "Tolerances", "TraversalPlan", "TreeStep", "UnsupportedCycleError",
    "VerificationReport", "Vertex", "classify", "find_cycle", "majority_direction",
    "plan_traversal", "triangularize", "validate_dimensions", "verify_all",
]
