"""Symbolic pseudo-differential calculus and grid checks on graded nilpotent Lie groups."""

from .lie_core import (ConsistencyError, GradedLieAlgebra, SpecError, abelian, bch_product,
                       engel, heisenberg, load_group)

__version__ = "0.1.0"

__all__ = ["ConsistencyError", "GradedLieAlgebra", "SpecError", "abelian", "bch_product",
           "engel", "heisenberg", "load_group", "__version__"]
