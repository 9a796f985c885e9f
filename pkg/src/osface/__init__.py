"""Elliptic free-fermion face model with OS boundary: numerical verification.

Theta functions, Pfaffians, dynamical R/K matrices, a brute-force state-sum
oracle, closed Pfaffian formulas for the partition function and a seeded
verification suite.
"""

from .errors import (
    CapacityError,
    ConfigError,
    DegenerateSampleError,
    DomainError,
    OSFaceError,
    PoleError,
)
from .face_model import RMatrix, build_r_matrix, k_matrix
from .formulas import eval_E, eval_F
from .pfaffian import (
    SkewMatrix,
    pf_by_definition,
    pf_by_elimination,
    pf_by_expansion,
    pfaffian,
    remove_rows_cols,
)
from .report import VerificationReport
from .state_sum import ParameterPoint, partition_function_oracle
from .theta import EllipticContext, eval_theta

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "ConfigError", "DegenerateSampleError", "DomainError",
    "OSFaceError", "PoleError", "RMatrix", "build_r_matrix", "k_matrix",
    "eval_E", "eval_F", "SkewMatrix", "pf_by_definition", "pf_by_elimination",
    "pf_by_expansion", "pfaffian", "remove_rows_cols", "VerificationReport",
    "ParameterPoint", "partition_function_oracle", "EllipticContext",
    "eval_theta",
]
