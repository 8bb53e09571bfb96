"""Shape-invariant matrix superpotentials linear in the parameter ``k``.

Submodules
----------
core        families of ``Q`` and ``P``, ``W_k``, ``V_k``, validity windows
invariance  residual checks, shape-invariance constant, resolvent oracle
spectral    finite-difference Hamiltonians, zero modes, ladder
config      scenario schema and the ``example-ps`` builtin
runner      task execution and report emission
service     FastAPI application
cli         command-line client
"""

__version__ = "0.1.0"

from .core import (Model, NuClass, NuVariant, QEntry, QVariant, eval_V, eval_W, eval_W_prime,
                   p_derivative, p_value, q_derivative, q_value, validity_window)
from .invariance import extract_Ck, predicted_Ck
from .errors import (ConfigError, ConvergenceError, DomainError, EmptyLadderError,
                     NotShapeInvariantError, PoleError, SingularMatrixError, StiffnessError,
                     ZeroNormError)

__all__ = [
    "Model", "NuClass", "NuVariant", "QEntry", "QVariant",
    "q_value", "q_derivative", "p_value", "p_derivative",
    "eval_W", "eval_W_prime", "eval_V", "validity_window",
    "extract_Ck", "predicted_Ck",
    "ConfigError", "ConvergenceError", "DomainError", "EmptyLadderError",
    "NotShapeInvariantError", "PoleError", "SingularMatrixError", "StiffnessError",
    "ZeroNormError",
]
