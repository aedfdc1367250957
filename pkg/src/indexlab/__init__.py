"""indexlab: exact operator-algebra extensions, cyclic chain complexes and
discretized index pairings on desk-scale grids."""

from .scalars import GaussianRational, GradedScalar, numeric_eval, scalar_arith
from .linalg import ExactMatrix, rank_kernel

__version__ = "0.1.0"
