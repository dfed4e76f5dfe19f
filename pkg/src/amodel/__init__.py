"""Finite-dimensional A-model: boundary triples, Weyl functions and extensions
for singular perturbations of a lower-semibounded operator."""
from .core import AModel, GramError, IllConditionedError, ModelState, Pair, ProjectionError, make_model
from .operator_model import PoleError, SingularFamily, SpectralOperator
from .subspace import ReducingProjection
from .weyl import RelationParam, M_eval, krein_naimark, solve_extension, spectrum_scan

__version__ = "0.1.0"
