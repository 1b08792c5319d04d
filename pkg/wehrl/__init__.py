"""
Wehrl stability toolkit core modules
"""

from .constants import VERSION
from .errors import (ConfigError, ConvergenceError, DomainError, EvaluationError, FormatError, ShapeError,
                     WehrlError)
from .polyspace import AffinePoly, HomPoly, SpherePoint, bombieri_inner, evaluate, reproducing_kernel, rotate
from .functionals import (ConvexFn, concentration, distance_to_kernels, extremal_concentration,
                          extremal_entropy, fraenkel_asymmetry, wehrl_entropy)
from .states import DensityState, husimi, state_entropy, trace_distance_to_coherent
from .config import ConfigManager, SweepConfig

__all__ = [
    'VERSION',
    'WehrlError',
    'ShapeError',
    'DomainError',
    'ConfigError',
    'FormatError',
    'EvaluationError',
    'ConvergenceError',
    'HomPoly',
    'AffinePoly',
    'SpherePoint',
    'bombieri_inner',
    'evaluate',
    'reproducing_kernel',
    'rotate',
    'ConvexFn',
    'concentration',
    'distance_to_kernels',
    'extremal_concentration',
    'extremal_entropy',
    'fraenkel_asymmetry',
    'wehrl_entropy',
    'DensityState',
    'husimi',
    'state_entropy',
    'trace_distance_to_coherent',
    'ConfigManager',
    'SweepConfig',
]
