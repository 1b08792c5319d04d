#!/usr/bin/env python3
"""
Exception hierarchy for the Wehrl stability toolkit
"""

from typing import Any, Optional


class WehrlError(Exception):
    """Base class for all toolkit errors"""


class ShapeError(WehrlError, ValueError):
    """Mismatched dimension/degree, wrong vector length or oversized basis"""


class DomainError(WehrlError, ValueError):
    """Argument outside the admissible set of an operation"""


class ConfigError(WehrlError, ValueError):
    """Invalid configuration; `field` names the offending entry"""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class FormatError(ConfigError):
    """Malformed polynomial, state or region file"""


class EvaluationError(WehrlError, ArithmeticError):
    """Non-finite integrand value at a quadrature node"""


class ConvergenceError(WehrlError, RuntimeError):
    """Optimizer failed; `best` carries the best-so-far result"""

    def __init__(self, message: str, best: Any = None):
        super().__init__(message)
        self.best = best
