"""
Exceptions - Error types raised when an input is rejected
"""


class GravityError(ValueError):
    """Base class for every rejected input in desitter_gravity"""


class AlgebraError(GravityError):
    """Mode mismatch, non-antisymmetric components, element outside the algebra"""


class MatterError(GravityError):
    """Superluminal boosts and malformed spin data"""


class LatticeError(GravityError):
    """Missing links, malformed loops, invalid lattice geometry"""


class FieldError(GravityError):
    """Grid/stencil problems, shape mismatches, violated preconditions"""


class GeodesicError(GravityError):
    """Singular metrics, unbound orbits, captured rays"""


class PostNewtonianError(GravityError):
    """Evaluation at a body position, malformed bodies"""


class RadiationError(GravityError):
    """Undersampled trajectories, invalid binaries"""


class CosmologyError(GravityError):
    """Non-positive times, regimes where sqrt(b) is undefined"""


class ConfigError(GravityError):
    """Scenario configuration that fails validation"""

    def __init__(self, message: str, errors: list | None = None):
        super().__init__(message)
        self.errors = errors or []


class ReportError(GravityError):
    """Report files that cannot be written"""

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path
