"""
Exception hierarchy for tilelat.

Every error carries the process exit code the CLI reports for it:
1 for a verified violation, 2 for configuration problems, 3 for I/O.
"""
from typing import Any, Optional


class TilelatError(Exception):
    """Base class for all tilelat errors"""

    exit_code: int = 1

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": self.message}


# Configuration (exit 2)

class ConfigError(TilelatError):
    """Invalid run configuration or unsupported input combination"""

    exit_code = 2


class UnsupportedNorm(ConfigError):
    """Operation is only defined for a specific exponent"""


class RieszOracleUnavailable(ConfigError):
    """The configured norm provides no exact Riesz witness"""


class BoundUnderivable(ConfigError):
    """No triangular frame and no coefficient box: enumeration cannot be certified"""


class ChainNotNested(ConfigError):
    """A basis chain level does not contain the previous level"""

    def __init__(self, message: str, level: int, generator: Any = None):
        super().__init__(message, level=level)
        self.level = level
        self.generator = generator


# Storage (exit 3)

class StorageError(TilelatError):
    """Reading or writing an artifact file failed"""

    exit_code = 3


# Certification (exit 1)

class CertificationError(TilelatError):
    """A checked claim failed; the witness is attached"""

    exit_code = 1

    def __init__(self, message: str, witness: Any = None, **context: Any):
        super().__init__(message, **context)
        self.witness = witness


class EmptyBall(CertificationError):
    """No group element within the search radius"""


class GenerationGapWitness(CertificationError):
    """An original generator is outside the span of the bounded elements"""

    def __init__(self, message: str, generator: Any):
        super().__init__(message, witness=generator)
        self.generator = generator


class DensityNotCertified(CertificationError):
    """Voronoi cell requested without a density certificate"""

    def __init__(self, message: str, polytope: Optional[Any] = None):
        super().__init__(message)
        self.polytope = polytope


class InclusionViolation(CertificationError):
    """A half-space or ray exit breaks R/2 B <= V_0 <= r B"""

    def __init__(self, message: str, halfspace: Any = None, direction: Any = None):
        super().__init__(message, witness=halfspace if halfspace is not None else direction)
        self.halfspace = halfspace
        self.direction = direction


class ContactViolation(CertificationError):
    """A norm-2 element of an l1 build is not of the form +-2e_a"""


class NoWitnessAtStage(CertificationError):
    """No pair of distinct intersecting tiles was found at this stage"""


class TorsionQuotient(CertificationError):
    """A chain quotient has torsion, so the basis cannot be extended"""

    def __init__(self, message: str, level: int, factor: int):
        super().__init__(message, witness=factor, level=level)
        self.level = level
        self.factor = factor
