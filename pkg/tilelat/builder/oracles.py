from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Dict, Iterable, Tuple

import structlog

from tilelat.errors import ConfigError, RieszOracleUnavailable
from tilelat.exactvec import PowThreshold, SparseVector, norm_pow

logger = structlog.get_logger("oracles")


class NormOracle(ABC):
    """Contract a norm must satisfy to drive the Riesz-mode builder.

    Subclasses evaluate the norm exactly (as a p-th power) and may supply a
    Riesz witness: a vector x with ||x|| <= 1 + eps and distance at least 1
    from the span of everything seen so far.
    """

    name: str = "abstract"

    def __init__(self, p: int):
        self.p = p

    @abstractmethod
    def norm_pow(self, v: SparseVector) -> Fraction:
        """Exact p-th power of the norm of v"""

    def skip_threshold(self, eps: Fraction) -> PowThreshold:
        """Threshold for the skip test ||u - d|| <= 1 + eps"""
        return PowThreshold(c=(1 + Fraction(eps)) ** self.p)

    def riesz_witness(self, seen: Iterable[int], fresh: int, eps: Fraction) -> SparseVector:
        """Vector x with ||x|| <= 1 + eps and dist(x, span) >= 1

        Raises:
            RieszOracleUnavailable: the norm has no exact witness construction
        """
        raise RieszOracleUnavailable(f"norm '{self.name}' provides no exact Riesz witness")


class LpNormOracle(NormOracle):
    """l_p norm; the witness is the fresh basis vector e_fresh.

    ||e_fresh|| = 1 and ||e_fresh - z||^p = 1 + ||z||^p for any z supported
    on already-seen coordinates.
    """

    name = "lp"

    def norm_pow(self, v: SparseVector) -> Fraction:
        return norm_pow(v, self.p)

    def riesz_witness(self, seen: Iterable[int], fresh: int, eps: Fraction) -> SparseVector:
        if fresh in set(seen):
            raise RieszOracleUnavailable(f"coordinate {fresh} is not fresh")
        return SparseVector.basis(fresh)


_ORACLES: Dict[str, type] = {"lp": LpNormOracle}
_oracle_cache: Dict[Tuple[str, int], NormOracle] = {}


def register_norm_oracle(name: str, oracle_class: type):
    """Make a NormOracle subclass available by name"""
    _ORACLES[name] = oracle_class
    _oracle_cache.clear()


def get_norm_oracle(name: str, p: int) -> NormOracle:
    """Get or create the oracle instance for a norm name and exponent"""
    key = (name, p)
    if key not in _oracle_cache:
        if name not in _ORACLES:
            raise ConfigError(f"unknown norm oracle '{name}'", available=sorted(_ORACLES))
        _oracle_cache[key] = _ORACLES[name](p)
        logger.debug("norm_oracle_created", name=name, p=p)
    return _oracle_cache[key]
