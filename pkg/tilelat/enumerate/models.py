from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Tuple

from pydantic import BaseModel, Field

from tilelat.exactvec import PowThreshold, SparseVector, Vector, format_rational

class BallQuery(BaseModel):
    """Closed (or open, when strict) ball of radius c ** (1/p) around center"""
    center: Vector = Field(default_factory=SparseVector)
    radius: PowThreshold
    strict: bool = False

    class Config:
        frozen = True


class BallPoint(NamedTuple):
    coefficients: Tuple[int, ...]  # in the subgroup's generator order
    element: SparseVector
    distance_pow: Fraction  # ||element - center||_p^p


class BallEnumeration(BaseModel):
    """Result of enumerate_group_ball, in canonical order (distance, entries)"""
    points: List[Any] = Field(default_factory=list)  # BallPoint
    certified: bool = True  # False when a coefficient box replaced a derived bound
    route: str = "fresh"  # fresh, gram or box
    nodes: int = 0

    def __iter__(self) -> Iterator[BallPoint]:
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def elements(self) -> List[SparseVector]:
        return [point.element for point in self.points]

    def bound(self, query: BallQuery) -> Dict[str, Any]:
        return {
            "route": self.route,
            "radius": format_rational(query.radius.c),
            "strict": query.strict,
            "certified": self.certified,
            "nodes": self.nodes,
        }


class CertificateKind(str, Enum):
    SEPARATION_OK = "SeparationOK"
    SEPARATION_VIOLATED = "SeparationViolated"
    DENSITY_OK = "DensityOK"
    DENSITY_GAP = "DensityGap"
    COUNT_EXACT = "CountExact"
    INCLUSION_OK = "InclusionOK"
    CONTACT_OK = "ContactOK"
    POINT_FINITE_OK = "PointFiniteOK"
    POINT_FINITE_VIOLATED = "PointFiniteViolated"


_FAILURE_KINDS = {
    CertificateKind.SEPARATION_VIOLATED,
    CertificateKind.DENSITY_GAP,
    CertificateKind.POINT_FINITE_VIOLATED,
}


class Certificate(BaseModel):
    """Verdict of an exhaustive check, with the witness on failure"""
    kind: CertificateKind
    witness: Optional[Vector] = None
    coefficients: Optional[List[int]] = None
    count: Optional[int] = None
    bound: Dict[str, Any] = Field(default_factory=dict)  # search-bound description

    @property
    def ok(self) -> bool:
        return self.kind not in _FAILURE_KINDS

    def to_json(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude_none=True)


class NearestElement(NamedTuple):
    element: SparseVector
    distance_pow: Fraction

