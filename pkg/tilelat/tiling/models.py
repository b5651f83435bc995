from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator

from tilelat.enumerate.models import Certificate
from tilelat.exactvec import PowThreshold, Rational, SparseVector, Vector, format_rational

class HalfSpace(BaseModel):
    """{x : <x, normal> <= offset}; for a Voronoi bisector normal = h - d"""
    normal: Vector
    offset: Rational

    @field_validator("normal")
    @classmethod
    def _nonzero(cls, value: SparseVector) -> SparseVector:
        if not value:
            raise ValueError("half-space normal must be nonzero")
        return value

    class Config:
        frozen = True

    def slack(self, x: SparseVector):
        """offset - <x, normal>; negative means x violates the constraint"""
        return self.offset - x.dot(self.normal)


class HPolytope(BaseModel):
    """Voronoi cell of a site as an intersection of half-spaces (redundant ones kept)"""
    center: Vector
    halfspaces: List[HalfSpace] = Field(default_factory=list)
    cutoff: PowThreshold  # squared neighbour radius used to collect bisectors
    certified: bool = True

    def translated(self, v: SparseVector) -> "HPolytope":
        """The cell shifted by v: each offset grows by <v, normal>"""
        return HPolytope(
            center=self.center + v,
            halfspaces=[HalfSpace(normal=h.normal, offset=h.offset + v.dot(h.normal)) for h in self.halfspaces],
            cutoff=self.cutoff,
            certified=self.certified,
        )

    def constraint_set(self) -> frozenset:
        return frozenset((h.normal, h.offset) for h in self.halfspaces)

    def to_json(self) -> Dict[str, Any]:
        return {
            "center": self.center.to_json(),
            "cutoff": format_rational(self.cutoff.c),
            "certified": self.certified,
            "halfspaces": [
                {"normal": h.normal.to_json(), "offset": format_rational(h.offset)} for h in self.halfspaces
            ],
        }


class CellMembership(str, Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


class BallCount(BaseModel):
    radius: Rational  # p-th power
    count: int


class TileCount(BaseModel):
    point: Vector
    count: int


class StageGrowth(BaseModel):
    """Counts for one build stage, used to exhibit growth of the star degree"""
    steps: int
    generators: int
    star_degree: int
    ball_count: int
    radius: Rational  # p-th power of the counting radius


class TilingReport(BaseModel):
    """Tiling-level measurements for one group"""
    p: int
    tile_radius: Rational
    star_degree: int
    ball_counts: List[BallCount] = Field(default_factory=list)
    disjointness_witness: Optional[Tuple[Vector, Vector]] = None  # (d, 2h)
    vertex_contact: Optional[Certificate] = None
    point_finiteness_samples: List[TileCount] = Field(default_factory=list)
    local_tile_counts: List[TileCount] = Field(default_factory=list)
    stage_growth: List[StageGrowth] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
