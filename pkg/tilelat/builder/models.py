from pydantic import BaseModel, Field, field_validator
from fractions import Fraction
from typing import List, Literal, Optional, Sequence, Tuple

from tilelat.exactvec import Rational, SparseVector, Vector

class EnumerationScheme(BaseModel):
    """Deterministic candidate sequence u_0 = 0, u_1, u_2, ..."""
    kind: Literal["grid", "stream"] = "grid"
    seed: int = 0
    # stream kind only: coordinates, largest |entry|, largest exponent of 2 in denominators
    dimension: int = Field(default=2, ge=1)
    magnitude: int = Field(default=2, ge=1)
    denominator_levels: int = Field(default=2, ge=0)

    class Config:
        frozen = True


class GeneratorRecord(BaseModel):
    """One appended generator g = u + x with x supported on a fresh coordinate"""
    step: int = Field(ge=0)  # position in the candidate sequence
    fresh_index: Optional[int] = Field(default=None, alias="fresh")
    u: Optional[Vector] = None  # target; None for groups given by generators
    g: Vector
    epsilon: Optional[Rational] = None  # riesz mode: the eps used at this step

    class Config:
        frozen = True
        populate_by_name = True


class Subgroup(BaseModel):
    """Subgroup D of l_p generated by an ordered list of generator records"""
    p: int = Field(ge=1)
    mode: Literal["exact_lp", "riesz_general", "generated"] = "exact_lp"
    records: Tuple[GeneratorRecord, ...] = ()
    epsilon: Optional[Rational] = None
    epsilon_schedule: Optional[Literal["fixed", "dyadic"]] = None
    scheme: Optional[EnumerationScheme] = None
    steps_consumed: int = Field(default=0, ge=0, alias="steps")
    # union of supports of every processed target and generator
    seen: Tuple[int, ...] = Field(default=(), alias="coordinates")

    @field_validator("records")
    @classmethod
    def _distinct_fresh(cls, records):
        fresh = [r.fresh_index for r in records if r.fresh_index is not None]
        if len(fresh) != len(set(fresh)):
            raise ValueError("fresh indices must be distinct")
        return records

    class Config:
        frozen = True
        populate_by_name = True

    @classmethod
    def trivial(cls, p: int, mode: str = "exact_lp", **kwargs) -> "Subgroup":
        """The group {0}"""
        return cls(p=p, mode=mode, **kwargs)

    @classmethod
    def from_generators(cls, generators: Sequence[SparseVector], p: int) -> "Subgroup":
        """Group generated by arbitrary rational vectors (fixtures, bases, CLI input)"""
        records = tuple(GeneratorRecord(step=i, g=g) for i, g in enumerate(generators) if g)
        seen = sorted(set().union(*(g.support for g in generators))) if generators else []
        return cls(p=p, mode="generated", records=records, seen=tuple(seen))

    @property
    def generators(self) -> List[SparseVector]:
        return [record.g for record in self.records]

    @property
    def rank(self) -> int:
        return len(self.records)

    @property
    def is_trivial(self) -> bool:
        return not self.records

    def fresh_coordinate(self, target: Optional[SparseVector] = None) -> int:
        """Smallest index outside every support seen so far (and the target's)"""
        taken = set(self.seen)
        if target is not None:
            taken |= target.support
        index = 0
        while index in taken:
            index += 1
        return index

    def coordinates(self) -> List[int]:
        return sorted(set().union(*(g.support for g in self.generators))) if self.records else []

    def element(self, coefficients: Sequence[int]) -> SparseVector:
        """sum n_i g_i"""
        values = {}
        for n, g in zip(coefficients, self.generators):
            if n:
                for index, value in g.entries:
                    values[index] = values.get(index, 0) + n * value
        return SparseVector({i: v for i, v in values.items() if v != 0})

    def summary(self) -> dict:
        added = len(self.records)
        skipped = max(self.steps_consumed - added, 0)
        return {
            "p": self.p,
            "mode": self.mode,
            "generators": added,
            "coordinates_used": len(self.seen),
            "steps": self.steps_consumed,
            "skipped": skipped,
            "skip_add_ratio": f"{skipped}/{added}" if added else None,
        }


def epsilon_for_step(base: Fraction, schedule: str, step: int) -> Fraction:
    """eps for a step: constant, or 2^-n at step n >= 1 under the dyadic schedule"""
    if schedule == "dyadic":
        return Fraction(1, 2 ** max(step, 1))
    return Fraction(base)


class BoundedGeneratingSet(BaseModel):
    """S = D ∩ (2r + eps)B with integer expressions of every original generator in S"""
    elements: List[Vector]
    expressions: List[List[int]]  # expressions[i] writes generator i over elements
    r: Rational  # p-th power of r
    epsilon: Rational
