from pydantic import BaseModel, Field, model_validator
from typing import List, Optional

class IntegerMatrix(BaseModel):
    """Row-major matrix of arbitrary-precision integers"""
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    entries: List[List[int]]

    @model_validator(mode="after")
    def _check_shape(self):
        if len(self.entries) != self.rows or any(len(row) != self.cols for row in self.entries):
            raise ValueError(f"entries do not match shape {self.rows}x{self.cols}")
        return self

    @classmethod
    def from_rows(cls, rows: List[List[int]]) -> "IntegerMatrix":
        return cls(rows=len(rows), cols=len(rows[0]) if rows else 0, entries=[list(row) for row in rows])

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)])

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        return IntegerMatrix.from_rows(
            [[sum(a * other.entries[k][j] for k, a in enumerate(row)) for j in range(other.cols)] for row in self.entries]
        )

    def nonzero_rows(self) -> List[List[int]]:
        return [row for row in self.entries if any(row)]


class NormalFormResult(BaseModel):
    """Hermite (U·A = H) or Smith (U·A·V = S) normal form with its certificate"""
    H: IntegerMatrix  # the normal form; S for Smith
    U: IntegerMatrix  # unimodular, left
    V: Optional[IntegerMatrix] = None  # unimodular, right (Smith only)
    rank: int
    invariant_factors: List[int] = Field(default_factory=list)  # Smith only
