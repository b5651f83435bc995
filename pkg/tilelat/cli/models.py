from fractions import Fraction
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from tilelat.exactvec import Rational, Vector

Command = Literal["build", "verify", "voronoi", "report", "basis"]
Check = Literal["separation", "density", "vertex-contact", "point-finiteness"]


class RunConfig(BaseModel):
    """Validated flags of one CLI run; embedded verbatim in every output file"""
    command: Command
    check: Optional[Check] = None
    preset: Optional[str] = None

    # build
    p: int = Field(default=2, ge=1)
    steps: int = Field(default=200, ge=1)
    seed: int = 0
    scheme: Literal["grid", "stream"] = "grid"
    mode: Literal["lp", "riesz"] = "lp"
    eps: Optional[Rational] = None
    eps_schedule: Literal["fixed", "dyadic"] = "fixed"
    generators: Optional[List[Vector]] = None  # inline generators from a preset

    # inputs and outputs
    group: Optional[str] = None
    generators_file: Optional[str] = None
    out: Optional[str] = None

    # thresholds, all p-th powers
    threshold: Optional[Rational] = None
    strict: bool = False
    radius: Rational = Fraction(1)
    r_dense: Rational = Fraction(1)
    r_sep: Rational = Fraction(2)
    tile_radius: Rational = Fraction(1)
    delta: Optional[Rational] = None
    radii: List[Rational] = Field(default_factory=list)

    # sampling
    samples: int = Field(default=500, ge=0)
    directions: int = Field(default=100, ge=0)
    direction_source: Literal["coordinates", "neighbours"] = "coordinates"
    max_tiles: int = Field(default=2, ge=1)
    site: Optional[Vector] = None
    stages: List[int] = Field(default_factory=list)
    canonical: bool = False

    @model_validator(mode="after")
    def _check_command(self):
        if self.command == "build" and self.mode == "riesz" and self.eps is None:
            raise ValueError("riesz mode needs --eps")
        if self.command in ("verify", "voronoi", "report") and not self.group:
            raise ValueError(f"{self.command} needs --group")
        if self.command == "verify" and self.check is None:
            raise ValueError("verify needs a check name")
        if self.command == "verify" and self.check == "separation" and self.threshold is None:
            raise ValueError("separation needs --threshold")
        if self.command == "basis" and not self.generators_file:
            raise ValueError("basis needs --generators")
        if any(stage < 1 for stage in self.stages):
            raise ValueError("stages must be >= 1")
        return self

    def to_json(self) -> dict:
        return self.model_dump(mode="json", exclude_none=True)
