import math
from fractions import Fraction
from typing import List, Optional

from pydantic import BaseModel, Field, computed_field, field_validator

from app.core.probability import parse_probability


class PercolationParams(BaseModel):
    p: str
    seed: int = Field(default=0, ge=0, lt=2**64)
    d: int = Field(ge=0)
    c: Optional[float] = Field(default=None, ge=0)

    @field_validator("p")
    @classmethod
    def check_p(cls, v: str) -> str:
        parse_probability(v)
        return v.strip()

    @property
    def fraction(self) -> Fraction:
        return parse_probability(self.p)

    @computed_field
    @property
    def advisory(self) -> bool:
        """True when (p, c) lie outside the hypothesis p >= 5c/sqrt(d), c < sqrt(d)/5"""
        if self.c is None or self.d == 0:
            return False
        root_d = math.sqrt(self.d)
        return float(self.fraction) < 5 * self.c / root_d or self.c >= root_d / 5


class RemovalEntry(BaseModel):
    vertex: int
    iteration: int = Field(ge=1)
    degree: int
    edges_into_removed: int


class PruneTrace(BaseModel):
    n: int
    s0: List[int]
    removals: List[RemovalEntry] = Field(default_factory=list)
    survivors: List[int]
    out: List[int]
    params: PercolationParams

    @property
    def iterations(self) -> int:
        return len(self.removals)

    def removed_vertices(self) -> List[int]:
        return [entry.vertex for entry in self.removals]


class TraceViolation(BaseModel):
    code: str
    vertex: Optional[int] = None
    message: str
