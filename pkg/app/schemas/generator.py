from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field


class GraphFamily(str, Enum):
    COMPLETE = "complete"
    CYCLE = "cycle"
    RANDOM_REGULAR = "random-regular"
    PALEY = "paley"


class GeneratorSpec(BaseModel):
    family: GraphFamily
    n: Optional[int] = Field(default=None, ge=0)
    d: Optional[int] = Field(default=None, ge=0)
    q: Optional[int] = Field(default=None, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)

    class Config:
        use_enum_values = False


class EdgeListPayload(BaseModel):
    n: int = Field(ge=0)
    edges: List[Tuple[int, int]] = Field(default_factory=list)


class GraphSummary(BaseModel):
    n: int
    m: int
    regular_degree: Optional[int] = None
    components: int
    giant_size: int


class GraphResponse(GraphSummary):
    edges: List[Tuple[int, int]]
