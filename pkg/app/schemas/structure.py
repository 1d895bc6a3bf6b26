from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field

from app.schemas.generator import EdgeListPayload


class SubsetRule(str, Enum):
    STRICT_HALF = "strict-half"
    AT_MOST_HALF = "at-most-half"


class ExpansionMode(str, Enum):
    EXACT = "exact"
    BOUNDED = "bounded"


class ExpansionReport(BaseModel):
    mode: ExpansionMode
    subset_rule: SubsetRule = SubsetRule.AT_MOST_HALF
    value: Optional[float] = None
    value_fraction: Optional[str] = None
    lower_bound: Optional[float] = None
    upper_bound: Optional[float] = None
    lower_bound_source: Optional[str] = None
    bounds_inverted: bool = False
    witness: List[int] = Field(default_factory=list)
    witness_boundary: int = 0
    connected: bool = True


class CoreExpansionReport(BaseModel):
    samples: int
    bound: float
    min_ratio: Optional[float] = None
    min_size: Optional[int] = None
    violations: int = 0
    witness: List[int] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.min_ratio is None or self.violations == 0


class OutComponent(BaseModel):
    size: int
    s0_count: int
    s0_fraction: float = Field(ge=0, le=1)
    balanced: bool
    has_edge_to_giant: bool
    min_vertex: int
    host_avg_degree: Optional[float] = None
    density_k: Optional[int] = None
    density_bound: Optional[float] = None


class OutReport(BaseModel):
    components: List[OutComponent] = Field(default_factory=list)
    max_component_size: int = 0
    balance_threshold: float
    size_bound: float
    size_bound_natural_log: float
    all_balanced: bool = True
    within_size_bound: bool = True


class CertificateCondition(BaseModel):
    name: str
    passed: bool
    measured: Optional[float] = None
    threshold: Optional[float] = None
    detail: str = ""


class BarePathReport(BaseModel):
    longest_bare_path: int = 0
    expansion_upper_bound: Optional[float] = None


class CertificateReport(BaseModel):
    conditions: List[CertificateCondition]
    implied_bound: float
    implied_bound_natural_log: float
    passed: bool
    giant_size: int
    second_component_size: int
    second_component_explained: bool = True
    giant_contains_survivors: Optional[bool] = None
    core_connected: bool
    max_out_component: int
    core_expansion: CoreExpansionReport
    sampled_giant_expansion: Optional[float] = None
    bare_path: BarePathReport = Field(default_factory=BarePathReport)

    def condition(self, name: str) -> CertificateCondition:
        return next(c for c in self.conditions if c.name == name)


class ExpansionRequest(BaseModel):
    graph: EdgeListPayload
    mode: ExpansionMode = ExpansionMode.EXACT
    rule: SubsetRule = SubsetRule.AT_MOST_HALF
    trials: int = Field(default=200, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
