from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.generator import EdgeListPayload


class SpectralMethod(str, Enum):
    DENSE = "dense-eigensolve"
    POWER = "power-iteration"


class SpectralSummary(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    d: int
    lambda_: float = Field(alias="lambda", ge=0)
    c: float = Field(ge=0)
    method: SpectralMethod
    residual: float
    iterations: int
    converged: bool = True
    mu2: Optional[float] = None
    mu_min: Optional[float] = None


class MixingViolation(BaseModel):
    sample: int
    s_size: int
    t_size: int
    pair_count: int
    slack: float


class MixingAuditReport(BaseModel):
    samples: int
    lambda_used: float
    max_normalized_slack: float
    violations: List[MixingViolation] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


class DensityReport(BaseModel):
    k: int
    max_set_size: int
    bound: float
    trials: int
    worst_ratio: Optional[float] = None
    worst_size: Optional[int] = None
    violations: int = 0
    skipped: bool = False
    exhaustive: bool = False


class SpectrumRequest(BaseModel):
    graph: EdgeListPayload
    tol: Optional[float] = Field(default=None, gt=0)
    max_iter: Optional[int] = Field(default=None, ge=1)
    samples: int = Field(default=1000, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)


class SpectrumResponse(BaseModel):
    summary: SpectralSummary
    audit: MixingAuditReport
