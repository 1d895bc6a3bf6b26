from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field

from app.schemas.generator import GeneratorSpec

RECORD_COLUMNS = [
    "experiment_id", "trial", "seed", "n", "d", "lambda", "c", "p",
    "s0_size", "out_size", "peel_iterations", "survivor_count", "giant_size",
    "second_comp_size", "max_out_comp", "out_comp_bound", "all_out_balanced",
    "min_sampled_core_expansion", "core_bound_pd13", "theorem_bound",
    "certificate_pass", "status",
]


class CheckName(str, Enum):
    OUT_SIZE = "out-size"
    OUT_COMPONENTS = "out-components"
    BALANCE = "balance"
    CORE_EXPANSION = "core-expansion"
    CERTIFICATE = "certificate"
    S0_CONCENTRATION = "s0-concentration"


class ExperimentConfig(BaseModel):
    name: str
    generator: GeneratorSpec
    p_values: List[str] = Field(min_length=1)
    trials: int = Field(ge=1)
    base_seed: int = Field(ge=0, lt=2**64)
    checks: List[CheckName] = Field(default_factory=lambda: list(CheckName))
    output: Optional[str] = None
    core_samples: int = Field(default=10_000, ge=1)
    spectral_tol: float = Field(default=1e-6, gt=0)
    spectral_max_iter: int = Field(default=3000, ge=1)


class ExperimentRecord(BaseModel):
    experiment_id: str
    trial: int
    seed: int
    n: int
    d: int
    lambda_: float = Field(alias="lambda")
    c: float
    p: str
    s0_size: Optional[int] = None
    out_size: Optional[int] = None
    peel_iterations: Optional[int] = None
    survivor_count: Optional[int] = None
    giant_size: Optional[int] = None
    second_comp_size: Optional[int] = None
    max_out_comp: Optional[int] = None
    out_comp_bound: Optional[float] = None
    all_out_balanced: Optional[int] = None
    min_sampled_core_expansion: Optional[float] = None
    core_bound_pd13: Optional[float] = None
    theorem_bound: Optional[float] = None
    certificate_pass: Optional[int] = None
    status: str = "ok"

    class Config:
        populate_by_name = True

    def as_row(self) -> dict:
        return self.model_dump(by_alias=True)


class CheckSummary(BaseModel):
    check: CheckName
    passed: int
    total: int
    threshold: str

    @property
    def rate(self) -> float:
        return self.passed / self.total if self.total else 0.0


class PValueSummary(BaseModel):
    p: str
    trials: int
    mean_s0: float
    std_s0: float
    expected_s0_bound: float
    mean_iterations_per_s0: Optional[float] = None
    mean_giant_fraction: float
    flagged_low_pd: bool


class ExperimentSummary(BaseModel):
    experiment_id: str
    n: int
    d: int
    lambda_: float = Field(alias="lambda")
    c: float
    checks: List[CheckSummary]
    p_values: List[PValueSummary]
    all_passed: bool

    class Config:
        populate_by_name = True


class ExperimentResult(BaseModel):
    records: List[ExperimentRecord]
    summary: ExperimentSummary


class ExperimentRunRequest(BaseModel):
    config: Optional[str] = None
    preset: Optional[str] = None
    trials: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
