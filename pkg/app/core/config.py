from fractions import Fraction
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import List


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Execução
    threads: int = Field(
        default=1,
        ge=1,
        alias="PERC_LAB_THREADS"
    )
    log_level: str = Field(
        default="INFO",
        alias="PERC_LAB_LOG_LEVEL"
    )

    # Espectro
    spectral_tol: float = Field(
        default=1e-9,
        gt=0,
        alias="PERC_LAB_SPECTRAL_TOL"
    )
    spectral_max_iter: int = Field(
        default=100_000,
        ge=1,
        alias="PERC_LAB_SPECTRAL_MAX_ITER"
    )
    spectral_seed: int = Field(
        default=0xA11CE,
        alias="PERC_LAB_SPECTRAL_SEED"
    )
    dense_eigen_limit: int = Field(
        default=512,
        ge=1,
        alias="PERC_LAB_DENSE_EIGEN_LIMIT"
    )

    # Geradores
    restart_cap: int = Field(
        default=10_000,
        ge=1,
        alias="PERC_LAB_RESTART_CAP"
    )
    exact_pairing_max_restarts: float = Field(
        default=1000.0,
        ge=1,
        alias="PERC_LAB_EXACT_PAIRING_MAX_RESTARTS"
    )

    # Expansão e certificado
    exact_expansion_limit: int = Field(
        default=24,
        ge=2,
        alias="PERC_LAB_EXACT_EXPANSION_LIMIT"
    )
    balance_threshold: str = Field(
        default="1/3",
        alias="PERC_LAB_BALANCE_THRESHOLD"
    )
    size_bound_constant: float = Field(
        default=61.0,
        gt=0,
        alias="PERC_LAB_SIZE_BOUND_CONSTANT"
    )
    log_base: str = Field(
        default="2",
        alias="PERC_LAB_LOG_BASE"
    )
    core_expansion_divisor: int = Field(
        default=13,
        ge=1,
        alias="PERC_LAB_CORE_DIVISOR"
    )

    # CORS
    allowed_origins: List[str] = Field(
        default=[
            "http://localhost:3000",
            "http://127.0.0.1:3000",
        ],
        alias="ALLOWED_ORIGINS"
    )

    @field_validator("balance_threshold")
    @classmethod
    def check_balance_threshold(cls, v: str) -> str:
        value = Fraction(v)
        if not 0 < value <= 1:
            raise ValueError("balance threshold must lie in (0, 1]")
        return v

    @field_validator("log_base")
    @classmethod
    def check_log_base(cls, v: str) -> str:
        if v not in ("2", "e"):
            raise ValueError("log base must be '2' or 'e'")
        return v

    @property
    def balance_fraction(self) -> Fraction:
        return Fraction(self.balance_threshold)


settings = Settings()
