from .generator import GraphFamily, GeneratorSpec, EdgeListPayload, GraphSummary, GraphResponse
from .spectral import (
    SpectralMethod, SpectralSummary, MixingAuditReport, MixingViolation, DensityReport,
    SpectrumRequest, SpectrumResponse
)
from .percolation import PercolationParams, RemovalEntry, PruneTrace, TraceViolation
from .structure import (
    SubsetRule, ExpansionMode, ExpansionReport, CoreExpansionReport,
    OutComponent, OutReport, CertificateCondition, CertificateReport, BarePathReport, ExpansionRequest
)
from .experiment import (
    CheckName, ExperimentConfig, ExperimentRecord, ExperimentSummary, ExperimentResult,
    CheckSummary, PValueSummary, ExperimentRunRequest, RECORD_COLUMNS
)

__all__ = [
    "GraphFamily", "GeneratorSpec", "EdgeListPayload", "GraphSummary", "GraphResponse",
    "SpectralMethod", "SpectralSummary", "MixingAuditReport", "MixingViolation", "DensityReport",
    "SpectrumRequest", "SpectrumResponse",
    "PercolationParams", "RemovalEntry", "PruneTrace", "TraceViolation",
    "SubsetRule", "ExpansionMode", "ExpansionReport", "CoreExpansionReport",
    "OutComponent", "OutReport", "CertificateCondition", "CertificateReport", "BarePathReport", "ExpansionRequest",
    "CheckName", "ExperimentConfig", "ExperimentRecord", "ExperimentSummary", "ExperimentResult",
    "CheckSummary", "PValueSummary", "ExperimentRunRequest", "RECORD_COLUMNS"
]
