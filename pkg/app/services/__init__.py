from .io_service import GraphIOService
from .generator_service import GeneratorService
from .spectral_service import SpectralService
from .percolation_service import PercolationService
from .tree_service import TreeService
from .expansion_service import ExpansionService
from .structure_service import StructureService
from .experiment_service import ExperimentService

__all__ = [
    "GraphIOService",
    "GeneratorService",
    "SpectralService",
    "PercolationService",
    "TreeService",
    "ExpansionService",
    "StructureService",
    "ExperimentService"
]
