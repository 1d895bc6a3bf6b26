from .graphs import router as graphs_router
from .spectrum import router as spectrum_router
from .expansion import router as expansion_router
from .experiments import router as experiments_router

__all__ = [
    "graphs_router",
    "spectrum_router",
    "expansion_router",
    "experiments_router"
]
