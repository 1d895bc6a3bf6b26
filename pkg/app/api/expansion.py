from fastapi import APIRouter, Depends

from app.api.dependencies import bad_request, get_settings, parse_graph
from app.core.config import Settings
from app.core.errors import PercLabError
from app.schemas.structure import ExpansionMode, ExpansionReport, ExpansionRequest
from app.services.expansion_service import ExpansionService

router = APIRouter(prefix="/expansion", tags=["expansion"])


@router.post("/", response_model=ExpansionReport)
async def measure_expansion(
    request: ExpansionRequest,
    settings: Settings = Depends(get_settings)
):
    """Exact edge expansion for small graphs, bounded witness search otherwise"""
    graph = parse_graph(request.graph)
    expansion_service = ExpansionService(settings)
    try:
        if request.mode == ExpansionMode.EXACT:
            return expansion_service.exact_edge_expansion(graph, request.rule)
        return expansion_service.expansion_upper_bound(graph, request.trials, request.seed)
    except PercLabError as e:
        raise bad_request(e)
