from fastapi import APIRouter, Depends

from app.api.dependencies import bad_request, get_settings
from app.core.config import Settings
from app.core.errors import PercLabError
from app.schemas.generator import GeneratorSpec, GraphResponse
from app.services.generator_service import GeneratorService

router = APIRouter(prefix="/graphs", tags=["graphs"])


@router.post("/generate", response_model=GraphResponse)
async def generate_graph(
    spec: GeneratorSpec,
    settings: Settings = Depends(get_settings)
):
    """Generate a graph from one of the supported families"""
    try:
        graph = GeneratorService(settings).generate(spec)
    except PercLabError as e:
        raise bad_request(e)

    components = graph.connected_components()
    return GraphResponse(
        n=graph.n,
        m=graph.m,
        regular_degree=graph.regular_degree(),
        components=len(components),
        giant_size=len(components[0]) if components else 0,
        edges=graph.edge_list()
    )
