from fastapi import APIRouter, Depends

from app.api.dependencies import bad_request, get_settings, parse_graph
from app.core.config import Settings
from app.core.errors import PercLabError
from app.schemas.spectral import SpectrumRequest, SpectrumResponse
from app.services.spectral_service import SpectralService

router = APIRouter(prefix="/spectrum", tags=["spectrum"])


@router.post("/", response_model=SpectrumResponse)
async def measure_spectrum(
    request: SpectrumRequest,
    settings: Settings = Depends(get_settings)
):
    """Measure lambda and audit the mixing inequality with it"""
    graph = parse_graph(request.graph)
    spectral_service = SpectralService(settings)
    try:
        summary = spectral_service.second_eigenvalue_abs(graph, tol=request.tol, max_iter=request.max_iter)
        audit = spectral_service.mixing_lemma_audit(graph, summary.lambda_, request.samples, request.seed)
    except PercLabError as e:
        raise bad_request(e)
    return SpectrumResponse(summary=summary, audit=audit)
