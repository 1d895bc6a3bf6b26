from fastapi import HTTPException, status

from app.core.config import Settings, settings
from app.core.errors import PercLabError
from app.models.graph import Graph, build_graph
from app.schemas.generator import EdgeListPayload


def get_settings() -> Settings:
    return settings


def parse_graph(payload: EdgeListPayload) -> Graph:
    """Build the request graph; invalid edge lists become 400 responses"""
    try:
        return build_graph(payload.n, payload.edges)
    except PercLabError as e:
        raise bad_request(e)


def bad_request(error: PercLabError) -> HTTPException:
    return HTTPException(
        status_code=status.HTTP_400_BAD_REQUEST,
        detail=str(error)
    )
