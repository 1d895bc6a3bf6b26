import asyncio
from functools import partial

from fastapi import APIRouter, Depends, HTTPException, status

from app.api.dependencies import bad_request, get_settings
from app.core.config import Settings
from app.core.errors import PercLabError
from app.schemas.experiment import ExperimentResult, ExperimentRunRequest
from app.services.experiment_service import ExperimentService

router = APIRouter(prefix="/experiments", tags=["experiments"])


@router.post("/run", response_model=ExperimentResult)
async def run_experiment(
    request: ExperimentRunRequest,
    settings: Settings = Depends(get_settings)
):
    """Run a config text or a named preset; records come back in trial order"""
    if (request.config is None) == (request.preset is None):
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail="Provide exactly one of 'config' or 'preset'"
        )

    experiment_service = ExperimentService(settings)
    try:
        if request.preset is not None:
            config = experiment_service.preset(request.preset)
        else:
            config = experiment_service.parse_config(request.config)
        # results are returned, not written
        config = experiment_service.apply_overrides(config, trials=request.trials, seed=request.seed)
        config = config.model_copy(update={"output": None})
    except PercLabError as e:
        raise bad_request(e)

    loop = asyncio.get_running_loop()
    try:
        return await loop.run_in_executor(None, partial(experiment_service.run_experiment, config))
    except PercLabError as e:
        raise bad_request(e)
