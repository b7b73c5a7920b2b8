from typing import Callable

from fastapi import APIRouter, HTTPException

from chiralwalk.api.v1.schemas import ErrorResponse, ExperimentInfo, ExperimentListResponse
from chiralwalk.errors import NumericalError
from chiralwalk.experiments import EXPERIMENTS
from chiralwalk.experiments.chain_experiment import ChainConfig, ChainExperiment, ChainReport
from chiralwalk.experiments.ion_experiment import IonConfig, IonExperiment, IonReport
from chiralwalk.experiments.polygon_experiment import PolygonConfig, PolygonExperiment, PolygonReport
from chiralwalk.experiments.switch_experiment import SwitchConfig, SwitchExperiment, SwitchReport
from chiralwalk.experiments.triangle_experiment import TriangleConfig, TriangleExperiment, TriangleReport
from chiralwalk.utils.logger import logger

router = APIRouter(tags=["Experiments"])

# the long-running ensembles and the FMO optimizer stay on the command line
HTTP_EXPERIMENTS = {"switch", "chain", "polygon", "ion", "triangle"}

ERROR_RESPONSES = {400: {"model": ErrorResponse}, 500: {"model": ErrorResponse}}


def _run(name: str, runner: Callable, config):
    try:
        logger.info(f"API: Received {name} request")
        report = runner(config)
        logger.info(f"API: {name} finished")
        return report

    except NumericalError as e:
        logger.error(f"API: {name} failed numerically - {e}")
        raise HTTPException(status_code=500, detail=str(e))
    except ValueError as e:
        logger.warning(f"API: {name} rejected - {e}")
        raise HTTPException(status_code=400, detail=str(e))
    except Exception:
        logger.exception(f"API: Unexpected error during {name}")
        raise HTTPException(status_code=500, detail="Internal server error")


@router.get(
    "/experiments",
    response_model=ExperimentListResponse,
    summary="List experiments",
    description="All experiment runners with their configurable parameters",
)
def list_experiments():
    experiments = [
        ExperimentInfo(
            name=name,
            description=(runner.__doc__ or "").strip(),
            http=name in HTTP_EXPERIMENTS,
            parameters=list(config_cls.model_fields),
        )
        for name, (config_cls, runner) in EXPERIMENTS.items()
    ]
    return ExperimentListResponse(status="success", experiments=experiments, count=len(experiments))


@router.post(
    "/experiments/switch",
    response_model=SwitchReport,
    responses=ERROR_RESPONSES,
    summary="Run the quantum switch",
    description="First maxima at E and F, enhancement over the achiral switch and, with traps, the efficiency",
)
def run_switch(config: SwitchConfig):
    return _run("switch", SwitchExperiment.run, config)


@router.post(
    "/experiments/chain",
    response_model=ChainReport,
    responses=ERROR_RESPONSES,
    summary="Run the triangle chain",
    description="Half-arrival times for each control phase, with optional sweep and scaling fit",
)
def run_chain(config: ChainConfig):
    return _run("chain", ChainExperiment.run, config)


@router.post(
    "/experiments/polygon",
    response_model=PolygonReport,
    responses=ERROR_RESPONSES,
    summary="Compare the polygon closed form with the propagator",
)
def run_polygon(config: PolygonConfig):
    return _run("polygon", PolygonExperiment.run, config)


@router.post(
    "/experiments/ion",
    response_model=IonReport,
    responses=ERROR_RESPONSES,
    summary="Run the trapped-ion walks",
)
def run_ion(config: IonConfig):
    return _run("ion", IonExperiment.run, config)


@router.post(
    "/experiments/triangle",
    response_model=TriangleReport,
    responses=ERROR_RESPONSES,
    summary="Run the inhomogeneous triangle",
)
def run_triangle(config: TriangleConfig):
    return _run("triangle", TriangleExperiment.run, config)
