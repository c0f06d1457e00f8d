"""Services module: one service per pipeline stage."""

from autocam_sim.services.assemble_service import AssembledScene, AssembleService
from autocam_sim.services.evaluate_service import EvaluateService, EvaluationReport
from autocam_sim.services.render_service import RenderedScene, RenderService
from autocam_sim.services.sensor_service import SensorOutput, SensorService

__all__ = [
    "AssembleService",
    "AssembledScene",
    "EvaluateService",
    "EvaluationReport",
    "RenderService",
    "RenderedScene",
    "SensorOutput",
    "SensorService",
]
