"""Monte Carlo spectral renderer with motion blur and metadata planes."""

from autocam_sim.geometry import interpolate_transform
from autocam_sim.render.camera import RenderCamera
from autocam_sim.render.config import RenderConfig
from autocam_sim.render.environment import EnvironmentLight, load_environment
from autocam_sim.render.integrator import RenderStats, SceneHit, intersect_scene, render, render_with_stats
from autocam_sim.render.materials import MaterialTable, scatter
from autocam_sim.render.preview import write_preview
from autocam_sim.render.scene import Scene, ScenePrimitive

__all__ = [
    "EnvironmentLight",
    "MaterialTable",
    "RenderCamera",
    "RenderConfig",
    "RenderStats",
    "Scene",
    "SceneHit",
    "ScenePrimitive",
    "interpolate_transform",
    "intersect_scene",
    "load_environment",
    "render",
    "render_with_stats",
    "scatter",
    "write_preview",
]
