"""Monte Carlo spectral path tracer.

Paths start at the camera, bounce off diffuse and retroreflective
surfaces and gather sky light through next-event estimation at every
hit. Emissive surfaces are only found by direct hits. Rendering is split
into pixel tiles that are traced independently on a thread pool.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from autocam_sim.models import ClassLabel, SceneRecipe, ShutterConfig
from autocam_sim.render.camera import CameraRays, RenderCamera
from autocam_sim.render.config import RenderConfig
from autocam_sim.render.environment import EnvironmentLight, load_environment
from autocam_sim.render.materials import EMISSIVE, sample_scatter
from autocam_sim.render.sampling import DIM_TIME, SampleStream, bounce_dim
from autocam_sim.render.scene import Scene
from autocam_sim.sceneformat.asset_store import AssetStore
from autocam_sim.spectral import SpectralImage

logger = logging.getLogger(__name__)

# Offset (m) along the normal for rays leaving a surface.
NORMAL_OFFSET = 1e-4


@dataclass
class RenderStats:
    """Counters collected while rendering one image."""

    camera_rays: int = 0
    vignetted: int = 0
    newton_failures: int = 0
    zero_weight: bool = False
    elapsed: float = 0.0

    @property
    def vignetted_fraction(self) -> float:
        return self.vignetted / self.camera_rays if self.camera_rays else 0.0

    def merge(self, other: RenderStats) -> None:
        self.camera_rays += other.camera_rays
        self.vignetted += other.vignetted
        self.newton_failures += other.newton_failures

    def to_dict(self) -> dict:
        """Counters as a dict, without wall-clock time."""
        return {
            "camera_rays": self.camera_rays,
            "vignetted": self.vignetted,
            "vignetted_fraction": self.vignetted_fraction,
            "newton_failures": self.newton_failures,
            "zero_weight": self.zero_weight,
        }


@dataclass(frozen=True)
class SceneHit:
    t: float
    point: np.ndarray
    normal: np.ndarray
    object_index: int
    triangle_index: int
    material_index: int
    instance_id: int
    class_label: ClassLabel


def intersect_scene(scene: Scene, origin, direction, u: float = 0.0) -> SceneHit | None:
    """Nearest hit of a single ray at normalized shutter time ``u``; None on a miss."""
    o = np.asarray(origin, dtype=np.float64).reshape(1, 3)
    d = np.asarray(direction, dtype=np.float64).reshape(1, 3)
    d = d / np.linalg.norm(d)
    hit = scene.intersect(o, d, np.array([u]))
    if not hit.hit[0]:
        return None
    oi = int(hit.object_index[0])
    t = float(hit.t[0])
    return SceneHit(
        t=t,
        point=o[0] + t * d[0],
        normal=hit.normal[0],
        object_index=oi,
        triangle_index=int(hit.triangle_index[0]),
        material_index=int(hit.material[0]),
        instance_id=scene.objects[oi].instance_id,
        class_label=scene.objects[oi].class_label,
    )


def trace_paths(
    scene: Scene,
    env: EnvironmentLight,
    rays: CameraRays,
    times: np.ndarray,
    stream: SampleStream,
    max_depth: int,
) -> np.ndarray:
    """Radiance times camera weight for every path, shape (N, B)."""
    table = scene.materials
    n = len(rays.origins)
    result = np.zeros_like(rays.weights)
    beta = rays.weights.copy()
    o = rays.origins.copy()
    d = rays.directions.copy()
    alive = beta.max(axis=1) > 0
    sky_on_escape = np.ones(n, dtype=bool)

    for bounce in range(max_depth):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        hit = scene.intersect(o[idx], d[idx], times[idx])
        miss = ~hit.hit
        escaped = idx[miss & sky_on_escape[idx]]
        if escaped.size:
            result[escaped] += beta[escaped] * env.radiance(d[escaped])
        alive[idx[miss]] = False

        sel = hit.hit
        hidx = idx[sel]
        if hidx.size == 0:
            break
        mat = hit.material[sel]
        normals = hit.normal[sel]
        w_in = d[hidx]
        facing = np.einsum("ij,ij->i", normals, w_in) > 0
        normals[facing] *= -1.0
        points = o[hidx] + hit.t[sel][:, None] * w_in

        emissive = table.kind[mat] == EMISSIVE
        if emissive.any():
            e = hidx[emissive]
            result[e] += beta[e] * table.emission[mat[emissive]]
            alive[e] = False
            keep = ~emissive
            hidx, mat, normals, w_in, points = hidx[keep], mat[keep], normals[keep], w_in[keep], points[keep]
            if hidx.size == 0:
                continue
        start = points + NORMAL_OFFSET * normals

        # next-event estimation toward the sky for the diffuse share
        u_light = np.stack(
            [stream.uniform(bounce_dim(bounce, 3), hidx), stream.uniform(bounce_dim(bounce, 4), hidx)], axis=1
        )
        light_dir, pdf = env.sample(normals, u_light)
        cos_l = np.einsum("ij,ij->i", light_dir, normals)
        k = np.flatnonzero((cos_l > 0) & (pdf > 0))
        if k.size:
            visible = ~scene.occluded(start[k], light_dir[k], times[hidx[k]])
            k = k[visible]
        if k.size:
            brdf = table.reflectance[mat[k]] * ((1.0 - table.retro_fraction[mat[k]]) / np.pi)[:, None]
            result[hidx[k]] += (
                beta[hidx[k]] * brdf * env.radiance(light_dir[k]) * (cos_l[k] / pdf[k])[:, None]
            )

        u_dir = np.stack(
            [stream.uniform(bounce_dim(bounce, 1), hidx), stream.uniform(bounce_dim(bounce, 2), hidx)], axis=1
        )
        w_out, throughput, lobe = sample_scatter(
            table,
            mat,
            w_in,
            normals,
            stream.uniform(bounce_dim(bounce, 0), hidx),
            u_dir,
            stream.normal_pair(bounce_dim(bounce, 1), hidx),
        )
        beta[hidx] *= throughput
        o[hidx] = start
        d[hidx] = w_out
        sky_on_escape[hidx] = lobe
        alive[hidx] &= beta[hidx].max(axis=1) > 0

    return result


@dataclass
class _RenderJob:
    scene: Scene
    env: EnvironmentLight
    camera: RenderCamera
    cfg: RenderConfig
    time_offset: float
    time_span: float


def _tiles(width: int, height: int, size: int) -> list[tuple[int, int, int, int]]:
    return [
        (r0, min(r0 + size, height), c0, min(c0 + size, width))
        for r0 in range(0, height, size)
        for c0 in range(0, width, size)
    ]


def _render_tile(job: _RenderJob, tile: tuple[int, int, int, int]) -> tuple[np.ndarray, RenderStats]:
    r0, r1, c0, c1 = tile
    spp = job.cfg.samples_per_pixel
    rr, cc = np.meshgrid(np.arange(r0, r1), np.arange(c0, c1), indexing="ij")
    n_pix = rr.size
    rows = np.repeat(rr.reshape(-1), spp)
    cols = np.repeat(cc.reshape(-1), spp)
    samples = np.tile(np.arange(spp), n_pix)
    stream = SampleStream(job.cfg.seed, rows * job.camera.width + cols, samples)
    rays = job.camera.generate(rows, cols, samples, spp, stream)
    times = job.time_offset + stream.uniform(DIM_TIME) * job.time_span
    radiance = trace_paths(job.scene, job.env, rays, times, stream, job.cfg.max_depth)
    n_bands = radiance.shape[1]
    tile_img = radiance.reshape(n_pix, spp, n_bands).mean(axis=1).reshape(r1 - r0, c1 - c0, n_bands)
    stats = RenderStats(camera_rays=len(rows), vignetted=rays.vignetted, newton_failures=rays.diverged)
    return tile_img, stats


def _metadata(job: _RenderJob, width: int, height: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rr, cc = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
    rows, cols = rr.reshape(-1), cc.reshape(-1)
    origins, dirs, valid = job.camera.primary_rays(rows, cols)
    hit = job.scene.intersect(origins, dirs, np.full(len(rows), job.time_offset))
    found = hit.hit & valid
    depth = np.where(found, hit.t, 0.0)
    obj = np.where(found, hit.object_index, 0)
    class_id = np.where(found, job.scene.class_ids[obj] if len(job.scene.objects) else 0, 0)
    instance_id = np.where(found, job.scene.instance_ids[obj] if len(job.scene.objects) else 0, 0)
    shape = (height, width)
    return depth.reshape(shape), class_id.reshape(shape), instance_id.reshape(shape)


def _shutter_mapping(recipe_shutter: ShutterConfig, override: ShutterConfig | None) -> tuple[float, float]:
    """Offset and span of the render shutter in the recipe's normalized motion time."""
    if override is None:
        return 0.0, 1.0
    duration = recipe_shutter.duration
    return (override.open - recipe_shutter.open) / duration, override.duration / duration


def render_with_stats(
    recipe: SceneRecipe,
    cfg: RenderConfig,
    store: AssetStore,
    base_dir: Path | None = None,
) -> tuple[SpectralImage, RenderStats]:
    """Render a validated recipe to film irradiance plus metadata planes.

    Args:
        recipe: scene to render.
        cfg: render settings; film size and shutter override the recipe's.
        store: asset store holding every referenced asset and sky map.
        base_dir: directory for resolving a relative lens file.

    Returns:
        (image, stats). Irradiance is in W·m⁻²·nm⁻¹ per band.
    """
    started = time.perf_counter()
    grid = cfg.wavelength_grid
    width = cfg.film_width_px or recipe.camera.film_width_px
    height = cfg.film_height_px or recipe.camera.film_height_px
    scene = Scene.from_recipe(recipe, store, grid)
    env = load_environment(recipe.lighting, grid, store)
    camera = RenderCamera.from_config(recipe.camera, width, height, grid, base_dir, cfg.diffraction)
    offset, span = _shutter_mapping(recipe.shutter, cfg.shutter)
    job = _RenderJob(scene, env, camera, cfg, offset, span)

    tiles = _tiles(width, height, cfg.tile_size)
    data = np.zeros((height, width, grid.n_bands))
    stats = RenderStats()
    logger.info(
        f"Rendering {width}x{height} px, {cfg.samples_per_pixel} spp, {len(scene.objects)} objects, "
        f"{camera.kind} camera, {len(tiles)} tiles on {cfg.workers} worker(s)"
    )
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        for (r0, r1, c0, c1), (tile_img, tile_stats) in zip(tiles, pool.map(lambda t: _render_tile(job, t), tiles)):
            data[r0:r1, c0:c1] = tile_img
            stats.merge(tile_stats)

    if stats.camera_rays and stats.vignetted >= stats.camera_rays:
        stats.zero_weight = True
        logger.warning("Every camera ray was vignetted; the image is zero")
    if stats.newton_failures:
        logger.warning(f"{stats.newton_failures} rays failed to converge on an aspheric surface")

    depth = class_id = instance_id = None
    if cfg.metadata:
        depth, class_id, instance_id = _metadata(job, width, height)

    stats.elapsed = time.perf_counter() - started
    attributes = {
        "renderer": {
            "samples_per_pixel": cfg.samples_per_pixel,
            "max_depth": cfg.max_depth,
            "seed": cfg.seed,
            "camera_model": camera.kind,
            "lens": camera.prescription.name if camera.prescription else None,
            "shutter_s": [
                (cfg.shutter or recipe.shutter).open,
                (cfg.shutter or recipe.shutter).close,
            ],
        },
        "render_stats": stats.to_dict(),
    }
    image = SpectralImage(width, height, grid, data, depth, class_id, instance_id, attributes)
    logger.info(f"Rendered in {stats.elapsed:.2f}s, vignetted {stats.vignetted_fraction:.1%}")
    return image, stats


def render(recipe: SceneRecipe, cfg: RenderConfig, store: AssetStore, base_dir: Path | None = None) -> SpectralImage:
    """Render a recipe; see :func:`render_with_stats`."""
    return render_with_stats(recipe, cfg, store, base_dir)[0]
