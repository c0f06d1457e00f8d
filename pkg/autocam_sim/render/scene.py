"""Render-time scene: instanced meshes under (possibly moving) transforms.

Acceleration is two-level. Each asset gets a BVH over its triangles in
asset space; the top level is a BVH over every object's bounds swept
across the shutter interval. Rays reaching an object are moved into its
asset space using the object's transform at each ray's own time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from autocam_sim.geometry import Transform, interpolate_arrays, interpolate_transform
from autocam_sim.models import ClassLabel, SceneRecipe
from autocam_sim.render.bvh import BVH, build_bvh, intersect_triangles, inverse_directions, traverse
from autocam_sim.render.materials import MaterialTable
from autocam_sim.sceneformat.asset_store import AssetStore
from autocam_sim.sceneformat.assets import MaterialSpec
from autocam_sim.spectral import WavelengthGrid

logger = logging.getLogger(__name__)

# Minimum hit distance (m) accepted along a ray.
T_MIN = 1e-6
_SWEEP_STEPS = 9


@dataclass(frozen=True)
class MeshData:
    """All triangles of one asset, in asset space, with a global material index each."""

    asset_id: str
    triangles: np.ndarray  # (T, 3, 3)
    material_index: np.ndarray  # (T,)
    bvh: BVH
    bbox_min: np.ndarray
    bbox_max: np.ndarray


@dataclass(frozen=True)
class SceneObject:
    instance_id: int
    class_label: ClassLabel
    mesh: MeshData
    start: Transform
    end: Transform

    @property
    def is_static(self) -> bool:
        return self.start == self.end


@dataclass(frozen=True)
class ScenePrimitive:
    """World-space triangle with its labels."""

    vertices: np.ndarray
    material_index: int
    class_label: ClassLabel
    instance_id: int


@dataclass
class HitRecord:
    """Nearest hits for a ray batch; ``object_index`` is -1 on a miss."""

    t: np.ndarray
    object_index: np.ndarray
    triangle_index: np.ndarray
    normal: np.ndarray
    material: np.ndarray

    @property
    def hit(self) -> np.ndarray:
        return self.object_index >= 0


def _corners(bmin: np.ndarray, bmax: np.ndarray) -> np.ndarray:
    return np.array([[x, y, z] for x in (bmin[0], bmax[0]) for y in (bmin[1], bmax[1]) for z in (bmin[2], bmax[2])])


class Scene:
    """Read-only geometry and materials for one recipe."""

    def __init__(self, objects: list[SceneObject], materials: MaterialTable):
        self.objects = objects
        self.materials = materials
        if objects:
            lo, hi = zip(*(self._swept_bounds(obj) for obj in objects))
            self.top = build_bvh(np.array(lo), np.array(hi), leaf_size=2)
        else:
            self.top = build_bvh(np.zeros((0, 3)), np.zeros((0, 3)))
        self.instance_ids = np.array([o.instance_id for o in objects], dtype=np.int32)
        self.class_ids = np.array([o.class_label.id for o in objects], dtype=np.int32)

    @staticmethod
    def _swept_bounds(obj: SceneObject) -> tuple[np.ndarray, np.ndarray]:
        corners = _corners(obj.mesh.bbox_min, obj.mesh.bbox_max)
        steps = [0.0] if obj.is_static else np.linspace(0.0, 1.0, _SWEEP_STEPS)
        pts = np.concatenate(
            [interpolate_transform(obj.start, obj.end, float(u)).apply_points(corners) for u in steps]
        )
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        pad = 1e-6 * max(1.0, float(np.abs(pts).max()))
        if not obj.is_static:
            # rotation between samples can bulge past the sampled corners
            pad += 0.05 * float(np.linalg.norm(hi - lo))
        return lo - pad, hi + pad

    @classmethod
    def from_recipe(cls, recipe: SceneRecipe, store: AssetStore, grid: WavelengthGrid) -> Scene:
        """Instantiate every recipe object; raises KeyError for an unresolvable asset."""
        meshes: dict[str, MeshData] = {}
        material_specs: list[MaterialSpec] = []
        objects: list[SceneObject] = []
        for placed in recipe.objects:
            if placed.asset_id not in meshes:
                asset = store.load(placed.asset_id)
                base = len(material_specs)
                names = sorted(asset.materials)
                material_specs.extend(asset.materials[n] for n in names)
                lookup = {n: base + i for i, n in enumerate(names)}
                tris = np.concatenate([mesh.triangle_vertices() for mesh, _ in asset.meshes])
                mat = np.concatenate(
                    [np.full(len(mesh.triangles), lookup[m], dtype=np.int64) for mesh, m in asset.meshes]
                )
                bvh = build_bvh(tris.min(axis=1), tris.max(axis=1))
                meshes[placed.asset_id] = MeshData(
                    placed.asset_id, tris, mat, bvh, np.asarray(asset.bbox_min), np.asarray(asset.bbox_max)
                )
            objects.append(
                SceneObject(
                    instance_id=placed.instance_id,
                    class_label=placed.class_label,
                    mesh=meshes[placed.asset_id],
                    start=placed.transform_start.to_transform(),
                    end=placed.transform_end.to_transform(),
                )
            )
        logger.debug(f"Scene: {len(objects)} objects, {len(meshes)} meshes, {len(material_specs)} materials")
        return cls(objects, MaterialTable.from_specs(material_specs, grid))

    def intersect(
        self, origins: np.ndarray, directions: np.ndarray, times: np.ndarray, t_max: np.ndarray | None = None
    ) -> HitRecord:
        """Nearest hit for each ray at its normalized shutter time (0 = open, 1 = close)."""
        n = len(origins)
        t_best = np.full(n, np.inf) if t_max is None else np.array(t_max, dtype=np.float64)
        obj_hit = np.full(n, -1, dtype=np.int64)
        tri_hit = np.full(n, -1, dtype=np.int64)
        normals = np.zeros((n, 3))
        material = np.full(n, -1, dtype=np.int64)
        times = np.broadcast_to(np.asarray(times, dtype=np.float64), (n,))

        def object_leaf(object_ids: np.ndarray, rays: np.ndarray) -> None:
            for oi in object_ids:
                self._intersect_object(
                    int(oi), rays, origins, directions, times, t_best, obj_hit, tri_hit, normals, material
                )

        traverse(self.top, origins, inverse_directions(directions), t_best, object_leaf)
        return HitRecord(t_best, obj_hit, tri_hit, normals, material)

    def _intersect_object(
        self, oi, rays, origins, directions, times, t_best, obj_hit, tri_hit, normals, material
    ) -> None:
        obj = self.objects[oi]
        mesh = obj.mesh
        if obj.is_static:
            r = obj.start.rotation_matrix()
            trans = obj.start.translation
            inv_scale = 1.0 / obj.start.scale
            o_local = ((origins[rays] - trans) @ r) * inv_scale
            d_local = (directions[rays] @ r) * inv_scale
            rot = None
        else:
            trans, rot, scale = interpolate_arrays(obj.start, obj.end, times[rays])
            rel = origins[rays] - trans
            o_local = np.einsum("nij,ni->nj", rot, rel) / scale[:, None]
            d_local = np.einsum("nij,ni->nj", rot, directions[rays]) / scale[:, None]

        t_local = t_best[rays].copy()
        tri_local = np.full(len(rays), -1, dtype=np.int64)

        def tri_leaf(tri_ids: np.ndarray, sub: np.ndarray) -> None:
            tris = mesh.triangles[tri_ids]
            t = intersect_triangles(o_local[sub], d_local[sub], tris[:, 0], tris[:, 1], tris[:, 2])
            t = np.where(t > T_MIN, t, np.inf)
            best = np.argmin(t, axis=1)
            tb = t[np.arange(len(sub)), best]
            closer = tb < t_local[sub]
            t_local[sub[closer]] = tb[closer]
            tri_local[sub[closer]] = tri_ids[best[closer]]

        traverse(mesh.bvh, o_local, inverse_directions(d_local), t_local, tri_leaf)
        found = tri_local >= 0
        if not found.any():
            return
        ray_ids = rays[found]
        t_best[ray_ids] = t_local[found]
        obj_hit[ray_ids] = oi
        tri_hit[ray_ids] = tri_local[found]
        material[ray_ids] = mesh.material_index[tri_local[found]]
        tris = mesh.triangles[tri_local[found]]
        n_local = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
        if rot is None:
            n_world = n_local @ obj.start.rotation_matrix().T
        else:
            n_world = np.einsum("nij,nj->ni", rot[found], n_local)
        normals[ray_ids] = n_world / np.linalg.norm(n_world, axis=1, keepdims=True)

    def occluded(self, origins: np.ndarray, directions: np.ndarray, times: np.ndarray) -> np.ndarray:
        """True where a ray hits any geometry."""
        return self.intersect(origins, directions, times).hit

    def world_primitives(self, u: float = 0.0) -> list[ScenePrimitive]:
        """Every triangle in world space at normalized shutter time ``u``."""
        prims = []
        for obj in self.objects:
            t = interpolate_transform(obj.start, obj.end, u)
            verts = t.apply_points(obj.mesh.triangles.reshape(-1, 3)).reshape(-1, 3, 3)
            for tri, mat in zip(verts, obj.mesh.material_index):
                prims.append(ScenePrimitive(tri, int(mat), obj.class_label, obj.instance_id))
        return prims
