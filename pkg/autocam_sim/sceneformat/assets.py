"""In-memory asset types produced by the asset grammar."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from autocam_sim.models import ClassLabel
from autocam_sim.spectral import Spectrum

AXES = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}


def axis_vector(name: str) -> np.ndarray:
    """Unit vector for an axis name such as ``z``, ``+x`` or ``-y``."""
    sign = -1.0 if name.startswith("-") else 1.0
    key = name.lstrip("+-")
    if key not in AXES:
        raise ValueError(f"unknown axis '{name}'")
    return sign * AXES[key]


class MaterialKind(str, Enum):
    DIFFUSE = "diffuse"
    RETROREFLECTIVE = "retroreflective"
    EMISSIVE = "emissive"


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Triangle mesh with vertices already in asset space."""

    vertices: np.ndarray
    triangles: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "triangles", np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3))
        if self.normals is not None:
            object.__setattr__(self, "normals", np.asarray(self.normals, dtype=np.float64).reshape(-1, 3))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TriangleMesh):
            return NotImplemented
        if (self.normals is None) != (other.normals is None):
            return False
        return (
            np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.triangles, other.triangles)
            and (self.normals is None or np.array_equal(self.normals, other.normals))
        )

    def triangle_vertices(self) -> np.ndarray:
        """(T, 3, 3) corner positions."""
        return self.vertices[self.triangles]


@dataclass(frozen=True)
class MaterialSpec:
    """Surface material.

    ``retro_sigma_deg`` is the angular spread of the retroreflective lobe;
    ``retro_fraction`` the share of reflected energy going into it.
    """

    name: str
    kind: MaterialKind
    reflectance: Spectrum | None = None
    emission: Spectrum | None = None
    retro_fraction: float = 0.0
    retro_sigma_deg: float = 5.0

    @property
    def retro_sigma(self) -> float:
        """Lobe spread in radians."""
        return float(np.radians(self.retro_sigma_deg))


@dataclass(frozen=True)
class AssetDescription:
    asset_id: str
    class_label: ClassLabel
    meshes: tuple[tuple[TriangleMesh, str], ...]
    materials: dict[str, MaterialSpec]
    bbox_min: tuple[float, float, float]
    bbox_max: tuple[float, float, float]
    up_axis: str = "z"
    forward_axis: str = "x"
    tags: tuple[str, ...] = field(default=(), compare=False)

    @property
    def triangle_count(self) -> int:
        return sum(len(mesh.triangles) for mesh, _ in self.meshes)

    def canonicalized(self) -> AssetDescription:
        """Copy rotated so that the nominal up is +z and forward is +x."""
        up = axis_vector(self.up_axis)
        forward = axis_vector(self.forward_axis)
        if abs(float(np.dot(up, forward))) > 1e-12:
            raise ValueError(f"asset '{self.asset_id}': up and forward axes must differ")
        if self.up_axis.lstrip("+") == "z" and self.forward_axis.lstrip("+") == "x":
            return self
        left = np.cross(up, forward)
        # Rows map asset-space axes onto the canonical x (forward), y (left), z (up).
        rot = np.stack([forward, left, up])
        meshes = tuple(
            (
                TriangleMesh(
                    mesh.vertices @ rot.T,
                    mesh.triangles,
                    None if mesh.normals is None else mesh.normals @ rot.T,
                ),
                material,
            )
            for mesh, material in self.meshes
        )
        all_vertices = np.concatenate([mesh.vertices for mesh, _ in meshes])
        return replace(
            self,
            meshes=meshes,
            bbox_min=tuple(float(v) for v in all_vertices.min(axis=0)),
            bbox_max=tuple(float(v) for v in all_vertices.max(axis=0)),
            up_axis="z",
            forward_axis="x",
        )
