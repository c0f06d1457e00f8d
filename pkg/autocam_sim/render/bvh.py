"""Bounding volume hierarchy over axis-aligned boxes, traversed for ray batches."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

LEAF_SIZE = 4


@dataclass(frozen=True)
class BVH:
    """Flattened tree. Leaves have ``left == -1`` and cover ``order[start:start+count]``."""

    node_min: np.ndarray
    node_max: np.ndarray
    left: np.ndarray
    right: np.ndarray
    start: np.ndarray
    count: np.ndarray
    order: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.left)


def build_bvh(box_min: np.ndarray, box_max: np.ndarray, leaf_size: int = LEAF_SIZE) -> BVH:
    """Median split along the largest centroid extent."""
    box_min = np.asarray(box_min, dtype=np.float64).reshape(-1, 3)
    box_max = np.asarray(box_max, dtype=np.float64).reshape(-1, 3)
    n = len(box_min)
    order = np.arange(n)
    centroids = 0.5 * (box_min + box_max)
    node_min, node_max, left, right, start, count = [], [], [], [], [], []

    def new_node(lo: int, hi: int) -> int:
        idx = order[lo:hi]
        node_min.append(box_min[idx].min(axis=0) if hi > lo else np.zeros(3))
        node_max.append(box_max[idx].max(axis=0) if hi > lo else np.zeros(3))
        left.append(-1)
        right.append(-1)
        start.append(lo)
        count.append(hi - lo)
        return len(left) - 1

    root = new_node(0, n)
    stack = [(root, 0, n)]
    while stack:
        node, lo, hi = stack.pop()
        if hi - lo <= leaf_size:
            continue
        idx = order[lo:hi]
        c = centroids[idx]
        extent = c.max(axis=0) - c.min(axis=0)
        axis = int(np.argmax(extent))
        if extent[axis] == 0.0:
            continue
        sorted_idx = idx[np.argsort(c[:, axis], kind="stable")]
        order[lo:hi] = sorted_idx
        mid = (lo + hi) // 2
        l_node = new_node(lo, mid)
        r_node = new_node(mid, hi)
        left[node] = l_node
        right[node] = r_node
        count[node] = 0
        stack.append((l_node, lo, mid))
        stack.append((r_node, mid, hi))

    return BVH(
        node_min=np.array(node_min).reshape(-1, 3),
        node_max=np.array(node_max).reshape(-1, 3),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        start=np.array(start, dtype=np.int64),
        count=np.array(count, dtype=np.int64),
        order=order,
    )


def ray_box(
    origins: np.ndarray, inv_dirs: np.ndarray, bmin: np.ndarray, bmax: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Slab test; returns (hit mask, entry distance)."""
    with np.errstate(invalid="ignore"):
        t0 = (bmin - origins) * inv_dirs
        t1 = (bmax - origins) * inv_dirs
    t_near = np.fmax.reduce(np.fmin(t0, t1), axis=1)
    t_far = np.fmin.reduce(np.fmax(t0, t1), axis=1)
    t_near = np.maximum(t_near, 0.0)
    return t_near <= t_far, t_near


def inverse_directions(directions: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 1.0 / directions


def traverse(
    bvh: BVH,
    origins: np.ndarray,
    inv_dirs: np.ndarray,
    t_best: np.ndarray,
    leaf_fn: Callable[[np.ndarray, np.ndarray], None],
) -> None:
    """Visit leaves reached by each ray, pruning boxes farther than ``t_best``.

    ``leaf_fn(primitive_ids, ray_ids)`` is expected to lower ``t_best`` in
    place for rays that hit something closer.
    """
    if bvh.node_count == 0 or len(origins) == 0:
        return
    stack = [(0, np.arange(len(origins)))]
    while stack:
        node, rays = stack.pop()
        hit, t_near = ray_box(origins[rays], inv_dirs[rays], bvh.node_min[node], bvh.node_max[node])
        rays = rays[hit & (t_near <= t_best[rays])]
        if rays.size == 0:
            continue
        if bvh.left[node] < 0:
            s = bvh.start[node]
            leaf_fn(bvh.order[s:s + bvh.count[node]], rays)
        else:
            stack.append((int(bvh.right[node]), rays))
            stack.append((int(bvh.left[node]), rays))


def intersect_triangles(
    origins: np.ndarray, directions: np.ndarray, v0: np.ndarray, v1: np.ndarray, v2: np.ndarray, eps: float = 1e-9
) -> np.ndarray:
    """Möller-Trumbore distances for every ray × triangle pair, shape (R, T); inf on miss."""
    e1 = v1 - v0
    e2 = v2 - v0
    d = directions[:, None, :]
    p = np.cross(d, e2[None, :, :])
    det = np.sum(e1[None] * p, axis=-1)
    ok = np.abs(det) > eps * np.linalg.norm(e1, axis=-1)[None] * np.linalg.norm(e2, axis=-1)[None]
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_det = np.where(ok, 1.0 / det, 0.0)
        s = origins[:, None, :] - v0[None]
        u = np.sum(s * p, axis=-1) * inv_det
        q = np.cross(s, e1[None])
        v = np.sum(d * q, axis=-1) * inv_det
        t = np.sum(e2[None] * q, axis=-1) * inv_det
    hit = ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > 0)
    return np.where(hit, t, np.inf)
