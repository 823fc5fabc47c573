"""Small dimension-agnostic geometric helpers."""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm
from scipy.spatial.transform import Rotation


def axis_rotation(axis, angle: float) -> np.ndarray:
    """3x3 rotation by ``angle`` about the unit vector ``axis``."""
    axis = np.asarray(axis, dtype=float)
    return Rotation.from_rotvec(axis / np.linalg.norm(axis) * angle).as_matrix()


def plane_rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def random_rotation(dim: int, rng: np.random.Generator, magnitude: float = np.pi) -> np.ndarray:
    """Rotation of R^dim as the exponential of a random skew matrix.

    The skew generator is rescaled so its spectral norm (the largest
    rotation angle) equals ``magnitude``.
    """
    A = rng.standard_normal((dim, dim))
    A = A - A.T
    nrm = np.linalg.norm(A, 2)
    if nrm == 0:
        return np.eye(dim)
    return expm(A * (magnitude / nrm))


def orthonormal_complement(vec) -> np.ndarray:
    """Rows spanning the orthogonal complement of ``vec``, completing a
    right-handed (positively oriented) frame [complement..., vec]."""
    vec = np.asarray(vec, dtype=float)
    vec = vec / np.linalg.norm(vec)
    d = vec.size
    _, _, vt = np.linalg.svd(vec[None, :])
    basis = vt[1:]
    if np.linalg.det(np.vstack([basis, vec])) < 0:
        basis[0] = -basis[0]
    assert basis.shape == (d - 1, d)
    return basis


def point_segment_distance(p, a, b) -> np.ndarray:
    """Distances from points ``p`` to segments ``ab``; broadcasts over rows."""
    p, a, b = (np.asarray(t, dtype=float) for t in (p, a, b))
    d = b - a
    dd = np.einsum("...i,...i->...", d, d)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.einsum("...i,...i->...", p - a, d) / dd
    t = np.where(dd > 0, np.clip(t, 0.0, 1.0), 0.0)
    return np.linalg.norm(p - (a + t[..., None] * d), axis=-1)


def segment_distance(a0, a1, b0, b1) -> np.ndarray:
    """Exact distances between segment pairs in any dimension.

    The minimum is attained either at an interior critical point or with
    one parameter on an endpoint, so both are evaluated.
    """
    a0, a1, b0, b1 = (np.atleast_2d(np.asarray(t, dtype=float)) for t in (a0, a1, b0, b1))
    best = np.minimum.reduce([
        point_segment_distance(a0, b0, b1),
        point_segment_distance(a1, b0, b1),
        point_segment_distance(b0, a0, a1),
        point_segment_distance(b1, a0, a1),
    ])
    u = a1 - a0
    v = b1 - b0
    w = a0 - b0
    uu = (u * u).sum(-1)
    vv = (v * v).sum(-1)
    uv = (u * v).sum(-1)
    uw = (u * w).sum(-1)
    vw = (v * w).sum(-1)
    den = uu * vv - uv * uv
    ok = den > 1e-14 * np.maximum(uu * vv, 1e-300)
    dd = np.where(ok, den, 1.0)
    s = (uv * vw - vv * uw) / dd
    t = (uu * vw - uv * uw) / dd
    ok &= (s >= 0) & (s <= 1) & (t >= 0) & (t <= 1)
    inner = np.linalg.norm(w + s[:, None] * u - t[:, None] * v, axis=-1)
    return np.where(ok, np.minimum(inner, best), best)


def point_triangle_distance(p, tri) -> np.ndarray:
    """Distances from points (n, d) to triangles (n, 3, d) in any dimension."""
    p = np.asarray(p, dtype=float)
    tri = np.asarray(tri, dtype=float)
    a = tri[:, 0]
    e1 = tri[:, 1] - a
    e2 = tri[:, 2] - a
    w = p - a
    g11 = (e1 * e1).sum(-1)
    g12 = (e1 * e2).sum(-1)
    g22 = (e2 * e2).sum(-1)
    r1 = (w * e1).sum(-1)
    r2 = (w * e2).sum(-1)
    det = g11 * g22 - g12 * g12
    ok = det > 0
    dd = np.where(ok, det, 1.0)
    s = (g22 * r1 - g12 * r2) / dd
    t = (g11 * r2 - g12 * r1) / dd
    inside = ok & (s >= 0) & (t >= 0) & (s + t <= 1)
    plane = np.linalg.norm(w - s[:, None] * e1 - t[:, None] * e2, axis=-1)
    edge = np.minimum.reduce([
        point_segment_distance(p, tri[:, 0], tri[:, 1]),
        point_segment_distance(p, tri[:, 1], tri[:, 2]),
        point_segment_distance(p, tri[:, 2], tri[:, 0]),
    ])
    return np.where(inside, plane, edge)


def bbox_diagonal(points) -> float:
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return 1.0
    d = float(np.linalg.norm(pts.max(0) - pts.min(0)))
    return d if d > 0 else 1.0


def edge_table(triangles, n_vertices: int):
    """Global edge ids for each triangle side.

    Returns ``(tri_edge, keys)`` where ``tri_edge[f, k]`` is the id of the
    edge from local vertex k to k+1 and ``keys[id] = lo * n_vertices + hi``.
    """
    t = np.asarray(triangles)
    e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    e.sort(axis=1)
    uniq, inv = np.unique(e[:, 0] * n_vertices + e[:, 1], return_inverse=True)
    return inv.reshape(3, len(t)).T, uniq
