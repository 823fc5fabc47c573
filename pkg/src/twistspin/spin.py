"""Spun and twist-spun 2-knots as triangulated surfaces in R^4."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .arc import PolylineArc, TwistBall, check_ball, insert_ball_crossings, validate_arc
from .config import SYMMETRY_TOL
from .geometry import axis_rotation, bbox_diagonal, plane_rotation, point_triangle_distance


class TopologyError(ValueError):
    """Raised when a mesh is not a closed edge-manifold."""


@dataclass
class Surface4:
    vertices: np.ndarray
    triangles: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 4)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)

    @property
    def scale(self) -> float:
        return bbox_diagonal(self.vertices)

    def edges(self):
        """Unique undirected edges and the number of triangles on each."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0, return_counts=True)

    def to_dict(self) -> dict:
        return {"vertices4": self.vertices.tolist(), "triangles": self.triangles.tolist(), "meta": dict(self.meta)}

    @classmethod
    def from_dict(cls, d: dict) -> "Surface4":
        return cls(np.array(d["vertices4"], dtype=float), np.array(d["triangles"], dtype=np.int64), d.get("meta", {}))


@dataclass
class SymmetryReport:
    order_tested: int
    max_deviation: float
    exact_on_vertices: bool

    def to_dict(self):
        return {"order_tested": self.order_tested, "max_deviation": self.max_deviation,
                "exact_on_vertices": self.exact_on_vertices}


def ring_index(i: int, j: int, n_arc: int, m: int) -> int:
    """Vertex index of interior arc vertex ``i`` (1..n_arc-2) on ring ``j``."""
    return 1 + (j % m) * (n_arc - 2) + (i - 1)


def _triangulate(n_arc: int, m: int) -> np.ndarray:
    k = n_arc - 2
    last = 1 + m * k
    j = np.arange(m)
    jn = (j + 1) % m
    tris = []
    # start fan
    tris.append(np.column_stack([np.zeros(m, dtype=np.int64), 1 + j * k, 1 + jn * k]))
    for i in range(1, k):
        a = 1 + j * k + (i - 1)
        b = a + 1
        c = 1 + jn * k + i
        d = c - 1
        tris.append(np.column_stack([a, b, c]))
        tris.append(np.column_stack([a, c, d]))
    tris.append(np.column_stack([np.full(m, last), 1 + jn * k + (k - 1), 1 + j * k + (k - 1)]))
    return np.concatenate(tris).astype(np.int64)


def _revolve(rings: np.ndarray, m: int) -> np.ndarray:
    """Place ring j's copy of the arc in the half-space at angle 2 pi j / m."""
    n_arc = rings.shape[1]
    theta = 2 * np.pi * np.arange(m) / m
    c, s = np.cos(theta), np.sin(theta)
    inner = rings[:, 1:-1]
    V = np.empty((m, n_arc - 2, 4))
    V[..., 0] = inner[..., 0]
    V[..., 1] = inner[..., 1]
    V[..., 2] = inner[..., 2] * c[:, None]
    V[..., 3] = inner[..., 2] * s[:, None]
    a, b = rings[0, 0], rings[0, -1]
    return np.vstack([[a[0], a[1], 0.0, 0.0], V.reshape(-1, 4), [b[0], b[1], 0.0, 0.0]])


def _check_m(m: int, n: int = 0):
    if m < 8 or m % max(n, 1) != 0:
        raise ValueError(f"angular samples m={m} must be >= 8 and a multiple of max(n, 1)={max(n, 1)}")


def spin(arc: PolylineArc, m: int = 48, tol: float = 1e-9) -> Surface4:
    _check_m(m)
    rep = validate_arc(arc, tol * bbox_diagonal(arc.vertices))
    if not rep.ok:
        raise ValueError(f"invalid arc: {sorted(rep.kinds())}")
    rings = np.broadcast_to(arc.vertices, (m,) + arc.vertices.shape)
    return Surface4(_revolve(rings, m), _triangulate(len(arc), m),
                    {"n": 0, "m": m, "arc_vertices": len(arc)})


def twist_rings(arc: PolylineArc, ball: TwistBall, n: int, m: int, tol: float = 1e-9) -> np.ndarray:
    """Copy of the arc for each ring with the ball interior rotated by n * theta_j."""
    v = arc.vertices
    inside = np.linalg.norm(v - ball.center, axis=1) < ball.radius - tol * max(1.0, ball.radius)
    rings = np.repeat(v[None], m, axis=0)
    for j in range(m):
        # reduce n*j mod m first so rings with equal twist get identical floats
        R = axis_rotation(ball.axis, 2 * np.pi * ((n * j) % m) / m)
        rings[j, inside] = ball.center + (v[inside] - ball.center) @ R.T
    return rings


def twist_spin(arc: PolylineArc, ball: TwistBall, n: int, m: int = 48, tol: float = 1e-9) -> Surface4:
    if n < 0:
        raise ValueError("twist count must be >= 0")
    _check_m(m, n)
    if n == 0:
        return spin(arc, m, tol)
    rep = validate_arc(arc, tol * bbox_diagonal(arc.vertices))
    if not rep.ok:
        raise ValueError(f"invalid arc: {sorted(rep.kinds())}")
    problems = check_ball(arc, ball, tol)
    if problems:
        raise ValueError(f"inadmissible ball: {problems}")
    arc = insert_ball_crossings(arc, ball, tol)
    rings = twist_rings(arc, ball, n, m, tol)
    return Surface4(_revolve(rings, m), _triangulate(len(arc), m),
                    {"n": n, "m": m, "arc_vertices": len(arc)})


def euler_characteristic(surface: Surface4) -> int:
    """V - E + F of a closed edge-manifold; raises TopologyError otherwise."""
    t = surface.triangles
    nv = len(surface.vertices)
    if t.size and (t.min() < 0 or t.max() >= nv):
        raise TopologyError("triangle index out of range")
    if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
        raise TopologyError("degenerate triangle")
    if len(np.unique(t)) != nv:
        raise TopologyError("unreferenced vertices")
    edges, counts = surface.edges()
    bad = counts != 2
    if bad.any():
        e = edges[bad][0]
        raise TopologyError(f"edge ({e[0]}, {e[1]}) lies on {counts[bad][0]} triangles")
    return int(nv - len(edges) + len(t))


def is_consistently_oriented(surface: Surface4) -> bool:
    """Every directed edge occurs once: the stored winding is coherent."""
    t = surface.triangles
    d = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    return len(np.unique(d, axis=0)) == len(d)


def is_orientable(surface: Surface4) -> bool:
    """Whether some choice of per-triangle winding is coherent (BFS flip)."""
    t = surface.triangles
    owners: dict = {}
    for f, tri in enumerate(t):
        for k in range(3):
            a, b = int(tri[k]), int(tri[(k + 1) % 3])
            owners.setdefault((min(a, b), max(a, b)), []).append((f, a < b))
    flip = np.full(len(t), -1)
    for seed in range(len(t)):
        if flip[seed] >= 0:
            continue
        flip[seed] = 0
        queue = deque([seed])
        while queue:
            f = queue.popleft()
            tri = t[f]
            for k in range(3):
                a, b = int(tri[k]), int(tri[(k + 1) % 3])
                fwd = (a < b) != bool(flip[f])
                for g, g_fwd in owners[(min(a, b), max(a, b))]:
                    if g == f:
                        continue
                    # neighbour must traverse the edge the other way
                    want = int(g_fwd == fwd)
                    if flip[g] < 0:
                        flip[g] = want
                        queue.append(g)
                    elif flip[g] != want:
                        return False
    return True


def check_rotational_symmetry(surface: Surface4, order: int, tol: float = SYMMETRY_TOL) -> SymmetryReport:
    """Rotate by 2 pi / order in the (u, v) plane and measure the mismatch."""
    if order < 1:
        raise ValueError("order must be >= 1")
    V = surface.vertices
    scale = surface.scale
    W = V.copy()
    W[:, 2:] = V[:, 2:] @ plane_rotation(2 * np.pi / order).T
    tree = cKDTree(V)
    d0, idx = tree.query(W)
    exact = bool(d0.max() <= tol * scale and len(np.unique(idx)) == len(V))
    if exact:
        return SymmetryReport(order, float(d0.max()), True)
    # distance to the surface, not just to its vertices
    T = V[surface.triangles]
    cent = T.mean(1)
    reach = np.linalg.norm(T - cent[:, None], axis=2).max()
    ctree = cKDTree(cent)
    dev = np.empty(len(W))
    for k, (p, r) in enumerate(zip(W, d0)):
        cand = ctree.query_ball_point(p, r + reach)
        if not cand:
            dev[k] = r
            continue
        dev[k] = min(r, point_triangle_distance(np.repeat(p[None], len(cand), 0), T[cand]).min())
    return SymmetryReport(order, float(dev.max()), False)


def _candidate_pairs(surface: Surface4, exhaustive: bool):
    T = surface.vertices[surface.triangles]
    lo, hi = T.min(1), T.max(1)
    pad = 1e-12 * surface.scale
    pairs = kernels.box_pairs_exhaustive(lo, hi, pad) if exhaustive else kernels.box_pairs(lo, hi, pad)
    tri = surface.triangles
    if len(pairs):
        share = (tri[pairs[:, 0]][:, :, None] == tri[pairs[:, 1]][:, None, :]).any((1, 2))
        pairs = pairs[~share]
    return pairs


def intersecting_pairs(surface: Surface4, exhaustive: bool = False, chunk: int = 200_000):
    """Non-adjacent triangle pairs that meet in R^4.

    Returns (hits, inconclusive) as index-pair arrays. ``exhaustive``
    skips the sweep and tests every pair whose boxes overlap by brute
    force; both routes share the same exact predicate.
    """
    pairs = _candidate_pairs(surface, exhaustive)
    V = surface.vertices
    tri = surface.triangles
    status = np.zeros(len(pairs), dtype=np.int8)
    tol = 1e-10
    for s in range(0, len(pairs), chunk):
        p = pairs[s:s + chunk]
        status[s:s + chunk] = kernels.tri_tri_4d(V[tri[p[:, 0]]], V[tri[p[:, 1]]], tol)
    return pairs[status == 1], pairs[status == 2]


def all_pairs_intersecting(surface: Surface4) -> np.ndarray:
    """Brute-force reference over every non-adjacent pair, no box filter."""
    V = surface.vertices
    tri = surface.triangles
    F = len(tri)
    hits = []
    for i in range(F - 1):
        js = np.arange(i + 1, F)
        share = (tri[js][:, :, None] == tri[i][None, None, :]).any((1, 2))
        js = js[~share]
        if len(js) == 0:
            continue
        st = kernels.tri_tri_4d(np.repeat(V[tri[i]][None], len(js), 0), V[tri[js]], 1e-10)
        hits.extend((i, int(j)) for j in js[st != 0])
    return np.array(hits, dtype=np.int64).reshape(-1, 2)


def is_embedded(surface: Surface4) -> bool:
    hits, unsure = intersecting_pairs(surface)
    return len(hits) == 0 and len(unsure) == 0


def audit(surface: Surface4, embedded: bool = True) -> dict:
    """Topology summary used by the CLI and tests."""
    out = {"vertices": len(surface.vertices), "triangles": len(surface.triangles)}
    try:
        out["euler_characteristic"] = euler_characteristic(surface)
        out["edges"] = int(len(surface.edges()[0]))
        out["closed"] = True
    except TopologyError as exc:
        out["euler_characteristic"] = None
        out["error"] = str(exc)
        out["closed"] = False
    out["orientable"] = is_orientable(surface)
    out["consistently_oriented"] = is_consistently_oriented(surface)
    if embedded:
        hits, unsure = intersecting_pairs(surface)
        out["intersecting_pairs"] = int(len(hits))
        out["inconclusive_pairs"] = int(len(unsure))
        out["embedded"] = len(hits) == 0 and len(unsure) == 0
    return out


def torus_of_revolution(R: float = 2.0, r: float = 0.5, m: int = 16, k: int = 8) -> Surface4:
    """Torus in the (x, y, u) subspace; a non-sphere fixture (chi = 0)."""
    a = 2 * np.pi * np.arange(m) / m
    b = 2 * np.pi * np.arange(k) / k
    A, B = np.meshgrid(a, b, indexing="ij")
    rad = R + r * np.cos(B)
    V = np.column_stack([(rad * np.cos(A)).ravel(), (rad * np.sin(A)).ravel(), (r * np.sin(B)).ravel(),
                         np.zeros(m * k)])
    i, j = np.meshgrid(np.arange(m), np.arange(k), indexing="ij")
    i, j = i.ravel(), j.ravel()
    p = i * k + j
    q = ((i + 1) % m) * k + j
    s = ((i + 1) % m) * k + (j + 1) % k
    t = i * k + (j + 1) % k
    tris = np.vstack([np.column_stack([p, q, s]), np.column_stack([p, s, t])])
    return Surface4(V, tris, {"fixture": "torus"})
