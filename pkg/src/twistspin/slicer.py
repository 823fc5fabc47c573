"""Motion pictures: slice a surface in R^4, or its 3D diagram, by a family
of hyperplanes, and classify the critical events in between."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .config import FAMILIES, Tolerances
from .geometry import edge_table, random_rotation
from .spin import Surface4

# slice coordinates kept from (x, y, u, v) for each family
_COLUMNS = {"vertical": (0, 1, 2), "horizontal": (0, 2, 3)}
_COORDS = {"vertical": "xyu", "horizontal": "xuv", "radial": "ryh"}
_HEIGHT = {"vertical": 3, "horizontal": 1}
KINDS = ("minimum", "maximum", "saddle")


@dataclass
class Frame:
    parameter: float
    curves: list = field(default_factory=list)  # closed (k, 3) polylines, last point joins the first
    breaks: list = field(default_factory=list)  # under-crossing points
    nudged: bool = False
    coords: str = "xyu"

    @property
    def component_count(self) -> int:
        return len(self.curves)

    def to_dict(self) -> dict:
        return {
            "t": float(self.parameter),
            "curves": [np.asarray(c).tolist() for c in self.curves],
            "breaks": [list(map(float, b)) for b in self.breaks],
            "nudged": bool(self.nudged),
            "coords": self.coords,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Frame":
        return cls(
            float(d["t"]),
            [np.array(c, dtype=float).reshape(-1, 3) for c in d["curves"]],
            [list(map(float, b)) for b in d.get("breaks", [])],
            bool(d.get("nudged", False)),
            d.get("coords", "xyu"),
        )


@dataclass
class CriticalEvent:
    value: float
    kind: str
    location: np.ndarray
    multiplicity: int = 1
    degenerate_set: np.ndarray | None = None
    vertex: int = -1

    def to_dict(self) -> dict:
        d = {
            "t": float(self.value),
            "kind": self.kind,
            "location": np.asarray(self.location, dtype=float).tolist(),
            "multiplicity": int(self.multiplicity),
            "vertex": int(self.vertex),
        }
        if self.degenerate_set is not None:
            d["degenerate_set"] = np.asarray(self.degenerate_set).tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CriticalEvent":
        ds = d.get("degenerate_set")
        return cls(float(d["t"]), d["kind"], np.array(d["location"], dtype=float), int(d.get("multiplicity", 1)),
                   None if ds is None else np.array(ds, dtype=float).reshape(-1, 3), int(d.get("vertex", -1)))


@dataclass
class MotionPicture:
    family: str
    frames: list
    events: list = field(default_factory=list)
    source: str = ""
    singular_values: list = field(default_factory=list)  # radial: angles of triple and branch points

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        t = [f.parameter for f in self.frames]
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("frame parameters must be strictly increasing")

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "source": self.source,
            "frames": [f.to_dict() for f in self.frames],
            "events": [e.to_dict() for e in self.events],
            "singular_values": [float(a) for a in self.singular_values],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MotionPicture":
        return cls(
            d["family"],
            [Frame.from_dict(f) for f in d["frames"]],
            [CriticalEvent.from_dict(e) for e in d.get("events", [])],
            d.get("source", ""),
            [float(a) for a in d.get("singular_values", [])],
        )


@dataclass
class NormalFormReport:
    ok: bool
    condition_results: dict

    def to_dict(self) -> dict:
        return {"ok": self.ok, "condition_results": dict(self.condition_results)}


# ------------------------------------------------------------ level sets

def _level_cycles(triangles, f, t, tri_edge, n_edges):
    """Closed chains of crossing edge ids of the level set {f = t}.

    Vertices with f >= t count as above, so every triangle with mixed
    sides contributes exactly one segment between its two mixed edges.
    """
    above = f[triangles] >= t
    mixed = above.any(1) & ~above.all(1)
    if not mixed.any():
        return []
    a = above[mixed]
    side_mixed = a != np.roll(a, -1, axis=1)  # edge k runs from vertex k to k+1
    ids = tri_edge[mixed][side_mixed].reshape(-1, 2)
    adj = [[] for _ in range(n_edges)]
    for p, q in ids.tolist():
        adj[p].append(q)
        adj[q].append(p)
    seen = np.zeros(n_edges, dtype=bool)
    cycles = []
    for start in np.unique(ids).tolist():
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        prev, cur = -1, start
        nxt = min(adj[start])
        while not seen[nxt]:
            seen[nxt] = True
            cyc.append(nxt)
            prev, cur = cur, nxt
            options = [e for e in adj[cur] if e != prev] or adj[cur]
            nxt = options[0]
        cycles.append(cyc)
    return cycles


def _edge_points(V, f, t, keys, n_vertices, ids):
    ids = np.asarray(ids)
    lo = keys[ids] // n_vertices
    hi = keys[ids] % n_vertices
    den = f[hi] - f[lo]
    s = np.where(den != 0, (t - f[lo]) / np.where(den != 0, den, 1.0), 0.0)
    return V[lo] + s[:, None] * (V[hi] - V[lo]), lo, hi, s


def _dedupe(P, tol):
    if len(P) < 2:
        return P
    keep = np.ones(len(P), dtype=bool)
    keep[1:] = np.linalg.norm(np.diff(P, axis=0), axis=1) > tol
    P = P[keep]
    if len(P) > 1 and np.linalg.norm(P[-1] - P[0]) <= tol:
        P = P[:-1]
    return P


def _nudge(f, t, near, step, flagged=False, limit=20):
    for _ in range(limit):
        if not np.any(np.abs(f - t) <= near):
            return t, flagged
        t += step
        flagged = True
    raise RuntimeError("could not move the slicing parameter off the vertices")


def default_grid(lo: float, hi: float, count: int = 41, pad: float = 0.05) -> np.ndarray:
    span = hi - lo
    return np.linspace(lo - pad * span, hi + pad * span, count)


def _slice_parallel(surface: Surface4, family: str, frame_values, tol: Tolerances) -> MotionPicture:
    V = surface.vertices
    tri = surface.triangles
    scale = surface.scale
    f = V[:, _HEIGHT[family]]
    if frame_values is None:
        frame_values = default_grid(f.min(), f.max())
    tri_edge, keys = edge_table(tri, len(V))
    cols = list(_COLUMNS[family])
    near = tol.stitch * scale
    frames = []
    for t0 in frame_values:
        t, flagged = _nudge(f, float(t0), near, tol.nudge * scale)
        curves = []
        for cyc in _level_cycles(tri, f, t, tri_edge, len(keys)):
            P, _, _, _ = _edge_points(V, f, t, keys, len(V), cyc)
            P = _dedupe(P[:, cols], 1e-12 * scale)
            if len(P) >= 3:
                curves.append(P)
        frames.append(Frame(float(t0), curves, [], flagged, _COORDS[family]))
    events = detect_events(surface, family, tilt=0.0, tol=tol)
    return MotionPicture(family, frames, events, source=f"surface:{family}")


def slice_vertical(surface: Surface4, frame_values=None, tol: Tolerances | None = None) -> MotionPicture:
    """Frames {v = t} in (x, y, u) coordinates.

    A value within the stitching tolerance of a vertex height is moved up
    by ``tol.nudge`` (scale-relative) and the frame is flagged; the
    recorded parameter stays the requested one.
    """
    return _slice_parallel(surface, "vertical", frame_values, tol or Tolerances())


def slice_horizontal(surface: Surface4, frame_values=None, tol: Tolerances | None = None) -> MotionPicture:
    """Frames {y = t} in (x, u, v) coordinates."""
    return _slice_parallel(surface, "horizontal", frame_values, tol or Tolerances())


def default_angles(count: int = 32) -> np.ndarray:
    # the offset keeps the samples off the spin rings of any m dividing 96
    return 2 * np.pi * (np.arange(count) + 0.37) / count


def slice_radial(diagram, angles=None, tol: Tolerances | None = None, with_breaks: bool = True) -> MotionPicture:
    """Cross-sections of a drop-x diagram by half-planes through the y axis.

    Image coordinates of a drop-x diagram are (y, u, v), and the (u, v)
    spin rotation turns about the y axis. Each frame holds the slice by
    the closed half-plane at angle theta in (r, y, height) coordinates;
    arcs that end on the axis are closed along it. Break marks are the
    under-crossing points of the frame seen along the height axis, which
    is where the half-plane meets removed under-bands of the broken
    diagram.
    """
    from .diagram import compute_singularity_set
    from .links import DiagramError, planar_project_frame

    tol = tol or diagram.tol
    d = np.asarray(diagram.projection_direction, dtype=float)
    if abs(abs(d[0]) - 1.0) > 1e-6:
        raise ValueError("radial slicing needs a diagram projected along x")
    if angles is None:
        angles = default_angles()
    angles = np.asarray(angles, dtype=float)
    V = diagram.vertices
    H = diagram.height
    tri = diagram.triangles
    scale = diagram.scale
    axis_tol = tol.stitch * scale
    rad = np.hypot(V[:, 1], V[:, 2])
    on_axis = rad <= axis_tol
    tri_edge, keys = edge_table(tri, len(V))
    sing = compute_singularity_set(diagram)
    marks = [tp.point for tp in sing.triple_points] + [bp.point for bp in sing.branch_points]
    marks = np.array(marks).reshape(-1, 3)
    singular = sorted(float(np.arctan2(p[2], p[1]) % (2 * np.pi)) for p in marks)
    frames = []
    for theta0 in angles:
        theta = float(theta0)
        flagged = False
        for _ in range(20):
            c, s = np.cos(theta), np.sin(theta)
            fv = -V[:, 1] * s + V[:, 2] * c
            fm = -marks[:, 1] * s + marks[:, 2] * c
            rm = marks[:, 1] * c + marks[:, 2] * s
            hit_v = np.any((np.abs(fv) <= axis_tol) & ~on_axis)
            hit_m = np.any((np.abs(fm) <= axis_tol) & (rm > 0))
            if not (hit_v or hit_m):
                break
            theta += tol.nudge
            flagged = True
        else:
            raise RuntimeError("could not move the half-plane off the singular points")
        fv = np.where(on_axis, 0.0, fv)
        curves = []
        for cyc in _level_cycles(tri, fv, 0.0, tri_edge, len(keys)):
            P, lo, hi, w = _edge_points(V, fv, 0.0, keys, len(V), cyc)
            h = H[lo] + w * (H[hi] - H[lo])
            r = P[:, 1] * c + P[:, 2] * s
            Q = np.column_stack([r, P[:, 0], h])
            ax = np.abs(r) <= axis_tol
            for piece in _half_plane_pieces(Q, ax, axis_tol):
                piece = _dedupe(piece, 1e-12 * scale)
                if len(piece) >= 3:
                    curves.append(piece)
        frame = Frame(float(theta0), curves, [], flagged, "ryh")
        if with_breaks and curves:
            try:
                frame.breaks = planar_project_frame(frame).under_points.tolist()
            except DiagramError:
                frame.nudged = True
        frames.append(frame)
    return MotionPicture("radial", frames, [], source="diagram:radial", singular_values=singular)


def _half_plane_pieces(Q, on_axis, tol):
    """Parts of a closed level curve with r > 0, each closed along the axis."""
    if not on_axis.any():
        return [Q] if Q[:, 0].max() > 0 else []
    n = len(Q)
    first = int(np.nonzero(on_axis)[0][0])
    order = np.roll(np.arange(n), -first)
    pieces = []
    cur = [order[0]]
    for k in order[1:].tolist() + [order[0]]:
        cur.append(k)
        if on_axis[k]:
            inner = [i for i in cur if not on_axis[i]]
            if inner and Q[inner, 0].max() > tol:
                pieces.append(Q[[cur[0]] + inner + [k]])
            cur = [k]
    return pieces


# ---------------------------------------------------------------- events

def height_direction(family: str, tilt: float = 0.0, seed: int = 0) -> np.ndarray:
    d = np.zeros(4)
    d[_HEIGHT[family]] = 1.0
    if tilt > 0:
        d = random_rotation(4, np.random.default_rng(seed), tilt) @ d
    return d


def detect_events(surface: Surface4, family: str, tilt: float = 0.0, seed: int = 0,
                  tol: Tolerances | None = None) -> list[CriticalEvent]:
    """PL Morse critical points of the height along the slicing direction.

    Ties are broken by vertex index. A vertex whose lower link is empty
    is a minimum, one whose upper link is empty a maximum, and a lower
    link with c >= 2 components is a saddle of multiplicity c - 1.
    """
    if family not in _HEIGHT:
        raise ValueError("events are defined for the vertical and horizontal families")
    tol = tol or Tolerances()
    V = surface.vertices
    tri = surface.triangles
    n = len(V)
    h = V @ height_direction(family, tilt, seed)
    rank = np.empty(n, dtype=np.int64)
    rank[np.lexsort((np.arange(n), h))] = np.arange(n)
    edges, _ = surface.edges()
    a, b = edges[:, 0], edges[:, 1]
    deg = np.bincount(a, minlength=n) + np.bincount(b, minlength=n)
    lower = np.bincount(b, weights=rank[a] < rank[b], minlength=n) + np.bincount(a, weights=rank[b] < rank[a], minlength=n)
    mixed = np.zeros(n)
    for k in range(3):
        v, p, q = tri[:, k], tri[:, (k + 1) % 3], tri[:, (k + 2) % 3]
        mixed += np.bincount(v, weights=(rank[p] < rank[v]) != (rank[q] < rank[v]), minlength=n)
    comps = (mixed // 2).astype(int)
    cols = list(_COLUMNS[family])
    flat_label = None
    if tilt == 0:
        flat = np.abs(h[a] - h[b]) <= tol.symmetry * surface.scale
        g = coo_matrix((np.ones(flat.sum()), (a[flat], b[flat])), shape=(n, n))
        _, flat_label = connected_components(g, directed=False)
    events = []
    for i in range(n):
        if lower[i] == 0:
            kind, mult = "minimum", 1
        elif lower[i] == deg[i]:
            kind, mult = "maximum", 1
        elif comps[i] >= 2:
            kind, mult = "saddle", int(comps[i] - 1)
        else:
            continue
        dset = None
        if flat_label is not None:
            members = np.nonzero(flat_label == flat_label[i])[0]
            if len(members) > 1:
                dset = V[members][:, cols]
        events.append(CriticalEvent(float(h[i]), kind, V[i, cols].copy(), mult, dset, i))
    events.sort(key=lambda e: (e.value, e.vertex))
    return events


def morse_counts(events) -> dict:
    out = {k: 0 for k in KINDS}
    for e in events:
        out[e.kind] += e.multiplicity if e.kind == "saddle" else 1
    out["balance"] = out["minimum"] + out["maximum"] - out["saddle"]
    return out


# ----------------------------------------------------------- normal form

def check_normal_form(mp: MotionPicture, tol: float = 1e-6) -> NormalFormReport:
    """The four normal-form conditions on events and the middle frame."""
    ev = mp.events
    mins = [e.value for e in ev if e.kind == "minimum"]
    maxs = [e.value for e in ev if e.kind == "maximum"]
    sads = [e.value for e in ev if e.kind == "saddle"]
    res = {
        "minima_at_-2": all(abs(v + 2) <= tol for v in mins),
        "maxima_at_2": all(abs(v - 2) <= tol for v in maxs),
        "saddles_at_pm1": all(min(abs(v - 1), abs(v + 1)) <= tol for v in sads),
    }
    if mp.frames:
        mid = min(mp.frames, key=lambda f: (abs(f.parameter), f.parameter))
        res["middle_connected"] = mid.component_count == 1
    else:
        res["middle_connected"] = False
    return NormalFormReport(all(res.values()), res)


def retime(mp: MotionPicture, fn: Callable[[float], float]) -> MotionPicture:
    """Reparametrize by a strictly increasing map of the slicing parameter."""
    frames = [Frame(float(fn(f.parameter)), f.curves, f.breaks, f.nudged, f.coords) for f in mp.frames]
    ts = [f.parameter for f in frames]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("retiming map is not strictly increasing on the frames")
    events = [CriticalEvent(float(fn(e.value)), e.kind, e.location, e.multiplicity, e.degenerate_set, e.vertex)
              for e in mp.events]
    return MotionPicture(mp.family, frames, events, mp.source, list(mp.singular_values))

