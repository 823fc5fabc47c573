"""Properly embedded PL arcs in the upper half-space and the twist ball."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import point_segment_distance, segment_distance

# ball used by the trefoil fixture, in units of ``scale``
TREFOIL_CENTER = np.array([0.0, 0.0, 3.0])
TREFOIL_RADIUS = 2.4


@dataclass
class PolylineArc:
    vertices: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)

    def __len__(self):
        return len(self.vertices)

    @property
    def segments(self):
        return self.vertices[:-1], self.vertices[1:]

    def scaled(self, s: float) -> "PolylineArc":
        return PolylineArc(self.vertices * s)

    def to_dict(self) -> dict:
        return {"vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PolylineArc":
        return cls(np.array(d["vertices"], dtype=float))


@dataclass
class TwistBall:
    center: np.ndarray
    radius: float
    axis: np.ndarray

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.axis = np.asarray(self.axis, dtype=float)
        self.axis = self.axis / np.linalg.norm(self.axis)
        self.radius = float(self.radius)

    @property
    def poles(self):
        """The two points where the axis meets the boundary sphere."""
        return self.center - self.radius * self.axis, self.center + self.radius * self.axis

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "radius": self.radius, "axis": self.axis.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "TwistBall":
        return cls(d["center"], d["radius"], d["axis"])


@dataclass
class Violation:
    kind: str
    indices: tuple
    gap: float = 0.0

    def to_dict(self):
        return {"kind": self.kind, "indices": list(self.indices), "gap": self.gap}


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}


def _braid_strands(y):
    phi = 1.5 * np.pi * (y + 1.0)
    g = 0.07 * np.sin(1.3 * y + 0.5)
    z_a = -0.5 * np.cos(phi)
    x_a = 0.45 * np.sin(phi) + g
    # the offset keeps the strand ends apart when the braid is seen edge-on
    return (x_a, z_a), (-0.45 * np.sin(phi) + g + 0.04, -z_a)


def _stadium(s):
    """Return arc closing the braid, parametrized by s in (0, 1) of arc length."""
    r = 0.5
    half = np.pi * r
    total = 2 * half + 2.0
    ell = np.asarray(s) * total
    y = np.empty_like(ell)
    z = np.empty_like(ell)
    a = ell < half
    alpha = ell[a] / r
    y[a] = 1.0 + r * np.sin(alpha)
    z[a] = 1.0 - r * np.cos(alpha)
    b = (ell >= half) & (ell < half + 2.0)
    yy = 1.0 - (ell[b] - half)
    y[b] = yy
    z[b] = 1.5 + 0.15 * (1.0 - yy**2)
    c = ell >= half + 2.0
    alpha = (ell[c] - half - 2.0) / r
    y[c] = -1.0 - r * np.sin(alpha)
    z[c] = 1.0 + r * np.cos(alpha)
    return y, z


def _projected_crossings(arc: PolylineArc, drop: int = 0):
    """Crossings of the arc's planar projection, ordered along the arc.

    Returns a list of (segment_i, segment_j, over_is_i) and the count of
    degenerate contacts. Over is decided by the dropped coordinate.
    """
    keep = [c for c in range(3) if c != drop]
    v = arc.vertices
    a0, a1 = v[:-1], v[1:]
    lo = np.minimum(a0, a1)[:, keep]
    hi = np.maximum(a0, a1)[:, keep]
    pairs = kernels.box_pairs(lo, hi, pad=1e-12)
    pairs = pairs[pairs[:, 1] - pairs[:, 0] > 1]
    if len(pairs) == 0:
        return [], 0
    i, j = pairs[:, 0], pairs[:, 1]
    st, s, t = kernels.seg_seg_2d(a0[i][:, keep], a1[i][:, keep], a0[j][:, keep], a1[j][:, keep], 1e-12)
    out = []
    for k in np.nonzero(st == 1)[0]:
        hi_ = a0[i[k], drop] + s[k] * (a1[i[k], drop] - a0[i[k], drop])
        hj = a0[j[k], drop] + t[k] * (a1[j[k], drop] - a0[j[k], drop])
        out.append((int(i[k]), int(j[k]), bool(hi_ > hj), float(s[k]), float(t[k])))
    return out, int((st == 2).sum())


def crossing_sequence(arc: PolylineArc, drop: int = 0) -> list[str]:
    """Over/under letters met while walking the arc's projection."""
    crossings, _ = _projected_crossings(arc, drop)
    events = []
    for i, j, over_i, s, t in crossings:
        events.append((i + s, "O" if over_i else "U"))
        events.append((j + t, "U" if over_i else "O"))
    return [e[1] for e in sorted(events)]


def make_trefoil_arc(scale: float = 1.0, samples: int = 60) -> PolylineArc:
    """Long trefoil: a three-crossing two-strand braid closed by an arch.

    The knotted part sits inside the ball of radius 2.4 centred at
    (0, 0, 3); the arc enters and leaves the ball at the ball's poles on
    the y axis, then drops straight to the boundary plane.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    if samples < 24:
        raise ValueError(f"insufficient resolution: samples={samples} < 24")
    free = samples - 4
    nb = max(6, int(round(0.3 * free)))
    nb -= nb % 2  # even count keeps y' = 0 off the sample grid
    ns = free - 2 * nb
    y = np.linspace(-1.0, 1.0, nb)
    (xa, za), (xb, zb) = _braid_strands(y)
    s = (np.arange(ns) + 1.0) / (ns + 1.0)
    ys, zs = _stadium(s)
    xs = (1 - s) * xa[-1] + s * xb[0] + 0.3 * np.sin(np.pi * s) * np.cos(2.0 * s)
    c = TREFOIL_CENTER
    r = TREFOIL_RADIUS
    pts = [
        [0.0, -1.5 * r, 0.0],
        [0.0, -r, c[2]],
        *np.column_stack([xa, y, za + c[2]]),
        *np.column_stack([xs, ys, zs + c[2]]),
        *np.column_stack([xb, y, zb + c[2]]),
        [0.0, r, c[2]],
        [0.0, 1.5 * r, 0.0],
    ]
    arc = PolylineArc(np.array(pts) * scale)
    seq = crossing_sequence(arc, drop=0)
    if len(seq) != 6 or any(seq[k] == seq[k + 1] for k in range(5)):
        raise ValueError(f"insufficient resolution: projection pattern {''.join(seq)}")
    return arc


def make_unknotted_arc(scale: float = 1.0, samples: int = 16) -> PolylineArc:
    """Semicircle of radius ``scale`` in the xz plane."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    if samples < 4:
        raise ValueError("an arc needs at least 4 vertices")
    phi = np.pi * np.arange(samples) / (samples - 1)
    v = np.column_stack([-np.cos(phi), np.zeros(samples), np.sin(phi)]) * scale
    v[0] = [-scale, 0.0, 0.0]
    v[-1] = [scale, 0.0, 0.0]
    return PolylineArc(v)


def validate_arc(arc: PolylineArc, tolerance: float = 1e-9) -> ValidationReport:
    v = arc.vertices
    rep = ValidationReport()
    n = len(v)
    if n < 4:
        rep.violations.append(Violation("too few vertices", (n,)))
        if n < 2:
            return rep
    for k in (0, n - 1):
        if abs(v[k, 2]) > tolerance:
            rep.violations.append(Violation("endpoint off boundary", (k,), float(abs(v[k, 2]))))
    for k in range(1, n - 1):
        if v[k, 2] <= tolerance:
            rep.violations.append(Violation("interior touches boundary", (k,), float(v[k, 2])))
    a0, a1 = v[:-1], v[1:]
    seg_len = np.linalg.norm(a1 - a0, axis=1)
    for k in np.nonzero(seg_len <= tolerance)[0]:
        rep.violations.append(Violation("degenerate segment", (int(k),), float(seg_len[k])))
    # adjacent segments: the far end of one must stay off the other
    if n >= 3:
        d1 = point_segment_distance(v[2:], a0[:-1], a1[:-1])
        d2 = point_segment_distance(v[:-2], a0[1:], a1[1:])
        for k in np.nonzero(np.minimum(d1, d2) <= tolerance)[0]:
            rep.violations.append(Violation("fold", (int(k), int(k + 1)), float(min(d1[k], d2[k]))))
    pairs = kernels.box_pairs(np.minimum(a0, a1), np.maximum(a0, a1), pad=tolerance)
    pairs = pairs[pairs[:, 1] - pairs[:, 0] > 1]
    if len(pairs):
        d = segment_distance(a0[pairs[:, 0]], a1[pairs[:, 0]], a0[pairs[:, 1]], a1[pairs[:, 1]])
        for (i, j), g in zip(pairs[d <= tolerance], d[d <= tolerance]):
            rep.violations.append(Violation("self-intersection", (int(i), int(j)), float(g)))
    return rep


def _ball_admissible(v, center, radius, lo, hi, tol):
    """Vertices strictly between ``lo`` and ``hi`` inside, everything else outside.

    ``v[lo]`` and ``v[hi]`` are the diameter endpoints. Chords between
    inside points stay inside by convexity, and a segment leaving a
    boundary point outward never comes back, so checking the remaining
    segments' distance to the center is enough.
    """
    if center[2] <= radius + tol or hi - lo < 2:
        return False
    d = np.linalg.norm(v - center, axis=1)
    if np.any(d[lo + 1:hi] >= radius - tol):
        return False
    if np.any(d[:lo] <= radius + tol) or np.any(d[hi + 1:] <= radius + tol):
        return False
    for pole, far in ((lo, lo - 1), (hi, hi + 1)):
        if np.dot(v[far] - v[pole], v[pole] - center) <= 0:
            return False
    rest = np.r_[0:lo - 1, hi + 1:len(v) - 1]
    if len(rest):
        ds = point_segment_distance(center[None, :], v[rest], v[rest + 1])
        if np.any(ds <= radius + tol):
            return False
    return True


def _required_range(arc: PolylineArc):
    crossings, _ = _projected_crossings(arc, 0)
    if crossings:
        idx = [k for c in crossings for k in (c[0], c[0] + 1, c[1], c[1] + 1)]
        return min(idx), max(idx)
    k = int(np.argmax(arc.vertices[:, 2]))
    return k, k


def default_twist_ball(arc: PolylineArc, max_refine: int = 3, tol: float = 1e-9) -> TwistBall:
    """Smallest ball with two arc vertices as diameter that isolates the knotted part.

    The diameter endpoints become the poles where the arc crosses the
    boundary, so they are on the axis by construction. If no vertex pair
    works the arc is subdivided (at most ``max_refine`` times).
    """
    rep = validate_arc(arc, tol)
    if not rep.ok:
        raise ValueError(f"invalid arc: {sorted(rep.kinds())}")
    v = arc.vertices
    for _ in range(max_refine + 1):
        i0, i1 = _required_range(PolylineArc(v))
        cands = sorted(
            (np.linalg.norm(v[b] - v[a]) / 2, a, b)
            for a in range(1, i0)
            for b in range(i1 + 1, len(v) - 1)
        )
        for r, a, b in cands:
            c = (v[a] + v[b]) / 2
            if _ball_admissible(v, c, r, a, b, tol * max(1.0, r)):
                return TwistBall(c, r, (v[b] - v[a]) / (2 * r))
        mids = (v[:-1] + v[1:]) / 2
        w = np.empty((2 * len(v) - 1, 3))
        w[0::2] = v
        w[1::2] = mids
        v = w
    raise ValueError("no admissible ball for this arc")


def insert_ball_crossings(arc: PolylineArc, ball: TwistBall, tol: float = 1e-9) -> PolylineArc:
    """Add vertices where the arc meets the ball's boundary, snapped to the poles."""
    v = arc.vertices
    poles = ball.poles
    out = [v[0]]
    for a, b in zip(v[:-1], v[1:]):
        d = b - a
        f = a - ball.center
        A = d @ d
        B = 2 * f @ d
        C = f @ f - ball.radius**2
        disc = B * B - 4 * A * C
        if disc > 0:
            sq = np.sqrt(disc)
            for t in sorted(((-B - sq) / (2 * A), (-B + sq) / (2 * A))):
                if tol < t < 1 - tol:
                    p = a + t * d
                    near = [q for q in poles if np.linalg.norm(q - p) <= 1e-6 * ball.radius]
                    if not near:
                        raise ValueError("arc meets the ball boundary off the axis")
                    out.append(near[0])
        out.append(b)
    return PolylineArc(np.array(out))


def check_ball(arc: PolylineArc, ball: TwistBall, tol: float = 1e-9) -> list[str]:
    """Problems with ``ball`` as a twist ball for ``arc``; empty when admissible."""
    problems = []
    if ball.center[2] <= ball.radius:
        problems.append("ball leaves the upper half-space")
    v = arc.vertices
    if not problems:
        try:
            v = insert_ball_crossings(arc, ball, tol).vertices
        except ValueError as exc:
            return problems + [str(exc)]
    d = np.linalg.norm(v - ball.center, axis=1)
    on = np.nonzero(np.abs(d - ball.radius) <= tol * max(1.0, ball.radius))[0]
    if len(on) != 2:
        problems.append(f"arc meets the boundary {len(on)} times")
    else:
        for k in on:
            off = np.linalg.norm(np.cross(v[k] - ball.center, ball.axis))
            if off > tol * max(1.0, ball.radius):
                problems.append("boundary point off the axis")
        inside = d < ball.radius - tol
        if inside[: on[0]].any() or inside[on[1] + 1:].any():
            problems.append("arc re-enters the ball")
    return problems
