"""Generic projections R^4 -> R^3 and the singularity set of the image."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm, qmc

from . import kernels
from .config import DROP_AXES, Tolerances
from .geometry import bbox_diagonal, edge_table, orthonormal_complement, random_rotation
from .spin import Surface4


class GenericityError(RuntimeError):
    pass


class StitchingError(RuntimeError):
    pass


@dataclass
class Records:
    """Raw triangle-pair intersection segments of an immersed surface."""

    pairs: np.ndarray  # (S, 2) triangle ids
    seg: np.ndarray  # (S, 2, 3)
    feat: np.ndarray  # (S, 2) endpoint feature codes
    over: np.ndarray  # (S,) triangle id of the higher sheet
    under: np.ndarray  # (S,)


@dataclass
class ImmersedDiagram3:
    vertices: np.ndarray
    height: np.ndarray
    triangles: np.ndarray
    projection_direction: np.ndarray
    perturbation_seed: int = 0
    tol: Tolerances = field(default_factory=Tolerances)
    degeneracies: list = field(default_factory=list)
    records: Records | None = None
    _sing: "SingularitySet | None" = None

    @property
    def scale(self) -> float:
        return bbox_diagonal(self.vertices)

    @property
    def generic(self) -> bool:
        return not self.degeneracies

    def abs_tol(self) -> Tolerances:
        return self.tol.scaled(self.scale)

    def to_dict(self) -> dict:
        return {
            "vertices": self.vertices.tolist(),
            "height": self.height.tolist(),
            "triangles": self.triangles.tolist(),
            "projection_direction": self.projection_direction.tolist(),
            "perturbation_seed": int(self.perturbation_seed),
            "degeneracies": [str(d.get("kind", d)) if isinstance(d, dict) else str(d) for d in self.degeneracies],
        }

    @classmethod
    def from_dict(cls, d: dict, tol: Tolerances | None = None) -> "ImmersedDiagram3":
        return cls(
            np.array(d["vertices"], dtype=float).reshape(-1, 3),
            np.array(d["height"], dtype=float),
            np.array(d["triangles"], dtype=np.int64).reshape(-1, 3),
            np.array(d["projection_direction"], dtype=float),
            int(d.get("perturbation_seed", 0)),
            tol or Tolerances(),
            list(d.get("degeneracies", [])),
        )

    def height_at(self, tri: int, p) -> float:
        """Dropped coordinate at image point ``p`` on triangle ``tri``."""
        T = self.vertices[self.triangles[tri]]
        h = self.height[self.triangles[tri]]
        bary = _barycentric(T, p)
        return float(bary @ h)


@dataclass
class DoubleCurve:
    points: np.ndarray
    segments: list  # record index per step
    closed: bool
    end_vertices: tuple = ()  # surface vertices at the two open ends


@dataclass
class TriplePoint:
    point: np.ndarray
    sheets: tuple  # triangle ids, top to bottom
    heights: tuple


@dataclass
class BranchPoint:
    point: np.ndarray
    vertex: int


@dataclass
class SingularitySet:
    double_curves: list
    triple_points: list
    branch_points: list
    records: Records
    degeneracies: list = field(default_factory=list)
    nodes: np.ndarray | None = None  # (S, 2) stitched endpoint ids

    def to_dict(self) -> dict:
        return {
            "double_curves": [
                {"points": c.points.tolist(), "closed": c.closed,
                 "pairs": [[int(self.records.over[s]), int(self.records.under[s])] for s in c.segments]}
                for c in self.double_curves
            ],
            "triple_points": [{"point": t.point.tolist(), "sheets": list(t.sheets), "heights": list(t.heights)}
                              for t in self.triple_points],
            "branch_points": [{"point": b.point.tolist(), "vertex": b.vertex} for b in self.branch_points],
        }


def _barycentric(T, p):
    a, b, c = T
    e1, e2, w = b - a, c - a, np.asarray(p) - a
    g = np.array([[e1 @ e1, e1 @ e2], [e1 @ e2, e2 @ e2]])
    s, t = np.linalg.solve(g, [w @ e1, w @ e2])
    return np.array([1 - s - t, s, t])


def _barycentric_many(T, P):
    a = T[:, 0]
    e1 = T[:, 1] - a
    e2 = T[:, 2] - a
    w = P - a
    g11 = (e1 * e1).sum(1)
    g12 = (e1 * e2).sum(1)
    g22 = (e2 * e2).sum(1)
    r1 = (w * e1).sum(1)
    r2 = (w * e2).sum(1)
    det = g11 * g22 - g12 * g12
    # collapsed triangles give nan; intersection_records reports them
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (g22 * r1 - g12 * r2) / det
        t = (g11 * r2 - g12 * r1) / det
        return np.column_stack([1 - s - t, s, t])


def projection_frame(drop_axis: str | None = None, direction=None) -> np.ndarray:
    """4x4 matrix whose first three rows give image coordinates, last row height."""
    if direction is None:
        k = DROP_AXES.index(drop_axis)
        keep = [c for c in range(4) if c != k]
        return np.eye(4)[keep + [k]]
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    return np.vstack([orthonormal_complement(d), d])


def project(surface: Surface4, frame: np.ndarray, seed: int = 0, tol: Tolerances | None = None) -> ImmersedDiagram3:
    W = surface.vertices @ frame.T
    return ImmersedDiagram3(W[:, :3].copy(), W[:, 3].copy(), surface.triangles.copy(), frame[3].copy(), seed,
                            tol or Tolerances())


def candidate_pairs(diagram: ImmersedDiagram3, exhaustive: bool = False) -> np.ndarray:
    """Triangle pairs worth testing: overlapping boxes and at most one shared vertex."""
    T = diagram.vertices[diagram.triangles]
    pad = diagram.abs_tol().intersect
    lo, hi = T.min(1), T.max(1)
    pairs = kernels.box_pairs_exhaustive(lo, hi, pad) if exhaustive else kernels.box_pairs(lo, hi, pad)
    if len(pairs) == 0:
        return pairs
    tri = diagram.triangles
    shared = (tri[pairs[:, 0]][:, :, None] == tri[pairs[:, 1]][:, None, :]).sum((1, 2))
    return pairs[shared <= 1]


def intersection_records(diagram: ImmersedDiagram3, exhaustive: bool = False, chunk: int = 200_000):
    """Run the pair predicate; returns (Records, degeneracies)."""
    tol = diagram.abs_tol()
    pairs = candidate_pairs(diagram, exhaustive)
    V = diagram.vertices
    tri = diagram.triangles
    S = len(pairs)
    status = np.zeros(S, dtype=np.int8)
    seg = np.zeros((S, 2, 3))
    feat = np.zeros((S, 2), dtype=np.int8)
    for s in range(0, S, chunk):
        p = pairs[s:s + chunk]
        status[s:s + chunk], seg[s:s + chunk], feat[s:s + chunk] = kernels.tri_tri_3d(
            V[tri[p[:, 0]]], V[tri[p[:, 1]]], tol.intersect, tol.intersect, tol.transverse_sin)
    degen = []
    T = V[tri]
    area2 = np.linalg.norm(np.cross(T[:, 1] - T[:, 0], T[:, 2] - T[:, 0]), axis=1)
    for f in np.nonzero(area2 <= tol.intersect ** 2)[0]:
        degen.append({"kind": "collapsed triangle", "triangles": [int(f)]})
    for k in np.nonzero(status >= 2)[0]:
        kind = "coplanar overlap" if status[k] == 2 else "non-transverse intersection"
        degen.append({"kind": kind, "triangles": [int(pairs[k, 0]), int(pairs[k, 1])]})
    hit = status == 1
    pairs, seg, feat = pairs[hit], seg[hit], feat[hit]
    over, under = _over_under(diagram, pairs, seg, degen)
    return Records(pairs, seg, feat, over, under), degen


def _over_under(diagram, pairs, seg, degen):
    if len(pairs) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    mid = seg.mean(1)
    tri = diagram.triangles
    V = diagram.vertices
    H = diagram.height
    ha = (_barycentric_many(V[tri[pairs[:, 0]]], mid) * H[tri[pairs[:, 0]]]).sum(1)
    hb = (_barycentric_many(V[tri[pairs[:, 1]]], mid) * H[tri[pairs[:, 1]]]).sum(1)
    gap = np.abs(ha - hb)
    for k in np.nonzero(gap <= diagram.abs_tol().intersect)[0]:
        degen.append({"kind": "sheets meet in 4-space", "triangles": [int(pairs[k, 0]), int(pairs[k, 1])]})
    a_over = ha > hb
    return np.where(a_over, pairs[:, 0], pairs[:, 1]), np.where(a_over, pairs[:, 1], pairs[:, 0])


class _DSU:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, a):
        while self.p[a] != a:
            self.p[a] = self.p[self.p[a]]
            a = self.p[a]
        return a

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            self.p[max(a, b)] = min(a, b)


def _endpoint_keys(diagram, rec: Records):
    tri = diagram.triangles
    tri_edge, _ = edge_table(tri, len(diagram.vertices))
    keys = []
    for s in range(len(rec.pairs)):
        a, b = int(rec.pairs[s, 0]), int(rec.pairs[s, 1])
        for end in range(2):
            c = int(rec.feat[s, end])
            owner, other = (a, b) if c < 6 else (b, a)
            loc = c % 6
            if loc < 3:
                keys.append(("e", int(tri_edge[owner, loc]), other))
            else:
                w = int(tri[owner, loc - 3])
                keys.append(("v", w) if w in tri[other] else ("w", w, other))
    return keys


def _stitch(diagram, rec: Records):
    """Endpoint graph: node id for each (segment, end)."""
    S = len(rec.pairs)
    keys = _endpoint_keys(diagram, rec)
    groups: dict = {}
    for k, key in enumerate(keys):
        groups.setdefault(key, []).append(k)
    dsu = _DSU(2 * S)
    loose = []
    vertex_of = {}
    for key, members in groups.items():
        for k in members[1:]:
            dsu.union(members[0], k)
        if key[0] == "v":
            vertex_of[members[0]] = key[1]
        elif len(members) == 1:
            loose.append(members[0])
    pts = rec.seg.reshape(-1, 3)
    stol = diagram.abs_tol().stitch
    if loose:
        # geometric fallback for incidences the feature keys cannot see
        anchors = loose + list(vertex_of)
        tree = cKDTree(pts[anchors])
        for i, j in tree.query_pairs(stol):
            dsu.union(anchors[i], anchors[j])
        for k in loose:
            root = dsu.find(k)
            if sum(1 for q in anchors if dsu.find(q) == root) < 2:
                raise StitchingError(
                    f"stitching failure: endpoint {pts[k].tolist()} of pair {rec.pairs[k // 2].tolist()} unmatched")
    node = np.array([dsu.find(k) for k in range(2 * S)], dtype=np.int64)
    vert = {}
    for k, w in vertex_of.items():
        vert[dsu.find(k)] = w
    for k in range(2 * S):
        r = node[k]
        if r not in vert and keys[k][0] == "w":
            vert[r] = keys[k][1]
    # endpoints merged into one node must agree
    spread = np.zeros(2 * S)
    np.maximum.at(spread, node, np.linalg.norm(pts - pts[node], axis=1))
    if spread.max(initial=0.0) > stol:
        raise StitchingError("stitching failure: merged endpoints disagree beyond tolerance")
    return node.reshape(S, 2), vert


def _walk_curves(rec: Records, node, vert, pts):
    """Split the endpoint graph into trails; odd nodes start open curves.

    At nodes of degree above two the walk continues along the straightest
    unused segment.
    """
    S = len(rec.pairs)
    inc: dict = {}
    for s in range(S):
        for end in range(2):
            inc.setdefault(int(node[s, end]), []).append((s, end))
    degree = {n: len(v) for n, v in inc.items()}
    used = np.zeros(S, dtype=bool)

    def leaving(s, end):
        d = rec.seg[s, 1 - end] - rec.seg[s, end]
        return d / max(np.linalg.norm(d), 1e-300)

    def walk(start, first):
        seq, pos = [], [pts[start]]
        cur = first
        while True:
            s, e = cur
            used[s] = True
            seq.append(s)
            n = int(node[s, 1 - e])
            pos.append(rec.seg[s, 1 - e])
            options = [(q, f) for q, f in inc[n] if not used[q]]
            if not options:
                return seq, np.array(pos), n
            heading = leaving(s, e)
            cur = max(options, key=lambda qf: float(leaving(*qf) @ heading))

    curves = []
    odd = sorted(n for n, d in degree.items() if d % 2 == 1)
    for start in odd + sorted(inc):
        for s, e in inc[start]:
            if used[s]:
                continue
            seq, pos, last = walk(start, (s, e))
            closed = last == start
            ends = () if closed else (vert.get(start, -1), vert.get(last, -1))
            curves.append(DoubleCurve(pos, seq, closed, ends))
    return curves, degree


def _triple_points(diagram, rec: Records, node, degen):
    tri = diagram.triangles
    V = diagram.vertices
    stol = diagram.abs_tol().stitch
    by_tri: dict = {}
    for s, (a, b) in enumerate(rec.pairs):
        by_tri.setdefault(int(a), []).append(s)
        by_tri.setdefault(int(b), []).append(s)
    cand_pts = []
    cand_tris = []
    I, J, F = [], [], []
    for f, segs in by_tri.items():
        if len(segs) < 2:
            continue
        for x in range(len(segs)):
            for y in range(x + 1, len(segs)):
                I.append(segs[x])
                J.append(segs[y])
                F.append(f)
    if not I:
        return []
    I, J, F = np.array(I), np.array(J), np.array(F)
    partner_i = np.where(rec.pairs[I, 0] == F, rec.pairs[I, 1], rec.pairs[I, 0])
    partner_j = np.where(rec.pairs[J, 0] == F, rec.pairs[J, 1], rec.pairs[J, 0])
    ok = partner_i != partner_j
    # consecutive pieces of one double curve touch at a shared node
    share = (node[I][:, :, None] == node[J][:, None, :]).any((1, 2))
    ok &= ~share
    I, J, F, partner_i, partner_j = I[ok], J[ok], F[ok], partner_i[ok], partner_j[ok]
    if len(I) == 0:
        return []
    T = V[tri[F]]
    e1 = T[:, 1] - T[:, 0]
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    nrm = np.cross(T[:, 1] - T[:, 0], T[:, 2] - T[:, 0])
    nrm /= np.linalg.norm(nrm, axis=1)[:, None]
    e2 = np.cross(nrm, e1)

    def local(p):
        d = p - T[:, 0]
        return np.column_stack([(d * e1).sum(1), (d * e2).sum(1)])

    st, s_par, _ = kernels.seg_seg_2d(local(rec.seg[I, 0]), local(rec.seg[I, 1]),
                                      local(rec.seg[J, 0]), local(rec.seg[J, 1]), 1e-9)
    for k in np.nonzero(st > 0)[0]:
        p = rec.seg[I[k], 0] + s_par[k] * (rec.seg[I[k], 1] - rec.seg[I[k], 0])
        cand_pts.append(p)
        cand_tris.append((int(F[k]), int(partner_i[k]), int(partner_j[k])))
    if not cand_pts:
        return []
    cand_pts = np.array(cand_pts)
    dsu = _DSU(len(cand_pts))
    for i, j in cKDTree(cand_pts).query_pairs(max(stol, 1e-12)):
        dsu.union(i, j)
    clusters: dict = {}
    for k in range(len(cand_pts)):
        clusters.setdefault(dsu.find(k), []).append(k)
    out = []
    for members in clusters.values():
        tris = sorted({t for k in members for t in cand_tris[k]})
        # triangles sharing a vertex belong to the same sheet here
        tdsu = _DSU(len(tris))
        for x in range(len(tris)):
            for y in range(x + 1, len(tris)):
                if np.intersect1d(tri[tris[x]], tri[tris[y]]).size:
                    tdsu.union(x, y)
        sheets: dict = {}
        for x, t in enumerate(tris):
            sheets.setdefault(tdsu.find(x), []).append(t)
        p = cand_pts[members].mean(0)
        if len(sheets) == 3:
            reps = [min(v) for v in sheets.values()]
            hs = [diagram.height_at(t, p) for t in reps]
            order = np.argsort(hs)[::-1]
            out.append(TriplePoint(p, tuple(reps[o] for o in order), tuple(float(hs[o]) for o in order)))
        elif len(sheets) > 3:
            degen.append({"kind": "point on four or more sheets", "triangles": tris, "point": p.tolist()})
    out.sort(key=lambda t: tuple(np.round(t.point, 12)))
    return out


def compute_singularity_set(diagram: ImmersedDiagram3, exhaustive: bool = False) -> SingularitySet:
    """Double curves, triple points and branch points of the image.

    Raises StitchingError when segment endpoints cannot be matched.
    """
    if diagram._sing is not None and not exhaustive:
        return diagram._sing
    rec, degen = intersection_records(diagram, exhaustive)
    if len(rec.pairs) == 0:
        sing = SingularitySet([], [], [], rec, degen, np.zeros((0, 2), dtype=np.int64))
    else:
        node, vert = _stitch(diagram, rec)
        pts = np.zeros((int(node.max()) + 1, 3))
        pts[node[:, 0]] = rec.seg[:, 0]
        pts[node[:, 1]] = rec.seg[:, 1]
        curves, degree = _walk_curves(rec, node, vert, pts)
        branch = []
        for n, d in sorted(degree.items()):
            if d % 2 == 1:
                if n not in vert:
                    raise StitchingError(f"stitching failure: double curve ends away from a vertex at {pts[n].tolist()}")
                branch.append(BranchPoint(diagram.vertices[vert[n]].copy(), int(vert[n])))
            elif d > 2 and n not in vert:
                degen.append({"kind": "double curves meet", "point": pts[n].tolist()})
        triples = _triple_points(diagram, rec, node, degen)
        sing = SingularitySet(curves, triples, branch, rec, degen, node)
    if not exhaustive:
        diagram.records = rec
        diagram._sing = sing
    return sing


def project_generic(surface: Surface4, drop_axis: str = "x", perturb_magnitude: float = 0.0, seed: int = 0,
                    tol: Tolerances | None = None, max_retries: int = 5, direction=None) -> ImmersedDiagram3:
    """Drop one coordinate, optionally after a small seeded rotation of R^4.

    With ``perturb_magnitude == 0`` degeneracies are reported on the
    result. Otherwise the rotation is re-seeded until the image is generic
    and GenericityError is raised after ``max_retries`` attempts.
    """
    base = projection_frame(drop_axis, direction)
    attempts = max_retries if perturb_magnitude > 0 else 1
    last = None
    for k in range(attempts):
        s = seed + k
        frame = base
        if perturb_magnitude > 0:
            frame = base @ random_rotation(4, np.random.default_rng(s), perturb_magnitude)
        diag = project(surface, frame, s, tol)
        try:
            sing = compute_singularity_set(diag)
            diag.degeneracies = list(sing.degeneracies)
        except StitchingError as exc:
            diag.degeneracies = [{"kind": "stitching", "detail": str(exc)}]
        if perturb_magnitude == 0 or diag.generic:
            return diag
        last = diag
    raise GenericityError(f"non-generic after retries: {last.degeneracies[:3]}")


def singularity_summary(sing: SingularitySet, broken) -> dict:
    return {
        "double_curve_count": len(sing.double_curves),
        "triple_point_count": len(sing.triple_points),
        "branch_point_count": len(sing.branch_points),
        "sheet_count": broken.component_count,
    }


def sphere_directions(count: int, seed: int) -> np.ndarray:
    """Seeded scrambled-Halton directions on the unit 3-sphere."""
    if count <= 0:
        return np.zeros((0, 4))
    u = qmc.Halton(d=4, scramble=True, seed=seed).random(count)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1)[:, None]


def optimize_projection(surface: Surface4, candidate_count: int = 16, seed: int = 0, perturb: float = 0.0,
                        tol: Tolerances | None = None) -> dict:
    """Smallest triple-point count over the axis drops and random directions."""
    if candidate_count < 1:
        raise ValueError("candidate_count must be >= 1")
    trace = []
    cands = [("axis", ax, np.eye(4)[DROP_AXES.index(ax)]) for ax in DROP_AXES]
    cands += [("random", None, d) for d in sphere_directions(candidate_count, seed)]
    best = None
    for kind, ax, d in cands:
        entry = {"kind": kind, "direction": d.tolist()}
        if ax:
            entry["drop"] = ax
        try:
            diag = project_generic(surface, ax or "x", perturb, seed, tol, direction=None if ax else d)
            sing = compute_singularity_set(diag)
            entry["triple_points"] = len(sing.triple_points)
            entry["generic"] = diag.generic
        except (GenericityError, StitchingError) as exc:
            entry["error"] = str(exc)
            trace.append(entry)
            continue
        trace.append(entry)
        if diag.generic and (best is None or entry["triple_points"] < best["triple_points"]):
            best = entry
    return {
        "best_direction": None if best is None else best["direction"],
        "best_triple_count": None if best is None else best["triple_points"],
        "trace": trace,
    }
