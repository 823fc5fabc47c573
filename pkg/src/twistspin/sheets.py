"""Broken surface: cut every under-sheet along the double curves."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import LineString, Point, Polygon
from shapely.ops import unary_union

from .diagram import ImmersedDiagram3, SingularitySet, _DSU, _barycentric_many
from .geometry import edge_table


class OverBroadBand(ValueError):
    pass


@dataclass
class BrokenSurface:
    components: list  # sorted triangle ids touched by each sheet
    component_count: int
    pieces: list = field(default_factory=list)  # per sheet: list of 3D polygons

    def to_dict(self) -> dict:
        return {"component_count": self.component_count, "components": [list(map(int, c)) for c in self.components]}


def _chords(seg_ids, nodes):
    """Chain a triangle's under-segments into paths via their shared nodes."""
    inc: dict = {}
    for s in seg_ids:
        for e in range(2):
            inc.setdefault(int(nodes[s, e]), []).append((s, e))
    used = set()
    paths = []
    starts = [n for n, v in inc.items() if len(v) == 1] + list(inc)
    for n0 in starts:
        for s, e in inc[n0]:
            if s in used:
                continue
            path = [(s, e)]
            used.add(s)
            n = int(nodes[s, 1 - e])
            while True:
                nxt = [(q, f) for q, f in inc[n] if q not in used]
                if not nxt:
                    break
                q, f = nxt[0]
                used.add(q)
                path.append((q, f))
                n = int(nodes[q, 1 - f])
            paths.append(path)
    return paths


def _boundary_position(bary, tol):
    """Cyclic position in [0, 3) along edges 0->1->2->0, or None if interior.

    ``tol`` holds, per vertex, the barycentric value that corresponds to
    the absolute snapping distance from the opposite edge.
    """
    k = int(np.argmin(bary / tol))
    if bary[k] > tol[k]:
        return None
    e = (k + 1) % 3
    a, b = bary[e], bary[(e + 1) % 3]
    t = b / (a + b) if a + b > 0 else 0.0
    return e + float(np.clip(t, 0.0, 1.0))


def break_sheets(diagram: ImmersedDiagram3, sing: SingularitySet, band_width: float | None = None,
                 with_pieces: bool = True) -> BrokenSurface:
    """Connected components after removing a band of each under-sheet.

    Components are computed combinatorially: each triangle's under-chords
    split its boundary into arcs, arcs on the same side of every chord
    share a face, and faces are glued across mesh edges. ``band_width``
    only shapes the exported pieces; a band that swallows a whole face
    raises OverBroadBand.
    """
    scale = diagram.scale
    if band_width is not None and band_width <= 0:
        raise ValueError("band_width must be positive")
    rec = sing.records
    tri = diagram.triangles
    V = diagram.vertices
    F = len(tri)
    tri_edge, edge_keys = edge_table(tri, len(V))
    E = len(edge_keys)
    btol = 1e-9
    stitch = diagram.abs_tol().stitch
    under_of: dict = {}
    for s, u in enumerate(rec.under):
        under_of.setdefault(int(u), []).append(s)

    # chord end positions per triangle
    chords = {}
    for f, segs in under_of.items():
        T = V[tri[f]]
        # chords may stop short of an edge by a dropped sub-tolerance piece
        area2 = np.linalg.norm(np.cross(T[1] - T[0], T[2] - T[0]))
        opposite = np.linalg.norm(T[[2, 0, 1]] - T[[1, 2, 0]], axis=1)
        snap = np.maximum(stitch * opposite / area2, btol)
        spans = []
        for path in _chords(segs, sing.nodes):
            s0, e0 = path[0]
            s1, e1 = path[-1]
            ends = np.array([rec.seg[s0, e0], rec.seg[s1, 1 - e1]])
            bary = _barycentric_many(np.repeat(T[None], 2, 0), ends)
            p = _boundary_position(bary[0], snap)
            q = _boundary_position(bary[1], snap)
            if p is None or q is None or abs(p - q) < btol:
                continue  # slit or loop that separates nothing
            pts = [rec.seg[s0, e0]] + [rec.seg[s, 1 - e] for s, e in path]
            spans.append((min(p, q), max(p, q), np.array(pts)))
        if spans:
            chords[f] = spans

    # cut parameters on each edge in its canonical (low -> high vertex) direction
    cuts = [[] for _ in range(E)]
    for f, spans in chords.items():
        for lo, hi, _ in spans:
            for pos in (lo, hi):
                e = int(pos) % 3
                t = pos - int(pos)
                if t <= btol or t >= 1 - btol:
                    continue
                a, b = tri[f, e], tri[f, (e + 1) % 3]
                cuts[tri_edge[f, e]].append(t if a < b else 1 - t)
    cut_lists = []
    for c in cuts:
        c = sorted(c)
        merged = []
        for x in c:
            if not merged or x - merged[-1] > 1e-7:
                merged.append(x)
        cut_lists.append(np.array(merged))
    if band_width is None:
        # a tenth of the shortest boundary arc next to a cut
        edge_len = np.linalg.norm(V[edge_keys // len(V)] - V[edge_keys % len(V)], axis=1)
        arcs = [np.diff(np.concatenate([[0.0], c, [1.0]])).min() * edge_len[g]
                for g, c in enumerate(cut_lists) if len(c)]
        band_width = min([1e-6 * scale] + [0.1 * a for a in arcs])
    offsets = np.concatenate([[0], np.cumsum([len(c) + 1 for c in cut_lists])])
    dsu = _DSU(int(offsets[-1]))

    face_of: dict = {}  # (f, group key) -> representative interval node
    for f in range(F):
        spans = chords.get(f, [])
        groups: dict = {}
        for e in range(3):
            g = tri_edge[f, e]
            a, b = tri[f, e], tri[f, (e + 1) % 3]
            c = cut_lists[g]
            bounds = np.concatenate([[0.0], c, [1.0]])
            for i in range(len(c) + 1):
                mid = 0.5 * (bounds[i] + bounds[i + 1])
                t = mid if a < b else 1 - mid
                pos = e + t
                key = tuple(lo < pos < hi for lo, hi, _ in spans)
                groups.setdefault(key, []).append((int(offsets[g] + i), pos))
        for key, members in groups.items():
            for nid, _ in members[1:]:
                dsu.union(members[0][0], nid)
            face_of[(f, key)] = members
    roots = sorted({dsu.find(k) for k in range(int(offsets[-1]))})
    label = {r: i for i, r in enumerate(roots)}
    comp_tris = [set() for _ in roots]
    for (f, _), members in face_of.items():
        comp_tris[label[dsu.find(members[0][0])]].add(f)
    broken = BrokenSurface([sorted(c) for c in comp_tris], len(roots))
    if with_pieces:
        broken.pieces = _pieces(diagram, chords, face_of, dsu, label, band_width)
    return broken


def _extend(xy, length):
    """Prolong both ends of a polyline so its band crosses the triangle edge cleanly."""
    xy = np.array(xy, dtype=float)
    for end, nxt in ((0, 1), (-1, -2)):
        d = xy[end] - xy[nxt]
        n = np.linalg.norm(d)
        if n > 0:
            xy[end] = xy[end] + d / n * length
    return xy


def _pieces(diagram, chords, face_of, dsu, label, band_width):
    V = diagram.vertices
    tri = diagram.triangles
    out = [[] for _ in label]
    by_tri: dict = {}
    for (f, key), members in face_of.items():
        by_tri.setdefault(f, []).append((key, members))
    for f, faces in by_tri.items():
        T = V[tri[f]]
        if f not in chords:
            (key, members), = faces
            out[label[dsu.find(members[0][0])]].append(T.copy())
            continue
        o = T[0]
        e1 = T[1] - o
        e1 /= np.linalg.norm(e1)
        n = np.cross(T[1] - o, T[2] - o)
        e2 = np.cross(n / np.linalg.norm(n), e1)

        def to2(P):
            d = np.atleast_2d(P) - o
            return np.column_stack([d @ e1, d @ e2])

        poly = Polygon(to2(T))
        cut = unary_union([LineString(_extend(to2(pts), 4 * band_width)).buffer(band_width, cap_style="flat")
                           for _, _, pts in chords[f]])
        rest = poly.difference(cut)
        geoms = list(getattr(rest, "geoms", [rest]))
        geoms = [g for g in geoms if g.area > 0]
        for key, members in faces:
            # locate the piece through the boundary arcs of this face
            hit = []
            for _, pos in members:
                e = int(pos) % 3
                t = pos - int(pos)
                probe = Point(to2(T[e] + t * (T[(e + 1) % 3] - T[e]))[0])
                hit = [g for g in geoms if g.distance(probe) <= 1e-12 * diagram.scale]
                if hit:
                    break
            if not hit:
                raise OverBroadBand(f"over-broad band: a face of triangle {f} vanished at width {band_width}")
            comp = label[dsu.find(members[0][0])]
            for g in hit:
                xy = np.asarray(g.exterior.coords)[:-1]
                out[comp].append(o + xy[:, :1] * e1 + xy[:, 1:2] * e2)
    return out
