import numpy as np
import pytest
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from twistspin.diagram import compute_singularity_set, project_generic
from twistspin.geometry import point_segment_distance, point_triangle_distance
from twistspin.sheets import BrokenSurface, OverBroadBand, break_sheets


def owning_triangle(diagram, piece, boxes):
    # the piece lies inside its triangle: box containment, then every vertex at distance ~0
    lo, hi = boxes
    pad = 1e-9 * diagram.scale
    cand = np.nonzero(np.all((lo - pad <= piece.min(0)) & (piece.max(0) <= hi + pad), axis=1))[0]
    T = diagram.vertices[diagram.triangles[cand]]
    d = [point_triangle_distance(piece, np.repeat(t[None], len(piece), 0)).max() for t in T]
    return int(cand[np.argmin(d)])


def flood_fill_sheets(diagram, pieces):
    """Glue band-cut pieces that share a stretch of a mesh edge and count clusters."""
    V, tri = diagram.vertices, diagram.triangles
    boxes = V[tri].min(1), V[tri].max(1)
    tol = 1e-9 * diagram.scale
    flat = [(c, p) for c, ps in enumerate(pieces) for p in ps]
    on_edge = {}  # mesh edge -> [(piece id, triangle, lo, hi)]
    for pid, (_, P) in enumerate(flat):
        f = owning_triangle(diagram, P, boxes)
        Q = np.roll(P, -1, axis=0)
        for k in range(3):
            a, b = tri[f, k], tri[f, (k + 1) % 3]
            A, B = V[a], V[b]
            d0 = point_segment_distance(P, np.repeat(A[None], len(P), 0), np.repeat(B[None], len(P), 0))
            d1 = np.roll(d0, -1)
            L = B - A
            for i in np.nonzero((d0 < tol) & (d1 < tol))[0]:
                t0, t1 = sorted(((P[i] - A) @ L / (L @ L), (Q[i] - A) @ L / (L @ L)))
                if t1 - t0 < 1e-12:
                    continue
                if a > b:
                    t0, t1 = 1 - t1, 1 - t0
                on_edge.setdefault((min(a, b), max(a, b)), []).append((pid, f, t0, t1))
    rows, cols = [], []
    for runs in on_edge.values():
        for i, (p, f, lo, hi) in enumerate(runs):
            for q, g, lo2, hi2 in runs[i + 1:]:
                if f != g and min(hi, hi2) - max(lo, lo2) > 1e-12:
                    rows.append(p)
                    cols.append(q)
    n = len(flat)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    count, labels = connected_components(graph, directed=False)
    return count, labels, np.array([c for c, _ in flat])


def test_spun_trefoil_four_sheets(spun_diagram):
    sing = compute_singularity_set(spun_diagram)
    broken = break_sheets(spun_diagram, sing)
    assert broken.component_count == 4
    count, labels, comp = flood_fill_sheets(spun_diagram, broken.pieces)
    assert count == 4
    # the oracle's clusters are exactly the reported sheets
    pairs = set(zip(labels.tolist(), comp.tolist()))
    assert len(pairs) == 4


def test_twisted_sheets_match_oracle(twisted):
    d = project_generic(twisted, "x", 1e-6, 0)
    sing = compute_singularity_set(d)
    broken = break_sheets(d, sing)
    assert broken.component_count >= 4
    count, labels, comp = flood_fill_sheets(d, broken.pieces)
    assert count == broken.component_count
    assert len(set(zip(labels.tolist(), comp.tolist()))) == count


def test_components_cover_every_triangle(spun_diagram):
    broken = break_sheets(spun_diagram, compute_singularity_set(spun_diagram), with_pieces=False)
    covered = set().union(*map(set, broken.components))
    assert covered == set(range(len(spun_diagram.triangles)))
    assert broken.pieces == []


def test_no_double_curves_one_sheet(round_sphere):
    d = project_generic(round_sphere, "x")
    broken = break_sheets(d, compute_singularity_set(d))
    assert broken.component_count == 1
    area = sum(0.5 * np.linalg.norm(np.cross(P[1] - P[0], P[2] - P[0])) for P in broken.pieces[0])
    T = d.vertices[d.triangles]
    assert np.isclose(area, 0.5 * np.linalg.norm(np.cross(T[:, 1] - T[:, 0], T[:, 2] - T[:, 0]), axis=1).sum())


def test_band_width_limits(spun_diagram):
    sing = compute_singularity_set(spun_diagram)
    with pytest.raises(OverBroadBand):
        break_sheets(spun_diagram, sing, band_width=0.5)
    with pytest.raises(ValueError):
        break_sheets(spun_diagram, sing, band_width=0.0)


def test_to_dict(spun_diagram):
    broken = break_sheets(spun_diagram, compute_singularity_set(spun_diagram), with_pieces=False)
    d = broken.to_dict()
    assert d["component_count"] == 4
    assert BrokenSurface(d["components"], d["component_count"]).to_dict() == d
