import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog
from shapely.geometry import LineString

from twistspin import kernels
from twistspin.geometry import point_segment_distance

BACKENDS = ["numpy"] + (["numba"] if kernels._nb is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    old = kernels.get_backend()
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(old)


def edge_triangle_points(P, Q):
    """Points where the edges of P pierce triangle Q (solved directly)."""
    out = []
    for k in range(3):
        a, b = P[k], P[(k + 1) % 3]
        M = np.column_stack([b - a, Q[0] - Q[1], Q[0] - Q[2]])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        t, u, v = np.linalg.solve(M, Q[0] - a)
        if 0 <= t <= 1 and u >= 0 and v >= 0 and u + v <= 1:
            out.append(a + t * (b - a))
    return out


def oracle_3d(P, Q):
    pts = edge_triangle_points(P, Q) + edge_triangle_points(Q, P)
    if len(pts) < 2:
        return None
    pts = np.array(pts)
    L = np.cross(np.cross(P[1] - P[0], P[2] - P[0]), np.cross(Q[1] - Q[0], Q[2] - Q[0]))
    t = pts @ L
    return pts[np.argmin(t)], pts[np.argmax(t)]


def oracle_4d(P, Q):
    # feasibility LP over (s, t, a, b)
    A_eq = np.column_stack([P[1] - P[0], P[2] - P[0], Q[0] - Q[1], Q[0] - Q[2]])
    res = linprog(np.zeros(4), A_ub=[[1, 1, 0, 0], [0, 0, 1, 1]], b_ub=[1, 1], A_eq=A_eq, b_eq=Q[0] - P[0],
                  bounds=[(0, None)] * 4, method="highs")
    return res.status == 0


def test_backend_switch():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")
    assert kernels.get_backend() in ("numba", "numpy")


def test_tri_tri_3d_against_oracle(backend):
    rng = np.random.default_rng(11)
    P = rng.standard_normal((600, 3, 3))
    Q = rng.standard_normal((600, 3, 3)) + 0.3
    status, seg, feat = kernels.tri_tri_3d(P, Q, 1e-12, 0.0, 1e-9)
    hits = 0
    for i in range(len(P)):
        ref = oracle_3d(P[i], Q[i])
        if ref is None:
            assert status[i] == 0
            continue
        if np.linalg.norm(ref[0] - ref[1]) < 1e-9:
            continue
        hits += 1
        assert status[i] == 1
        got = {tuple(np.round(p, 8)) for p in seg[i]}
        assert got == {tuple(np.round(p, 8)) for p in ref}
    assert hits > 50


def test_tri_tri_3d_feature_codes(backend):
    rng = np.random.default_rng(5)
    P = rng.standard_normal((300, 3, 3))
    Q = rng.standard_normal((300, 3, 3))
    status, seg, feat = kernels.tri_tri_3d(P, Q, 1e-12, 0.0, 1e-9)
    assert (status == 1).sum() > 20
    for i in np.nonzero(status == 1)[0]:
        for e in range(2):
            owner, code = divmod(int(feat[i, e]), 6)
            T = (P, Q)[owner][i]
            if code < 3:
                d = point_segment_distance(seg[i, e][None], T[code][None], T[(code + 1) % 3][None])[0]
            else:
                d = np.linalg.norm(seg[i, e] - T[code - 3])
            assert d < 1e-9


def test_tri_tri_3d_special_cases(backend):
    P = np.array([[[0.0, 0, 0], [1, 0, 0], [0, 1, 0]]] * 3)
    Q = np.array([
        [[0.1, 0.1, 0], [0.8, 0.1, 0], [0.1, 0.8, 0]],  # coplanar overlap
        [[5, 5, 1], [6, 5, 1], [5, 6, 1]],  # disjoint, parallel
        [[0.2, 0.2, -1], [0.2, 0.2, 1], [0.3, 0.9, 0]],  # piercing
    ])
    status, seg, _ = kernels.tri_tri_3d(P, Q, 1e-12, 0.0, 1e-9)
    assert status.tolist() == [2, 0, 1]
    assert np.allclose(seg[2, :, 2], 0)


def test_tri_tri_3d_min_length(backend):
    # Q only grazes P near a corner: a hit of length ~1e-6
    P = np.array([[[0.0, 0, 0], [1, 0, 0], [0, 1, 0]]])
    Q = np.array([[[-1, 0.5, -1], [-1, 0.5, 1], [1e-6, 0.5, 0]]])
    s0, _, _ = kernels.tri_tri_3d(P, Q, 1e-12, 0.0, 1e-9)
    s1, _, _ = kernels.tri_tri_3d(P, Q, 1e-12, 1e-3, 1e-9)
    assert s0[0] == 1 and s1[0] == 0


def test_tri_tri_4d_against_lp(backend):
    rng = np.random.default_rng(3)
    P = rng.standard_normal((800, 3, 4))
    Q = rng.standard_normal((800, 3, 4)) * 0.8
    status = kernels.tri_tri_4d(P, Q)
    ref = np.array([oracle_4d(P[i], Q[i]) for i in range(len(P))])
    assert 20 < ref.sum() < len(P)
    assert np.array_equal(status == 1, ref)


def test_tri_tri_4d_shared_plane(backend):
    P = np.array([[[0.0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0]]])
    Q = np.array([[[0.2, 0.2, 0, 0], [0.2, 0.2, 1, 0], [0.2, 0.2, 0, 1]]])
    assert kernels.tri_tri_4d(P, Q)[0] == 1
    assert kernels.tri_tri_4d(P, Q + [0, 0, 0, -0.5])[0] == 1
    assert kernels.tri_tri_4d(P, Q + [0, 0, 0, 0.5])[0] == 0


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("numba missing")
    rng = np.random.default_rng(8)
    P3, Q3 = rng.standard_normal((2, 500, 3, 3))
    P4, Q4 = rng.standard_normal((2, 500, 3, 4))
    A, B, C, D = rng.standard_normal((4, 500, 2))
    out = {}
    old = kernels.get_backend()
    for b in BACKENDS:
        kernels.set_backend(b)
        out[b] = (kernels.tri_tri_3d(P3, Q3, 1e-12, 0.0, 1e-9), kernels.tri_tri_4d(P4, Q4),
                  kernels.seg_seg_2d(A, B, C, D))
    kernels.set_backend(old)
    (s3a, g3a, f3a), s4a, (s2a, pa, qa) = out["numpy"]
    (s3b, g3b, f3b), s4b, (s2b, pb, qb) = out["numba"]
    assert np.array_equal(s3a, s3b) and np.array_equal(f3a, f3b)
    assert np.allclose(g3a, g3b, atol=1e-12)
    assert np.array_equal(s4a, s4b)
    assert np.array_equal(s2a, s2b)
    assert np.allclose(pa, pb, atol=1e-12) and np.allclose(qa, qb, atol=1e-12)


def test_seg_seg_2d_against_shapely(backend):
    rng = np.random.default_rng(2)
    A, B, C, D = rng.standard_normal((4, 1000, 2))
    status, s, t = kernels.seg_seg_2d(A, B, C, D)
    for i in range(1000):
        assert (status[i] != 0) == LineString([A[i], B[i]]).intersects(LineString([C[i], D[i]]))
        if status[i] == 1:
            assert np.allclose(A[i] + s[i] * (B[i] - A[i]), C[i] + t[i] * (D[i] - C[i]))


def test_seg_seg_2d_degenerate(backend):
    A = np.array([[0.0, 0], [0, 0], [0, 0]])
    B = np.array([[1.0, 0], [1, 0], [1, 0]])
    C = np.array([[0.5, 0], [2, 0], [1, -1]])
    D = np.array([[1.5, 0], [3, 0], [1, 1]])
    status, _, _ = kernels.seg_seg_2d(A, B, C, D)
    # collinear overlap, collinear apart, touching at an endpoint
    assert status.tolist() == [2, 0, 2]


boxes = st.integers(1, 60).flatmap(
    lambda n: st.tuples(
        st.lists(st.tuples(*[st.floats(-5, 5, allow_nan=False)] * 3), min_size=n, max_size=n),
        st.lists(st.tuples(*[st.floats(0, 2, allow_nan=False)] * 3), min_size=n, max_size=n),
    ))


@settings(max_examples=150, deadline=None)
@given(boxes, st.floats(0, 0.5))
def test_box_pairs_matches_exhaustive(data, pad):
    lo = np.array(data[0]).reshape(-1, 3)
    hi = lo + np.array(data[1]).reshape(-1, 3)
    got = kernels.box_pairs(lo, hi, pad)
    ref = kernels.box_pairs_exhaustive(lo, hi, pad)
    assert sorted(map(tuple, got)) == sorted(map(tuple, ref))


def test_box_pairs_touching_and_duplicates():
    lo = np.array([[0.0, 0], [1, 0], [0, 0], [3, 3]])
    hi = np.array([[1.0, 1], [2, 1], [1, 1], [4, 4]])
    got = {tuple(p) for p in kernels.box_pairs(lo, hi)}
    assert got == {(0, 1), (0, 2), (1, 2)}
