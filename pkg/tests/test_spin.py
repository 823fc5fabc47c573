import numpy as np
import pytest

from twistspin.arc import insert_ball_crossings, make_trefoil_arc, make_unknotted_arc
from twistspin.spin import (Surface4, TopologyError, all_pairs_intersecting, audit, check_rotational_symmetry,
                            euler_characteristic, intersecting_pairs, is_consistently_oriented, is_embedded,
                            is_orientable, ring_index, spin, torus_of_revolution, twist_rings, twist_spin)

# six-vertex real projective plane: closed, chi = 1, not orientable
RP2 = np.array([[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 5, 1],
                [1, 2, 4], [2, 3, 5], [3, 4, 1], [4, 5, 2], [5, 1, 3]])


def rodrigues(p, axis, angle):
    k = axis / np.linalg.norm(axis)
    return p * np.cos(angle) + np.cross(k, p) * np.sin(angle) + np.outer(p @ k, k) * (1 - np.cos(angle))


@pytest.mark.parametrize("N,m", [(5, 8), (10, 12), (16, 24), (31, 48)])
def test_mesh_counts(N, m):
    s = spin(make_unknotted_arc(1.0, N), m)
    # two poles plus N-2 interior vertices per ring; two fans and N-3 quad bands
    assert len(s.vertices) == 2 + (N - 2) * m
    assert len(s.triangles) == 2 * m * (N - 2)
    edges, counts = s.edges()
    assert len(edges) == 3 * m * (N - 2)
    assert np.all(counts == 2)
    assert euler_characteristic(s) == 2


@pytest.mark.parametrize("n", [0, 1, 2, 3])
@pytest.mark.parametrize("m", [24, 48])
def test_twist_spin_is_sphere(trefoil, ball, n, m):
    s = twist_spin(trefoil, ball, n, m)
    assert euler_characteristic(s) == 2
    assert is_consistently_oriented(s)
    assert is_orientable(s)


def test_spin_vertices_lie_on_circles(trefoil):
    s = spin(trefoil, 24)
    v = trefoil.vertices
    for i in (1, 7, 30):
        for j in (0, 5, 23):
            p = s.vertices[ring_index(i, j, len(v), 24)]
            th = 2 * np.pi * j / 24
            assert np.allclose(p, [v[i, 0], v[i, 1], v[i, 2] * np.cos(th), v[i, 2] * np.sin(th)], atol=1e-14)


def test_twist_rings_match_rodrigues(trefoil, ball):
    n, m = 2, 24
    arc = insert_ball_crossings(trefoil, ball)
    rings = twist_rings(arc, ball, n, m)
    v = arc.vertices
    inside = np.linalg.norm(v - ball.center, axis=1) < ball.radius * (1 - 1e-9)
    assert 0 < inside.sum() < len(v)
    for j in range(m):
        expect = v.copy()
        expect[inside] = ball.center + rodrigues(v[inside] - ball.center, ball.axis, 2 * np.pi * n * j / m)
        assert np.allclose(rings[j], expect, atol=1e-12)


def test_zero_twist_equals_spin(trefoil, ball):
    a = twist_spin(trefoil, ball, 0, 24)
    b = spin(trefoil, 24)
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.triangles, b.triangles)


def test_bad_parameters(trefoil, ball):
    with pytest.raises(ValueError):
        twist_spin(trefoil, ball, 5, 48)
    with pytest.raises(ValueError):
        twist_spin(trefoil, ball, -1, 48)
    with pytest.raises(ValueError):
        spin(trefoil, 6)


def test_symmetry_of_order_n(twisted):
    rep = check_rotational_symmetry(twisted, 2)
    assert rep.exact_on_vertices
    assert rep.max_deviation <= 1e-12
    quarter = check_rotational_symmetry(twisted, 4)
    assert not quarter.exact_on_vertices
    assert quarter.max_deviation > 1e-3


def test_three_twist_symmetry(trefoil, ball):
    s = twist_spin(trefoil, ball, 3, 24)
    assert check_rotational_symmetry(s, 3).exact_on_vertices
    assert not check_rotational_symmetry(s, 6).exact_on_vertices


def test_spun_symmetric_for_every_step(spun):
    assert check_rotational_symmetry(spun, 48).exact_on_vertices
    assert check_rotational_symmetry(spun, 16).exact_on_vertices


def test_torus_fixture():
    t = torus_of_revolution()
    assert euler_characteristic(t) == 0
    assert is_orientable(t)


def test_projective_plane_not_orientable():
    s = Surface4(np.random.default_rng(0).standard_normal((6, 4)), RP2)
    assert euler_characteristic(s) == 1
    assert not is_orientable(s)
    assert not is_consistently_oriented(s)


def test_open_mesh_raises(spun):
    holed = Surface4(spun.vertices, spun.triangles[1:])
    with pytest.raises(TopologyError):
        euler_characteristic(holed)
    with pytest.raises(TopologyError):
        euler_characteristic(Surface4(np.zeros((4, 4)), [[0, 0, 1], [1, 2, 3]]))


def test_spun_trefoil_embedded(spun):
    assert is_embedded(spun)
    a = audit(spun)
    assert a["euler_characteristic"] == 2 and a["closed"] and a["orientable"] and a["embedded"]


def _two_spheres(round_arc, shift):
    # second copy swaps x and u, so the spheres span different hyperplanes
    s = spin(round_arc, 12)
    V = np.vstack([s.vertices, s.vertices[:, [2, 1, 0, 3]] + [0.0, shift, 0.0, 0.0]])
    return Surface4(V, np.vstack([s.triangles, s.triangles + len(s.vertices)]))


def test_sweep_matches_brute_force_when_embedded():
    s = spin(make_trefoil_arc(samples=24), 24)
    assert len(s.triangles) <= 2000
    hits, unsure = intersecting_pairs(s)
    assert len(hits) == 0 and len(unsure) == 0
    assert len(all_pairs_intersecting(s)) == 0


def test_sweep_matches_brute_force_when_colliding(round_arc):
    # the smooth spheres meet transversally in the two points (0, 1/4, 0, +-sqrt(15)/4)
    s = _two_spheres(round_arc, 0.5)
    hits, unsure = intersecting_pairs(s)
    ex, ex_unsure = intersecting_pairs(s, exhaustive=True)
    brute = all_pairs_intersecting(s)
    assert len(hits) > 0
    mid = np.array([(s.vertices[s.triangles[i]].mean(0) + s.vertices[s.triangles[j]].mean(0)) / 2 for i, j in hits])
    assert np.allclose(np.abs(mid[:, 3]), np.sqrt(15) / 4, atol=0.15)
    assert np.allclose(mid[:, 1], 0.25, atol=0.15)
    as_set = lambda a: {tuple(p) for p in a}
    assert as_set(hits) | as_set(unsure) == as_set(ex) | as_set(ex_unsure)
    assert as_set(brute) == as_set(hits) | as_set(unsure)
    assert not is_embedded(s)


def test_far_spheres_do_not_collide(round_arc):
    assert is_embedded(_two_spheres(round_arc, 3.0))


def test_round_trip(twisted):
    back = Surface4.from_dict(twisted.to_dict())
    assert np.array_equal(back.vertices, twisted.vertices)
    assert np.array_equal(back.triangles, twisted.triangles)
    assert back.meta == twisted.meta
