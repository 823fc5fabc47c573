import numpy as np
import pytest

from twistspin.arc import (PolylineArc, TwistBall, check_ball, crossing_sequence, default_twist_ball,
                           insert_ball_crossings, make_trefoil_arc, make_unknotted_arc, validate_arc)


def test_trefoil_arc_is_valid(trefoil):
    rep = validate_arc(trefoil)
    assert rep.ok, rep.violations
    assert trefoil.vertices[0, 2] == 0 and trefoil.vertices[-1, 2] == 0


def test_trefoil_projection_alternates(trefoil):
    seq = crossing_sequence(trefoil, drop=0)
    assert "".join(seq) in ("OUOUOU", "UOUOUO")


@pytest.mark.parametrize("samples", [24, 37, 60, 120])
def test_trefoil_resolutions(samples):
    arc = make_trefoil_arc(samples=samples)
    assert len(arc) == samples
    assert validate_arc(arc).ok
    assert not check_ball(arc, default_twist_ball(arc))


def test_too_few_samples():
    with pytest.raises(ValueError, match="insufficient resolution"):
        make_trefoil_arc(samples=12)


def test_scaled_trefoil_keeps_shape():
    a = make_trefoil_arc(scale=3.0)
    b = make_trefoil_arc()
    assert np.allclose(a.vertices, 3.0 * b.vertices)
    assert crossing_sequence(a) == crossing_sequence(b)


def test_unknot_arc():
    arc = make_unknotted_arc(2.0, 10)
    assert validate_arc(arc).ok
    assert crossing_sequence(arc, drop=1) == []
    with pytest.raises(ValueError):
        make_unknotted_arc(0.0)


def test_violations_are_reported():
    v = np.array([[0, 0, 0], [0, 1, 1], [0, 2, 0.0], [0, 3, 1], [0, 4, 0.5]])
    kinds = validate_arc(PolylineArc(v)).kinds()
    assert "interior touches boundary" in kinds
    assert "endpoint off boundary" in kinds


def test_self_intersection_detected():
    # a planar arc whose projection crosses itself really does meet itself
    v = np.array([[0, -2, 0], [0, 0, 2], [0, 1, 1], [0, -1, 1], [0, 2, 0.0]])
    assert "self-intersection" in validate_arc(PolylineArc(v)).kinds()
    lifted = v.copy()
    lifted[3, 0] = 0.5
    assert "self-intersection" not in validate_arc(PolylineArc(lifted)).kinds()


def test_default_ball(trefoil, ball):
    assert np.allclose(ball.center, [0, 0, 3])
    assert np.isclose(ball.radius, 2.4)
    assert np.allclose(np.abs(ball.axis), [0, 1, 0])
    assert check_ball(trefoil, ball) == []


def test_ball_without_knotted_part_rejected(trefoil):
    bad = TwistBall(np.array([0.0, 3.0, 1.0]), 0.5, np.array([0.0, 1.0, 0.0]))
    assert check_ball(trefoil, bad)


def test_insert_ball_crossings_hits_poles(trefoil, ball):
    arc = insert_ball_crossings(trefoil, ball)
    poles = ball.poles
    for p in poles:
        assert np.min(np.linalg.norm(arc.vertices - p, axis=1)) == 0.0


def test_round_trip(trefoil, ball):
    assert np.array_equal(PolylineArc.from_dict(trefoil.to_dict()).vertices, trefoil.vertices)
    b = TwistBall.from_dict(ball.to_dict())
    assert np.array_equal(b.center, ball.center) and b.radius == ball.radius
