import numpy as np
import pytest

from twistspin.arc import PolylineArc, default_twist_ball, make_trefoil_arc, make_unknotted_arc
from twistspin.diagram import compute_singularity_set, project_generic
from twistspin.spin import spin, twist_spin


@pytest.fixture(scope="session")
def trefoil():
    return make_trefoil_arc()


@pytest.fixture(scope="session")
def ball(trefoil):
    return default_twist_ball(trefoil)


@pytest.fixture(scope="session")
def spun(trefoil):
    return spin(trefoil, 48)


@pytest.fixture(scope="session")
def twisted(trefoil, ball):
    return twist_spin(trefoil, ball, 2, 48)


@pytest.fixture(scope="session")
def spun_diagram(spun):
    d = project_generic(spun, "x")
    compute_singularity_set(d)
    return d


@pytest.fixture(scope="session")
def twisted_diagram(twisted):
    # unperturbed: keeps the exact pi-periodicity needed by radial slicing
    return project_generic(twisted, "x")


@pytest.fixture(scope="session")
def round_arc():
    """Semicircle in the yz plane; its spin drops along x to a round sphere."""
    v = make_unknotted_arc(1.0, 16).vertices
    return PolylineArc(np.column_stack([np.zeros(len(v)), v[:, 0], v[:, 2]]))


@pytest.fixture(scope="session")
def round_sphere(round_arc):
    return spin(round_arc, 24)


def _square(cx, cy=0.0, r=0.5):
    return np.array([[cx - r, cy - r, 0.0], [cx + r, cy - r, 0.0], [cx + r, cy + r, 0.0], [cx - r, cy + r, 0.0]])


def _picture(mins=(-2.0,), sads=(-1.0, 1.0), maxs=(2.0,), middle=1, frames=True):
    from twistspin.slicer import CriticalEvent, Frame, MotionPicture

    ev = [CriticalEvent(v, "minimum", np.zeros(3)) for v in mins]
    ev += [CriticalEvent(v, "saddle", np.zeros(3)) for v in sads]
    ev += [CriticalEvent(v, "maximum", np.zeros(3)) for v in maxs]
    ev.sort(key=lambda e: e.value)
    fr = []
    if frames:
        fr = [Frame(-1.5, [_square(0)]), Frame(0.0, [_square(3 * k) for k in range(middle)]), Frame(1.5, [_square(0)])]
    return MotionPicture("vertical", fr, ev, source="synthetic")


ALL_TRUE = {"minima_at_-2": True, "maxima_at_2": True, "saddles_at_pm1": True, "middle_connected": True}


@pytest.fixture(scope="session")
def normal_form_cases():
    """(name, picture, expected condition results) for the normal-form checker."""
    return [
        ("compliant", _picture(), dict(ALL_TRUE)),
        ("early minimum", _picture(mins=(-2.0, -1.5)), dict(ALL_TRUE, **{"minima_at_-2": False})),
        ("late maximum", _picture(maxs=(1.7,)), dict(ALL_TRUE, **{"maxima_at_2": False})),
        ("stray saddle", _picture(sads=(-1.0, 0.5)), dict(ALL_TRUE, **{"saddles_at_pm1": False})),
        ("split middle", _picture(middle=2), dict(ALL_TRUE, middle_connected=False)),
        ("empty", _picture(mins=(), sads=(), maxs=(), frames=False), dict(ALL_TRUE, middle_connected=False)),
    ]
