"""Spun and twist-spun 2-knots as triangulated spheres in R^4: generic
projections to R^3, broken surface diagrams and motion pictures."""
from .arc import PolylineArc, TwistBall, default_twist_ball, make_trefoil_arc, make_unknotted_arc, validate_arc
from .diagram import ImmersedDiagram3, compute_singularity_set, project_generic, singularity_summary
from .links import LinkDiagram, planar_project_frame, signature, signatures_equal, tricoloring_count
from .sheets import BrokenSurface, break_sheets
from .slicer import MotionPicture, check_normal_form, detect_events, slice_horizontal, slice_radial, slice_vertical
from .spin import Surface4, euler_characteristic, spin, twist_spin

__version__ = "0.1.0"
