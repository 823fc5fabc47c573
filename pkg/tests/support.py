"""Independent oracles and helpers shared by the test modules."""
import itertools

import numpy as np
from scipy.spatial import cKDTree

from twistspin.cli import EXIT_OK, main


def brute_force_colorings(gauss):
    """Count 3-colorings by enumerating every color assignment of the arcs.

    Arcs are read straight off the Gauss code: a component is cut at each
    under-passage, and the over-passage of the same crossing names the
    colour that must average the two arcs meeting there.
    """
    arc_of = {}  # (component, position) -> arc id
    n_arcs = 0
    ends = {}  # crossing -> (arc before the under-pass, arc after it)
    over = {}
    for ci, seq in enumerate(gauss):
        unders = [i for i, (_, kind, _) in enumerate(seq) if kind == "U"]
        if not unders:
            for i in range(len(seq)):
                arc_of[(ci, i)] = n_arcs
            n_arcs += 1
            continue
        start = n_arcs
        k = len(unders)
        for j, u in enumerate(unders):
            # positions after under-pass u up to and including the next one belong to one arc
            nxt = unders[(j + 1) % k] + (len(seq) if j + 1 == k else 0)
            for i in range(u + 1, nxt + 1):
                arc_of[(ci, i % len(seq))] = start + j
        n_arcs += k
        for j, u in enumerate(unders):
            c = seq[u][0]
            ends[c] = (start + (j - 1) % k, start + j)
    for ci, seq in enumerate(gauss):
        for i, (c, kind, _) in enumerate(seq):
            if kind == "O":
                over[c] = arc_of[(ci, i)]
    total = 0
    for colors in itertools.product(range(3), repeat=n_arcs):
        if all((2 * colors[over[c]] - colors[a] - colors[b]) % 3 == 0 for c, (a, b) in ends.items()):
            total += 1
    return total


def gauss_linking_integral(A, B):
    """Discrete Gauss double integral over two closed polygons."""
    a0, a1 = A, np.roll(A, -1, axis=0)
    b0, b1 = B, np.roll(B, -1, axis=0)
    ma, mb = (a0 + a1) / 2, (b0 + b1) / 2
    da, db = a1 - a0, b1 - b0
    r = ma[:, None] - mb[None]
    num = np.einsum("ijk,ijk->ij", r, np.cross(da[:, None], db[None]))
    return float((num / np.linalg.norm(r, axis=2) ** 3).sum() / (4 * np.pi))


def arc_crossings(arc, t):
    """(x, z) where the arc meets the plane y = t, by direct interpolation."""
    v = arc.vertices
    out = []
    for a, b in zip(v[:-1], v[1:]):
        if (a[1] - t) * (b[1] - t) < 0:
            s = (t - a[1]) / (b[1] - a[1])
            out.append(a + s * (b - a))
    return np.array(out)[:, [0, 2]]


def point_set_deviation(A, B):
    return max(cKDTree(B).query(A)[0].max(), cKDTree(A).query(B)[0].max())


def run(*argv):
    return main([str(a) for a in argv])


def pipeline(out):
    steps = [("build", "--n", 2, "--m", 24), ("project", "--perturb", "1e-6", "--seed", 3),
             ("slice", "--family", "horizontal", "--frames", 9), ("analyze", "--family", "horizontal"),
             ("slice", "--family", "vertical", "--frames", 9), ("analyze", "--family", "vertical")]
    for step in steps:
        assert run(*step, "--out", out) == EXIT_OK, step
