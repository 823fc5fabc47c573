"""Backend dispatch for the hot geometric kernels.

Set ``TWISTSPIN_NUMBA=0`` to force the pure-numpy path. Tests and the
benchmark can switch at runtime with :func:`set_backend`.
"""
from __future__ import annotations

import os

import numpy as np

from . import _np

try:
    from . import _nb
except ImportError:  # numba missing
    _nb = None

_state = {"backend": "numba" if _nb is not None and os.environ.get("TWISTSPIN_NUMBA", "1") != "0" else "numpy"}


def set_backend(name: str) -> None:
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and _nb is None:
        raise RuntimeError("numba is not importable")
    _state["backend"] = name


def get_backend() -> str:
    return _state["backend"]


def _mod():
    return _nb if _state["backend"] == "numba" else _np


def tri_tri_3d(P, Q, eps, min_len, sin_tol):
    """Intersect triangle pairs in R^3.

    Parameters
    ----------
    P, Q : (n, 3, 3) arrays
    eps : float
        Absolute snapping distance for plane-side tests.
    min_len : float
        Intersections shorter than this are dropped.
    sin_tol : float
        Pairs whose unit normals have cross product below this are
        reported as non-transverse.

    Returns
    -------
    status : (n,) int8
        0 none, 1 segment, 2 coplanar overlap, 3 non-transverse.
    seg : (n, 2, 3) float
    feat : (n, 2) int8
        Feature carrying each endpoint: ``owner * 6 + k`` for edge k
        (from vertex k to k+1) or ``owner * 6 + 3 + k`` for vertex k,
        where owner is 0 for P and 1 for Q.
    """
    P = np.ascontiguousarray(P, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    return _mod().tri_tri_3d(P, Q, float(eps), float(min_len), float(sin_tol))


def tri_tri_4d(P, Q, tol=1e-10, rank_tol=1e-9):
    """Shared-point test for triangle pairs in R^4; 1 hit, 2 inconclusive."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    return _mod().tri_tri_4d(P, Q, float(tol), float(rank_tol))


def seg_seg_2d(A, B, C, D, eps=1e-12):
    """Crossings of planar segment pairs; 1 proper, 2 degenerate contact."""
    args = [np.ascontiguousarray(a, dtype=np.float64) for a in (A, B, C, D)]
    return _mod().seg_seg_2d(*args, float(eps))


def box_pairs(lo, hi, pad=0.0):
    """Index pairs i < j whose axis-aligned boxes overlap (sweep and prune).

    Sorting on the first axis, every box is paired with the boxes whose
    start lies inside its extent; the remaining axes filter.
    """
    lo = np.asarray(lo, dtype=float) - pad
    hi = np.asarray(hi, dtype=float) + pad
    n = lo.shape[0]
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64)
    order = np.argsort(lo[:, 0], kind="stable")
    start = lo[order, 0]
    stop = np.searchsorted(start, hi[order, 0], side="right")
    counts = stop - np.arange(n) - 1
    counts = np.maximum(counts, 0)
    a = np.repeat(np.arange(n), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    b = a + 1 + offs
    i, j = order[a], order[b]
    keep = np.all((lo[i] <= hi[j]) & (lo[j] <= hi[i]), axis=1)
    i, j = i[keep], j[keep]
    pairs = np.stack([np.minimum(i, j), np.maximum(i, j)], axis=1)
    if len(pairs):
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    return pairs


def box_pairs_exhaustive(lo, hi, pad=0.0):
    """All-pairs reference for :func:`box_pairs`."""
    lo = np.asarray(lo, dtype=float) - pad
    hi = np.asarray(hi, dtype=float) + pad
    n = lo.shape[0]
    out = []
    for i in range(n - 1):
        ok = np.all((lo[i] <= hi[i + 1:]) & (lo[i + 1:] <= hi[i]), axis=1)
        js = np.nonzero(ok)[0] + i + 1
        out.extend((i, j) for j in js)
    return np.array(out, dtype=np.int64).reshape(-1, 2)
