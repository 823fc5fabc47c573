"""Persistence: canonical JSON, ASCII OBJ and SVG frames, all written atomically."""
from __future__ import annotations

import json
import logging
import os
import tempfile
from pathlib import Path

import numpy as np

from .links import DEFAULT_VIEW, TOP_VIEW, _view_basis

log = logging.getLogger(__name__)

# fixed orthographic cameras (view directions in frame coordinates)
CAMERAS = {
    "vertical": DEFAULT_VIEW,  # (x, y, u) frames seen almost along -x
    "horizontal": np.array([-1.0, 0.0, 0.0]),  # (x, u, v) frames seen along -x, the (u, v) plane face on
    "radial": TOP_VIEW,  # (r, y, height) frames seen from above
}


def to_plain(obj):
    """Recursively convert numpy containers and scalars to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, shortest round-trip floats."""
    return json.dumps(to_plain(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def atomic_write(path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
        log.info("wrote %s", path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, obj) -> Path:
    return atomic_write(path, dumps(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def obj_text(vertices, triangles, comment: str = "") -> str:
    lines = [f"# {comment}"] if comment else []
    lines += ["v " + " ".join(repr(float(c)) for c in v) for v in np.asarray(vertices, dtype=float)]
    lines += ["f " + " ".join(str(int(i) + 1) for i in t) for t in np.asarray(triangles)]
    return "\n".join(lines) + "\n"


def write_obj(path, vertices, triangles, comment: str = "") -> Path:
    return atomic_write(path, obj_text(vertices, triangles, comment))


def read_obj(path):
    V, T = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                V.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                T.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return np.array(V, dtype=float).reshape(-1, 3), np.array(T, dtype=np.int64).reshape(-1, 3)


# -------------------------------------------------------------------- SVG

def _runs(curve, breaks, gap, scale):
    """Split a closed polyline into open runs, leaving gaps at under-passes."""
    P = np.asarray(curve, dtype=float)
    n = len(P)
    Q = np.roll(P, -1, axis=0)
    cuts = [[] for _ in range(n)]  # per segment: parameter intervals to drop
    for b in np.asarray(breaks, dtype=float).reshape(-1, 3):
        d = Q - P
        L2 = np.maximum((d * d).sum(1), 1e-300)
        s = np.clip(((b - P) * d).sum(1) / L2, 0, 1)
        dist = np.linalg.norm(P + s[:, None] * d - b, axis=1)
        k = int(np.argmin(dist))
        if dist[k] > 1e-9 * scale:
            continue
        h = gap / np.sqrt(L2[k])
        cuts[k].append((s[k] - h, s[k] + h))
    if not any(cuts):
        return [np.vstack([P, P[:1]])], True
    runs, cur = [], [P[0]]
    for k in range(n):
        for lo, hi in sorted(cuts[k]):
            if lo > 0:
                cur.append(P[k] + lo * (Q[k] - P[k]))
            if len(cur) > 1:
                runs.append(np.array(cur))
            cur = [P[k] + min(hi, 1.0) * (Q[k] - P[k])]
        cur.append(Q[k])
    if len(cur) > 1:
        if runs and np.allclose(runs[0][0], P[0]):
            runs[0] = np.vstack([np.array(cur), runs[0][1:]])
        else:
            runs.append(np.array(cur))
    return runs, False


def frame_bounds(frames, camera) -> tuple:
    basis, _ = _view_basis(camera)
    pts = [np.asarray(c) @ basis.T for f in frames for c in f.curves]
    if not pts:
        return (np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    P = np.concatenate(pts)
    lo, hi = P.min(0), P.max(0)
    pad = 0.05 * max(float((hi - lo).max()), 1e-9)
    return lo - pad, hi + pad


def svg_frame(frame, camera, bounds, size: int = 480, stroke: float = 1.5) -> str:
    basis, _ = _view_basis(camera)
    lo, hi = bounds
    span = float(max((hi - lo).max(), 1e-12))
    k = size / span

    def xy(P):
        q = (np.asarray(P) @ basis.T - lo) * k
        return [(float(a), float(size - b)) for a, b in q]

    scale = span
    gap = 0.012 * span
    body = []
    for curve in frame.curves:
        runs, closed = _runs(curve, frame.breaks, gap, scale)
        for r in runs:
            pts = " ".join(f"{a:.3f},{b:.3f}" for a, b in xy(r))
            tag = "polygon" if closed else "polyline"
            body.append(f'  <{tag} points="{pts}" fill="none" stroke="black" stroke-width="{stroke}"/>')
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">')
    title = f"  <title>t = {frame.parameter:.6g}{' (nudged)' if frame.nudged else ''}</title>"
    return "\n".join([head, title] + body + ["</svg>"]) + "\n"


def write_frames_svg(directory, picture, camera=None, size: int = 480) -> list[Path]:
    camera = CAMERAS[picture.family] if camera is None else np.asarray(camera, dtype=float)
    bounds = frame_bounds(picture.frames, camera)
    out = []
    for i, f in enumerate(picture.frames):
        out.append(atomic_write(Path(directory) / f"frame_{i:03d}.svg", svg_frame(f, camera, bounds, size)))
    return out
