"""Command line: build, project, slice, analyze, export.

Exit codes: 0 success, 1 validation failure, 2 genericity failure,
3 I/O failure. The default output directory comes from TWISTSPIN_OUT.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .arc import PolylineArc, TwistBall, default_twist_ball, make_trefoil_arc, make_unknotted_arc
from .config import DROP_AXES, FAMILIES, PipelineConfig, Tolerances, default_out_dir
from .diagram import (GenericityError, ImmersedDiagram3, StitchingError, compute_singularity_set,
                      project_generic, singularity_summary)
from .links import DiagramError, gauss_code_text, planar_project_frame, signature, signatures_equal
from .sheets import OverBroadBand, break_sheets
from .slicer import (MotionPicture, check_normal_form, default_angles, default_grid, detect_events, morse_counts,
                     slice_horizontal, slice_radial, slice_vertical)
from .spin import Surface4, TopologyError, audit, check_rotational_symmetry, twist_spin

EXIT_OK, EXIT_VALIDATION, EXIT_GENERIC, EXIT_IO = 0, 1, 2, 3


def _arc_from(cfg: PipelineConfig):
    if cfg.arc == "trefoil":
        arc = make_trefoil_arc(cfg.scale, cfg.samples)
        return arc, default_twist_ball(arc)
    if cfg.arc == "unknot":
        arc = make_unknotted_arc(cfg.scale, max(cfg.samples // 4, 8))
        return arc, (default_twist_ball(arc) if cfg.n else None)
    d = io.read_json(cfg.arc)
    arc = PolylineArc.from_dict(d["arc"] if "arc" in d else d)
    ball = TwistBall.from_dict(d["ball"]) if "ball" in d else (default_twist_ball(arc) if cfg.n else None)
    return arc, ball


def cmd_build(cfg: PipelineConfig) -> dict:
    arc, ball = _arc_from(cfg)
    surface = twist_spin(arc, ball, cfg.n, cfg.m, cfg.tol.intersect)
    report = audit(surface, embedded=True)
    if cfg.n > 0:
        report["symmetry"] = check_rotational_symmetry(surface, cfg.n).to_dict()
    doc = {"surface": surface.to_dict(), "arc": arc.to_dict(), "ball": None if ball is None else ball.to_dict()}
    io.write_json(cfg.out / "surface.json", doc)
    io.write_json(cfg.out / "audit.json", report)
    return report


def load_surface(path) -> Surface4:
    d = io.read_json(path)
    return Surface4.from_dict(d.get("surface", d))


def load_diagram(path, tol: Tolerances | None = None) -> ImmersedDiagram3:
    return ImmersedDiagram3.from_dict(io.read_json(path), tol)


def cmd_project(cfg: PipelineConfig, surface_path) -> dict:
    surface = load_surface(surface_path)
    diag = project_generic(surface, cfg.drop, cfg.perturb, cfg.seed, cfg.tol)
    if not diag.generic:
        raise GenericityError(f"non-generic projection: {diag.degeneracies[:3]}")
    sing = compute_singularity_set(diag)
    broken = break_sheets(diag, sing, with_pieces=False)
    summary = singularity_summary(sing, broken)
    io.write_obj(cfg.out / "diagram.obj", diag.vertices, diag.triangles, f"drop {cfg.drop} seed {diag.perturbation_seed}")
    io.write_json(cfg.out / "diagram.json", diag.to_dict())
    io.write_json(cfg.out / "singularity.json", {"summary": summary, "singularities": sing.to_dict(),
                                                  "sheets": broken.to_dict()})
    return summary


def cmd_slice(cfg: PipelineConfig, source) -> MotionPicture:
    fam = cfg.family
    if fam == "radial":
        diag = load_diagram(source, cfg.tol)
        mp = slice_radial(diag, default_angles(cfg.frames or 32), cfg.tol)
    else:
        surface = load_surface(source)
        f = surface.vertices[:, 3 if fam == "vertical" else 1]
        grid = default_grid(f.min(), f.max(), cfg.frames or 41)
        mp = (slice_vertical if fam == "vertical" else slice_horizontal)(surface, grid, cfg.tol)
    # relative to the output directory so runs elsewhere give identical bytes
    mp.source = Path(os.path.relpath(Path(source).resolve(), cfg.out.resolve())).as_posix()
    diagrams = []
    for fr in mp.frames:
        try:
            d = planar_project_frame(fr, seed=cfg.view_seed)
            diagrams.append({"gauss_code": gauss_code_text(d), "pd": d.pd.tolist(), "over_in": d.over_in.tolist(),
                             "loops": d.loops})
        except DiagramError as exc:
            diagrams.append({"error": str(exc)})
    doc = mp.to_dict()
    doc["frame_diagrams"] = diagrams
    io.write_json(cfg.out / f"picture_{fam}.json", doc)
    io.write_frames_svg(cfg.out / f"frames_{fam}", mp)
    return mp


def _rotation_uv(P, angle):
    c, s = np.cos(angle), np.sin(angle)
    Q = P.copy()
    Q[:, 1] = c * P[:, 1] - s * P[:, 2]
    Q[:, 2] = s * P[:, 1] + c * P[:, 2]
    return Q


def periodicity(mp: MotionPicture, n: int, tol: float) -> str:
    """Vertex-level check that horizontal frames have period 2pi/n in (u, v)."""
    from scipy.spatial import cKDTree

    if mp.family != "horizontal" or n < 1:
        return "not applicable"
    worst = 0.0
    for fr in mp.frames:
        if not fr.curves:
            continue
        P = np.concatenate(fr.curves)
        dist, _ = cKDTree(P).query(_rotation_uv(P, 2 * np.pi / n))
        worst = max(worst, float(dist.max()))
    if worst <= tol:
        return f"period 2π/{n} confirmed"
    return f"period 2π/{n} rejected (deviation {worst:.3g})"


def cmd_analyze(cfg: PipelineConfig, picture_path) -> dict:
    doc = io.read_json(picture_path)
    mp = MotionPicture.from_dict(doc)
    rows, sigs = [], []
    for fr in mp.frames:
        row = {"t": fr.parameter, "components": fr.component_count, "nudged": fr.nudged}
        sig = None
        try:
            sig = signature(planar_project_frame(fr, seed=cfg.view_seed))
            row["signature"] = sig.to_dict()
        except DiagramError as exc:
            row["error"] = str(exc)
        rows.append(row)
        sigs.append(sig)
    report = {
        "family": mp.family,
        "frames": rows,
        "events": [{"t": e.value, "kind": e.kind, "multiplicity": e.multiplicity,
                    "degenerate": e.degenerate_set is not None} for e in mp.events],
        "note": "equal signatures are necessary, not sufficient, for isotopy",
    }
    source = None
    if mp.source:
        source = Path(mp.source)
        if not source.is_absolute():
            source = Path(picture_path).parent / source
    if mp.family != "radial":
        report["normal_form"] = check_normal_form(mp).to_dict()
        if source is not None and source.exists():
            surface = load_surface(source)
            report["morse_balance"] = morse_counts(detect_events(surface, mp.family, tilt=1e-4, seed=cfg.seed))
            n = int(surface.meta.get("n", 0))
            report["periodicity"] = periodicity(mp, n, cfg.tol.symmetry * surface.scale) if n else "untwisted"
    elif len(mp.frames) % 2 == 0:
        # default angles are uniform on the circle, so frame k + N/2 sits at theta + pi
        half = len(mp.frames) // 2
        same = all(a is not None and b is not None and signatures_equal(a, b) for a, b in zip(sigs[:half], sigs[half:]))
        report["periodicity"] = "period π confirmed by signatures" if same else "period π not confirmed"
    io.write_json(cfg.out / f"report_{mp.family}.json", report)
    return report


def cmd_export(cfg: PipelineConfig, source, fmt: str) -> list[Path]:
    src = Path(source)
    d = io.read_json(src)
    stem = cfg.out / src.stem
    if fmt == "json":
        return [io.write_json(stem.with_suffix(".json"), d)]
    if "frames" in d:
        if fmt != "svg":
            raise ValueError("motion pictures export to svg or json")
        return io.write_frames_svg(cfg.out / f"{src.stem}_svg", MotionPicture.from_dict(d))
    if fmt != "obj":
        raise ValueError("surfaces and diagrams export to obj or json")
    if "height" in d:
        diag = ImmersedDiagram3.from_dict(d)
    else:
        diag = project_generic(Surface4.from_dict(d.get("surface", d)), cfg.drop, cfg.perturb, cfg.seed, cfg.tol)
    return [io.write_obj(stem.with_suffix(".obj"), diag.vertices, diag.triangles, f"drop {cfg.drop}")]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twistspin", description="Twist-spun 2-knots: build, project, slice, analyze.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--arc", default="trefoil", help="trefoil, unknot, or a JSON arc file")
    common.add_argument("--n", type=int, default=0, help="twist count")
    common.add_argument("--m", type=int, default=48, help="angular samples")
    common.add_argument("--samples", type=int, default=60, help="arc vertices for presets")
    common.add_argument("--drop", choices=DROP_AXES, default="x")
    common.add_argument("--perturb", type=float, default=0.0, help="projection rotation magnitude")
    common.add_argument("--family", choices=FAMILIES, default="horizontal")
    common.add_argument("--frames", type=int, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None, help="relative intersection tolerance")
    common.add_argument("--out", type=Path, default=None)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="spin or twist-spin an arc")
    sp = sub.add_parser("project", parents=[common], help="project a surface to R^3")
    sp.add_argument("--surface", type=Path, default=None)
    sp = sub.add_parser("slice", parents=[common], help="motion picture of a surface or diagram")
    sp.add_argument("--source", type=Path, default=None)
    sp = sub.add_parser("analyze", parents=[common], help="signatures, events and normal form of a picture")
    sp.add_argument("--picture", type=Path, default=None)
    sp = sub.add_parser("export", parents=[common], help="convert a persisted object")
    sp.add_argument("--source", type=Path, required=True)
    sp.add_argument("--format", choices=("obj", "svg", "json"), default="obj")
    return p


def config_from_args(args) -> PipelineConfig:
    tol = Tolerances() if args.tol is None else replace(Tolerances(), intersect=args.tol)
    return PipelineConfig(arc=args.arc, n=args.n, m=args.m, samples=args.samples, drop=args.drop,
                          perturb=args.perturb, seed=args.seed, tol=tol, frames=args.frames, family=args.family,
                          out=args.out or default_out_dir())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "build":
            rep = cmd_build(cfg)
            print(f"chi={rep['euler_characteristic']} closed={rep['closed']} orientable={rep['orientable']} "
                  f"embedded={rep.get('embedded')}")
            if not (rep["closed"] and rep["orientable"] and rep["euler_characteristic"] == 2):
                return EXIT_VALIDATION
        elif args.command == "project":
            s = cmd_project(cfg, args.surface or cfg.out / "surface.json")
            print(" ".join(f"{k}={v}" for k, v in s.items()))
        elif args.command == "slice":
            default = cfg.out / ("diagram.json" if cfg.family == "radial" else "surface.json")
            mp = cmd_slice(cfg, args.source or default)
            flagged = sum(f.nudged for f in mp.frames)
            print(f"{len(mp.frames)} frames, {len(mp.events)} events, {flagged} nudged")
        elif args.command == "analyze":
            rep = cmd_analyze(cfg, args.picture or cfg.out / f"picture_{cfg.family}.json")
            if "normal_form" in rep:
                nf = rep["normal_form"]
                print(f"normal form ok={nf['ok']} {nf['condition_results']}")
            if "morse_balance" in rep:
                print(f"morse balance={rep['morse_balance']['balance']}")
            if "periodicity" in rep:
                print(rep["periodicity"])
        elif args.command == "export":
            for path in cmd_export(cfg, args.source, args.format):
                print(path)
    except (GenericityError, StitchingError, OverBroadBand) as exc:
        print(f"genericity failure: {exc}\nretry with another --seed or a small --perturb such as 1e-6",
              file=sys.stderr)
        return EXIT_GENERIC
    except (OSError, json.JSONDecodeError) as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TopologyError, KeyError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
