"""Tolerances and pipeline configuration.

All geometric tolerances are relative to a length scale (usually the
bounding-box diagonal of the object being processed); multiply by
``scale`` before use.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

# intersection predicate, relative
INTERSECT_TOL = 1e-9
# endpoint stitching, relative
STITCH_TOL = 1e-7
# vertex-exact symmetry checks, relative
SYMMETRY_TOL = 1e-12
# shift applied to a slicing parameter that lands on a vertex, relative
NUDGE = 1e-6
# minimal sine of the angle between intersecting sheets
TRANSVERSE_SIN = 1e-7

OUT_ENV = "TWISTSPIN_OUT"

DROP_AXES = ("x", "y", "u", "v")
FAMILIES = ("vertical", "horizontal", "radial")


@dataclass(frozen=True)
class Tolerances:
    intersect: float = INTERSECT_TOL
    stitch: float = STITCH_TOL
    symmetry: float = SYMMETRY_TOL
    nudge: float = NUDGE
    transverse_sin: float = TRANSVERSE_SIN

    def scaled(self, scale: float) -> "Tolerances":
        return replace(
            self,
            intersect=self.intersect * scale,
            stitch=self.stitch * scale,
            symmetry=self.symmetry * scale,
            nudge=self.nudge * scale,
        )


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "twistspin_out"))


@dataclass
class PipelineConfig:
    """Everything a CLI run needs; validated on construction."""

    arc: str = "trefoil"
    n: int = 0
    m: int = 48
    samples: int = 60
    scale: float = 1.0
    drop: str = "x"
    perturb: float = 0.0
    seed: int = 0
    tol: Tolerances = field(default_factory=Tolerances)
    frames: int | None = None
    family: str = "horizontal"
    view_seed: int = 0
    out: Path = field(default_factory=default_out_dir)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"twist count must be >= 0, got {self.n}")
        if self.m < 8 or self.m % max(self.n, 1) != 0:
            raise ValueError(
                f"angular samples m={self.m} must be >= 8 and a multiple of max(n, 1)={max(self.n, 1)}"
            )
        if self.drop not in DROP_AXES:
            raise ValueError(f"drop axis must be one of {DROP_AXES}")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.tol.intersect <= 0 or self.tol.stitch <= 0:
            raise ValueError("tolerances must be positive")
        if not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")
        self.out = Path(self.out)
