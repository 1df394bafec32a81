"""Forward design maps over discrete print/band choices and inverse design."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .model import BandSpec, FoldSolution, HingeSpec, JointConfig, SolverError, solve_equilibrium

POLYHEDRA = ("tetrahedron", "square_pyramid", "cube", "octahedron", "dodecahedron")

CSV_HEADER = ("band", "layers", "hook_spacing_mm", "alpha_deg", "band_slack", "stop_limited")


@dataclass(frozen=True)
class SweepGrid:
    hook_spacings: Tuple[float, ...]
    bands: Tuple[BandSpec, ...]
    hinge_variants: Tuple[HingeSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "hook_spacings", tuple(self.hook_spacings))
        object.__setattr__(self, "bands", tuple(self.bands))
        object.__setattr__(self, "hinge_variants", tuple(self.hinge_variants))
        if not (self.hook_spacings and self.bands and self.hinge_variants):
            raise ValueError("sweep grid needs at least one spacing, band and hinge")
        if any(b <= a for a, b in zip(self.hook_spacings, self.hook_spacings[1:])):
            raise ValueError("hook spacings must be strictly increasing")

    def __len__(self):
        return len(self.hook_spacings) * len(self.bands) * len(self.hinge_variants)

    def joints(self) -> Iterable[JointConfig]:
        """Joint configs in map order: band, then hinge, then spacing."""
        for band in self.bands:
            for hinge in self.hinge_variants:
                for spacing in self.hook_spacings:
                    yield JointConfig(hinge=hinge, band=band, hook_spacing=spacing)


@dataclass(frozen=True)
class MapEntry:
    joint: JointConfig
    solution: FoldSolution

    @property
    def key(self) -> Tuple[float, str, Optional[int]]:
        return (self.joint.hook_spacing, self.joint.band.label, self.joint.hinge.layers)


@dataclass(frozen=True)
class DesignMapGrid:
    entries: Tuple[MapEntry, ...]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def lookup(self, hook_spacing: float, band: str, layers: Optional[int]) -> FoldSolution:
        for e in self.entries:
            if e.key == (hook_spacing, band, layers):
                return e.solution
        raise KeyError((hook_spacing, band, layers))


@dataclass(frozen=True)
class DesignQuery:
    target_angle: float
    tolerance: float
    grid: SweepGrid

    def __post_init__(self):
        if not 0 < self.target_angle < math.pi:
            raise ValueError("target angle must lie in (0, pi)")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")


@dataclass(frozen=True)
class DesignResult:
    joint: JointConfig
    predicted: float
    error: float
    within_tolerance: bool


class GridPointError(SolverError):
    def __init__(self, joint: JointConfig, cause: Exception):
        super().__init__(
            f"solver failed at band={joint.band.label!r} layers={joint.hinge.layers} "
            f"hook_spacing={joint.hook_spacing:g} m: {cause}"
        )
        self.joint = joint


def sweep(grid: SweepGrid, **solver) -> DesignMapGrid:
    """Solve every grid point; ``solver`` options go to :func:`solve_equilibrium`."""
    entries = []
    for joint in grid.joints():
        try:
            entries.append(MapEntry(joint, solve_equilibrium(joint, **solver)))
        except SolverError as exc:
            raise GridPointError(joint, exc) from exc
    return DesignMapGrid(tuple(entries))


def inverse_design(query: DesignQuery, **solver) -> DesignResult:
    """Grid member whose predicted fold angle is closest to the target.

    Exact ties go to the thinner hinge (faster print), then the shorter hook
    spacing, then the band listed first.
    """
    if len(query.grid) == 0:
        raise ValueError("empty candidate grid")
    dmap = sweep(query.grid, **solver)
    band_rank = {b: i for i, b in enumerate(query.grid.bands)}
    best = min(
        dmap.entries,
        key=lambda e: (
            abs(e.solution.alpha - query.target_angle),
            e.joint.hinge.thickness,
            e.joint.hook_spacing,
            band_rank[e.joint.band],
        ),
    )
    error = abs(best.solution.alpha - query.target_angle)
    return DesignResult(
        joint=best.joint,
        predicted=best.solution.alpha,
        error=error,
        within_tolerance=error <= query.tolerance,
    )


def polyhedron_targets(name: str) -> List[float]:
    """Interior dihedral angles (rad), one per hinge class of the solid."""
    targets = {
        "tetrahedron": [math.acos(1 / 3)],
        "square_pyramid": [math.atan(math.sqrt(2)), math.acos(-1 / 3)],
        "cube": [math.pi / 2],
        "octahedron": [math.acos(-1 / 3)],
        "dodecahedron": [math.acos(-1 / math.sqrt(5))],
    }
    try:
        return list(targets[name])
    except KeyError:
        raise ValueError(f"unknown polyhedron {name!r}; expected one of {', '.join(POLYHEDRA)}") from None


def _sort_key(entry: MapEntry, band_rank, hinge_rank):
    return (band_rank[entry.joint.band.label], hinge_rank[entry.joint.hinge], entry.joint.hook_spacing)


def export_map(dmap: DesignMapGrid, out=None) -> str:
    """Write the map as CSV; returns the text and also writes to ``out`` if given."""
    if not len(dmap):
        raise ValueError("cannot export an empty map")
    band_rank: Dict[str, int] = {}
    hinge_rank: Dict[HingeSpec, int] = {}
    for e in dmap.entries:
        band_rank.setdefault(e.joint.band.label, len(band_rank))
        hinge_rank.setdefault(e.joint.hinge, len(hinge_rank))
    rows = sorted(dmap.entries, key=lambda e: _sort_key(e, band_rank, hinge_rank))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for e in rows:
        w.writerow([
            e.joint.band.label,
            "" if e.joint.hinge.layers is None else e.joint.hinge.layers,
            f"{e.joint.hook_spacing * 1e3:.4f}",
            f"{e.solution.alpha_deg:.4f}",
            str(e.solution.band_slack).lower(),
            str(e.solution.stop_limited).lower(),
        ])
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", newline="") as fh:
                fh.write(text)
    return text


def import_map(source) -> List[dict]:
    """Parse a map CSV back into rows (SI spacing, degrees for angles)."""
    if hasattr(source, "read"):
        text = source.read()
    elif "\n" in str(source):
        text = str(source)
    else:
        with open(source, newline="") as fh:
            text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected map header {reader.fieldnames!r}")
    rows = []
    for r in reader:
        rows.append({
            "band": r["band"],
            "layers": int(r["layers"]) if r["layers"] else None,
            "hook_spacing": float(r["hook_spacing_mm"]) / 1e3,
            "alpha_deg": float(r["alpha_deg"]),
            "band_slack": r["band_slack"] == "true",
            "stop_limited": r["stop_limited"] == "true",
        })
    return rows


def spacing_range(start: float, stop: float, step: float) -> Tuple[float, ...]:
    """Inclusive, evenly stepped spacings; built from integer multiples to avoid drift."""
    if not step > 0 or stop < start:
        raise ValueError("need step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9))
    return tuple(start + i * step for i in range(n + 1))


def default_grid(config=None, layers: Sequence[int] = (1, 2, 3), bands: Optional[Sequence[str]] = None,
                 spacings: Optional[Sequence[float]] = None) -> SweepGrid:
    from .config import ToolConfig

    cfg = config or ToolConfig()
    labels = list(bands) if bands is not None else list(cfg.bands)
    return SweepGrid(
        hook_spacings=tuple(spacings) if spacings is not None else spacing_range(0.020, 0.060, 0.0005),
        bands=tuple(cfg.band(b) for b in labels),
        hinge_variants=tuple(cfg.hinge(n) for n in layers),
    )
