"""Tool-wide defaults and band presets."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, Optional

from .model import ANGLE_TOL, DEFAULT_GAMMA, DEFAULT_LAYER_HEIGHT, DEFAULT_YOUNG_MODULUS, SCAN_STEP, BandSpec, HingeSpec

CONFIG_ENV = "FOLDKIT_CONFIG"

# Band dimensions are the three bands characterized in the folding tests.
# Stiffness values are placeholders and must be calibrated per batch.
PLACEHOLDER_STIFFNESS = {"yellow": 200.0, "transparent": 300.0, "black": 400.0}


def _default_bands() -> Dict[str, BandSpec]:
    return {
        "yellow": BandSpec(diameter=0.012, stiffness=PLACEHOLDER_STIFFNESS["yellow"], label="yellow"),
        "transparent": BandSpec(diameter=0.015, stiffness=PLACEHOLDER_STIFFNESS["transparent"], label="transparent"),
        "black": BandSpec(diameter=0.025, stiffness=PLACEHOLDER_STIFFNESS["black"], label="black"),
    }


@dataclass(frozen=True)
class ToolConfig:
    young_modulus: float = DEFAULT_YOUNG_MODULUS
    layer_height: float = DEFAULT_LAYER_HEIGHT
    gamma: float = DEFAULT_GAMMA
    hinge_width: float = 0.010
    hinge_length: float = 0.002
    bands: Dict[str, BandSpec] = field(default_factory=_default_bands)
    # labels whose stiffness is still the shipped placeholder
    uncalibrated: frozenset = frozenset(PLACEHOLDER_STIFFNESS)
    angle_tol: float = ANGLE_TOL
    scan_step: float = SCAN_STEP
    precision: int = 4

    def __post_init__(self):
        for name in ("young_modulus", "layer_height", "hinge_width", "hinge_length", "angle_tol", "scan_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.scan_step > SCAN_STEP:
            raise ValueError(f"scan_step must be <= {SCAN_STEP}")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.precision < 0:
            raise ValueError("precision must be >= 0")

    @property
    def solver(self) -> Dict[str, float]:
        return {"step": self.scan_step, "angle_tol": self.angle_tol}

    def band(self, label: str) -> BandSpec:
        try:
            return self.bands[label]
        except KeyError:
            raise KeyError(f"unknown band preset {label!r}; known: {', '.join(self.bands)}") from None

    def hinge(self, layers: int) -> HingeSpec:
        return HingeSpec.from_layers(
            layers,
            width=self.hinge_width,
            length=self.hinge_length,
            young_modulus=self.young_modulus,
            layer_height=self.layer_height,
        )


def load_config(path: Optional[str] = None) -> ToolConfig:
    """Read a JSON config file over the built-in defaults.

    Falls back to ``$FOLDKIT_CONFIG`` when ``path`` is None; returns the
    defaults when neither is set.  Band entries are
    ``{"diameter": m, "stiffness": N/m, "gamma": ...}``; giving a stiffness
    marks that band as calibrated.
    """
    path = path or os.environ.get(CONFIG_ENV)
    cfg = ToolConfig()
    if not path:
        return cfg
    raw = json.loads(Path(path).read_text())
    known = {f.name for f in fields(ToolConfig)} - {"bands", "uncalibrated"}
    unknown = set(raw) - known - {"bands"}
    if unknown:
        raise ValueError(f"unknown config fields: {', '.join(sorted(unknown))}")
    updates = {k: raw[k] for k in known if k in raw}
    bands = dict(cfg.bands)
    uncalibrated = set(cfg.uncalibrated)
    gamma = updates.get("gamma", cfg.gamma)
    for label, spec in raw.get("bands", {}).items():
        base = bands.get(label)
        if base is None and ("diameter" not in spec or "stiffness" not in spec):
            raise ValueError(f"band {label!r} needs diameter and stiffness")
        bands[label] = BandSpec(
            diameter=spec.get("diameter", base.diameter if base else 0.0),
            stiffness=spec.get("stiffness", base.stiffness if base else 0.0),
            gamma=spec.get("gamma", gamma),
            label=label,
        )
        if "stiffness" in spec:
            uncalibrated.discard(label)
    if "gamma" in updates:
        bands = {k: b if k in raw.get("bands", {}) and "gamma" in raw["bands"][k] else replace(b, gamma=gamma)
                 for k, b in bands.items()}
    return replace(cfg, bands=bands, uncalibrated=frozenset(uncalibrated), **updates)
