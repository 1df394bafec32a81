"""Hinge/band equilibrium model for elastic-band self-folding joints.

Angles follow the interior-dihedral convention: ``alpha = pi`` is the flat,
as-printed state and smaller values are more folded.  All quantities are SI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

DEFAULT_YOUNG_MODULUS = 2.0e9  # Pa, conductive PLA (assumed)
DEFAULT_LAYER_HEIGHT = 0.0002  # m
DEFAULT_GAMMA = 0.9

FLAT_EPS = 1e-6  # rad, offset from pi used to probe the flat state
SCAN_STEP = 0.005  # rad, max spacing of the descent grid
ANGLE_TOL = 1e-9  # rad, bisection bracket width
RESIDUAL_TOL = 1e-12  # N*m
STABILITY_STEP = 1e-6  # rad


class SolverError(RuntimeError):
    """No stable balance could be bracketed."""


def _positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class HingeSpec:
    thickness: float
    width: float
    length: float
    young_modulus: float = DEFAULT_YOUNG_MODULUS
    layers: Optional[int] = None
    layer_height: float = DEFAULT_LAYER_HEIGHT

    def __post_init__(self):
        _positive("thickness", self.thickness)
        _positive("width", self.width)
        _positive("length", self.length)
        _positive("young_modulus", self.young_modulus)
        _positive("layer_height", self.layer_height)
        if self.layers is not None:
            if isinstance(self.layers, bool) or int(self.layers) != self.layers or self.layers < 1:
                raise ValueError(f"layers must be a positive integer, got {self.layers!r}")
            if not math.isclose(self.thickness, self.layers * self.layer_height, rel_tol=1e-12):
                raise ValueError(
                    f"thickness {self.thickness!r} does not equal layers*layer_height "
                    f"({self.layers} x {self.layer_height})"
                )

    @classmethod
    def from_layers(
        cls,
        layers: int,
        width: float,
        length: float,
        young_modulus: float = DEFAULT_YOUNG_MODULUS,
        layer_height: float = DEFAULT_LAYER_HEIGHT,
    ) -> "HingeSpec":
        if isinstance(layers, bool) or int(layers) != layers or layers < 1:
            raise ValueError(f"layers must be a positive integer, got {layers!r}")
        return cls(
            thickness=layers * layer_height,
            width=width,
            length=length,
            young_modulus=young_modulus,
            layers=int(layers),
            layer_height=layer_height,
        )


@dataclass(frozen=True)
class BandSpec:
    diameter: float
    stiffness: float
    gamma: float = DEFAULT_GAMMA
    label: str = ""

    def __post_init__(self):
        _positive("diameter", self.diameter)
        if not (self.stiffness >= 0 and math.isfinite(self.stiffness)):
            raise ValueError(f"stiffness must be >= 0, got {self.stiffness!r}")
        if not (0 < self.gamma <= 1):
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma!r}")


@dataclass(frozen=True)
class JointConfig:
    hinge: HingeSpec
    band: BandSpec
    hook_spacing: float
    stop_angle: Optional[float] = None

    def __post_init__(self):
        _positive("hook_spacing", self.hook_spacing)
        if self.stop_angle is not None and not (0 < self.stop_angle < math.pi):
            raise ValueError(f"stop_angle must lie in (0, pi), got {self.stop_angle!r}")


@dataclass(frozen=True)
class FoldSolution:
    alpha: float
    band_slack: bool
    stop_limited: bool
    stable: bool
    residual_moment: float

    @property
    def alpha_deg(self) -> float:
        return math.degrees(self.alpha)


def _check_angle(alpha) -> None:
    a = np.asarray(alpha, dtype=float)
    if np.any(~(a >= 0)) or np.any(a > math.pi):
        raise ValueError(f"angle must lie in [0, pi], got {alpha!r}")


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def hook_distance(hook_spacing: float, alpha):
    """Distance between the two hooks at fold angle ``alpha``."""
    _check_angle(alpha)
    return _out(hook_spacing * np.sin(np.asarray(alpha, dtype=float) / 2))


def band_rest_length(band: BandSpec) -> float:
    return band.gamma * math.pi * band.diameter / 2


def band_extension(joint: JointConfig, alpha):
    """Signed stretch of the band; negative means slack."""
    return _out(hook_distance(joint.hook_spacing, alpha) - band_rest_length(joint.band))


def band_force(joint: JointConfig, alpha):
    # bands cannot push
    return _out(np.maximum(0.0, 2 * joint.band.stiffness * band_extension(joint, alpha)))


def band_moment(joint: JointConfig, alpha):
    # cos(alpha/2) written as sin((pi - alpha)/2) so the flat state gives exactly 0
    lever = joint.hook_spacing / 2 * np.sin((math.pi - np.asarray(alpha, dtype=float)) / 2)
    return _out(band_force(joint, alpha) * lever)


def hinge_stiffness(hinge: HingeSpec) -> float:
    """Torsional stiffness of a thinned strip treated as a short cantilever."""
    return hinge.young_modulus * hinge.width * hinge.thickness**3 / (12 * hinge.length)


def hinge_moment(hinge: HingeSpec, alpha):
    _check_angle(alpha)
    return _out(hinge_stiffness(hinge) * (math.pi - np.asarray(alpha, dtype=float)))


def net_closing_moment(joint: JointConfig, alpha):
    """Band moment minus hinge moment; positive values close the joint further."""
    return _out(band_moment(joint, alpha) - hinge_moment(joint.hinge, alpha))


def closing_moment_fn(joint: JointConfig):
    """Scalar-only closing moment, for tight solver loops.

    Same formula as :func:`net_closing_moment` without the array handling
    or angle validation.
    """
    half_l = joint.hook_spacing / 2
    rest = band_rest_length(joint.band)
    two_kb = 2 * joint.band.stiffness
    kh = hinge_stiffness(joint.hinge)
    sin, pi = math.sin, math.pi

    def g(alpha: float) -> float:
        half = alpha / 2
        force = two_kb * (joint.hook_spacing * sin(half) - rest)
        if force < 0:
            force = 0.0
        return force * half_l * sin((pi - alpha) / 2) - kh * (pi - alpha)

    return g


def stability_check(joint: JointConfig, alpha: float, h: float = STABILITY_STEP) -> bool:
    """True when the closing moment pushes back toward ``alpha`` from both sides.

    At ``alpha = pi`` only the folded side exists; the flat state is stable
    when the joint does not want to start folding.
    """
    g = closing_moment_fn(joint)
    if alpha >= math.pi:
        return g(math.pi - h) <= 0
    above = g(min(alpha + h, math.pi))
    below = g(max(alpha - h, 0.0))
    return above > 0 > below


def solve_equilibrium(
    joint: JointConfig,
    *,
    step: float = SCAN_STEP,
    angle_tol: float = ANGLE_TOL,
) -> FoldSolution:
    """Fold angle reached when the sheet is released flat and settles.

    The first balance met while descending from the flat state is returned,
    which is the one the physical sheet reaches from the print bed.
    """
    if not 0 < step <= SCAN_STEP:
        raise ValueError(f"step must lie in (0, {SCAN_STEP}], got {step!r}")
    if not angle_tol > 0:
        raise ValueError(f"angle_tol must be > 0, got {angle_tol!r}")
    g = closing_moment_fn(joint)

    hi_angle = math.pi - FLAT_EPS
    g_hi = g(hi_angle)
    if not g_hi > 0:
        if math.isnan(g_hi):
            raise SolverError("closing moment is NaN at the flat state")
        return _finish(joint, math.pi, stable=True)

    lo_angle = FLAT_EPS
    n = math.ceil((hi_angle - lo_angle) / step)
    h = (hi_angle - lo_angle) / n
    upper, g_upper = hi_angle, g_hi
    bracket = None
    for i in range(1, n + 1):
        a = hi_angle - i * h if i < n else lo_angle
        ga = g(a)
        if ga <= 0:
            bracket = (a, upper, ga, g_upper)
            break
        upper, g_upper = a, ga
    if bracket is None:
        raise SolverError(
            f"no sign change of the closing moment in ({lo_angle:g}, {hi_angle:g}) rad"
        )

    lo, hi, g_lo, g_hi = bracket
    # invariant: g(lo) <= 0 < g(hi)
    while hi - lo > angle_tol:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm <= 0:
            lo, g_lo = mid, gm
        else:
            hi, g_hi = mid, gm
    root = lo if abs(g_lo) <= abs(g_hi) else hi

    if joint.stop_angle is not None and root < joint.stop_angle:
        return _finish(joint, joint.stop_angle, stable=True, stop_limited=True)
    return _finish(joint, root, stable=stability_check(joint, root))


def _finish(joint: JointConfig, alpha: float, *, stable: bool, stop_limited: bool = False) -> FoldSolution:
    return FoldSolution(
        alpha=alpha,
        band_slack=bool(band_extension(joint, alpha) <= 0),
        stop_limited=stop_limited,
        stable=bool(stable),
        residual_moment=closing_moment_fn(joint)(alpha),
    )


def slack_onset(joint: JointConfig) -> Optional[float]:
    """Angle below which the band goes slack, or None if it is slack even flat."""
    ratio = band_rest_length(joint.band) / joint.hook_spacing
    if ratio >= 1:
        return None
    return 2 * math.asin(ratio)
