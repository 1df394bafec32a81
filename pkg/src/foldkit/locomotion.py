"""Vibration-driven planar locomotion of a folded module with two ERM motors.

Forward speed follows the slip-stick impulse, proportional to the summed
centripetal forces (omega squared); yaw follows the motor speed difference
(linear in omega) plus a center-of-mass bias proportional to speed.  All
gains are calibration inputs.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

TRAJECTORY_HEADER = ("t", "x_m", "y_m", "heading_rad")
SCHEDULE_HEADER = ("duty1", "duty2", "duration_s")


@dataclass(frozen=True)
class ModuleBody:
    eccentric_mass: float
    eccentric_radius: float
    omega_max: float
    k_v: float
    k_omega: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("eccentric_mass", "eccentric_radius", "omega_max", "k_v"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be > 0, got {v!r}")
        for name in ("k_omega", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class Segment:
    duty_1: float
    duty_2: float
    duration: float

    def __post_init__(self):
        for d in (self.duty_1, self.duty_2):
            if not 0 <= d <= 1:
                raise ValueError(f"duty must lie in [0, 1], got {d!r}")
        if not self.duration > 0:
            raise ValueError(f"segment duration must be > 0, got {self.duration!r}")


@dataclass(frozen=True)
class DutySchedule:
    segments: Tuple[Segment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @classmethod
    def of(cls, *segments: Tuple[float, float, float]) -> "DutySchedule":
        return cls(tuple(Segment(*s) for s in segments))

    @property
    def boundaries(self) -> List[float]:
        """Start time of each segment followed by the end time."""
        out = [0.0]
        for s in self.segments:
            out.append(out[-1] + s.duration)
        return out


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(a, dtype=float) for a in (self.t, self.x, self.y, self.heading)]
        if len({a.shape for a in arrs}) != 1 or arrs[0].ndim != 1:
            raise ValueError("trajectory columns must be 1-D and equally long")
        if not all(np.all(np.isfinite(a)) for a in arrs):
            raise ValueError("trajectory values must be finite")
        if np.any(np.diff(arrs[0]) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        for name, a in zip(("t", "x", "y", "heading"), arrs):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __len__(self):
        return len(self.t)

    def window(self, t0: float, t1: float) -> "Trajectory":
        m = (self.t >= t0) & (self.t <= t1)
        return Trajectory(self.t[m], self.x[m], self.y[m], self.heading[m])

    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])


class BodyRates(NamedTuple):
    v: float
    yaw_rate: float


def duty_to_speed(duty: float, body: ModuleBody) -> float:
    if not 0 <= duty <= 1:
        raise ValueError(f"duty must lie in [0, 1], got {duty!r}")
    return duty * body.omega_max


def centripetal_force(body: ModuleBody, omega: float) -> float:
    if omega < 0:
        raise ValueError("motor speed must be >= 0")
    return body.eccentric_mass * body.eccentric_radius * omega**2


def body_rates(body: ModuleBody, omega_1: float, omega_2: float) -> BodyRates:
    v = body.k_v * (centripetal_force(body, omega_1) + centripetal_force(body, omega_2))
    return BodyRates(v, body.k_omega * (omega_1 - omega_2) + body.beta * v)


def simulate(
    body: ModuleBody,
    schedule: DutySchedule,
    dt: float,
    *,
    heading_noise: float = 0.0,
    seed: Optional[int] = None,
) -> Trajectory:
    """Explicit-Euler unicycle integration from the origin, heading 0.

    Each segment is split into a whole number of equal steps no longer than
    ``dt``.  ``heading_noise`` adds a seeded Gaussian heading increment with
    standard deviation ``heading_noise * sqrt(step)`` per step.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    rng = np.random.default_rng(seed) if heading_noise else None
    ts, xs, ys, hs = [0.0], [0.0], [0.0], [0.0]
    t = x = y = th = 0.0
    for seg in schedule.segments:
        v, w = body_rates(body, duty_to_speed(seg.duty_1, body), duty_to_speed(seg.duty_2, body))
        n = max(1, math.ceil(seg.duration / dt - 1e-9))
        h = seg.duration / n
        t_start = t
        for k in range(1, n + 1):
            x += v * math.cos(th) * h
            y += v * math.sin(th) * h
            th += w * h
            if rng is not None:
                th += heading_noise * math.sqrt(h) * rng.standard_normal()
            t = t_start + k * h
            ts.append(t)
            xs.append(x)
            ys.append(y)
            hs.append(th)
    return Trajectory(np.array(ts), np.array(xs), np.array(ys), np.array(hs))


class InsufficientSamplesError(ValueError):
    pass


def fit_curvature(traj: Trajectory, *, collinear_tol: float = 1e-12) -> float:
    """Signed curvature from an algebraic (Kasa) least-squares circle fit.

    Positive for counter-clockwise turning.  Straight (or stationary) paths
    give 0.
    """
    if len(traj) < 3:
        raise InsufficientSamplesError(f"need at least 3 samples, got {len(traj)}")
    pts = traj.points()
    centre = pts.mean(axis=0)
    u = pts - centre
    scale = float(np.sqrt((u**2).sum(axis=1).mean()))
    if scale == 0.0:
        return 0.0
    u = u / scale
    sv = np.linalg.svd(u, compute_uv=False)
    if sv[-1] <= collinear_tol * sv[0]:
        return 0.0
    # x^2 + y^2 + D x + E y + F = 0
    a = np.column_stack([u, np.ones(len(u))])
    b = -(u**2).sum(axis=1)
    (d, e, f), *_ = np.linalg.lstsq(a, b, rcond=None)
    r2 = d * d / 4 + e * e / 4 - f
    if not r2 > 0:
        return 0.0
    radius = math.sqrt(r2) * scale
    c = np.array([-d / 2, -e / 2])
    step = np.diff(u, axis=0)
    to_c = c - u[:-1]
    turn = float(np.sum(step[:, 0] * to_c[:, 1] - step[:, 1] * to_c[:, 0]))
    return math.copysign(1.0 / radius, turn) if turn != 0 else 1.0 / radius


def segment_curvatures(traj: Trajectory, schedule: DutySchedule) -> List[float]:
    """Fitted curvature of the samples inside each schedule segment."""
    out = []
    b = schedule.boundaries
    for t0, t1 in zip(b, b[1:]):
        out.append(fit_curvature(traj.window(t0, t1 + 1e-12)))
    return out


def solve_straight_duty(body: ModuleBody, duty_1: float, *, tol: float = 1e-9) -> Optional[float]:
    """Duty for motor 2 that cancels yaw with motor 1 at ``duty_1``.

    Searches ``[0, duty_1]`` by bisection until ``|yaw rate| <= tol`` rad/s.
    Returns None when the yaw rate does not change sign on that interval.
    """
    if not 0 < duty_1 <= 1:
        raise ValueError(f"duty_1 must lie in (0, 1], got {duty_1!r}")
    w1 = duty_to_speed(duty_1, body)
    yaw = lambda d2: body_rates(body, w1, duty_to_speed(d2, body)).yaw_rate  # noqa: E731

    lo, hi = 0.0, duty_1
    y_lo, y_hi = yaw(lo), yaw(hi)
    if y_hi == 0:
        return hi
    if y_lo == 0:
        return lo
    if (y_lo > 0) == (y_hi > 0):
        return None
    while True:
        mid = 0.5 * (lo + hi)
        ym = yaw(mid)
        if abs(ym) <= tol or hi - lo <= 4 * np.finfo(float).eps:
            return mid
        if (ym > 0) == (y_lo > 0):
            lo, y_lo = mid, ym
        else:
            hi, y_hi = mid, ym


def calibrate_bias(body: ModuleBody, duty_1: float, duty_2: float) -> ModuleBody:
    """Copy of ``body`` whose bias makes the duty pair drive straight."""
    w1, w2 = duty_to_speed(duty_1, body), duty_to_speed(duty_2, body)
    v = body_rates(body, w1, w2).v
    if v == 0:
        raise ValueError("cannot calibrate bias at zero forward speed")
    return replace(body, beta=-body.k_omega * (w1 - w2) / v)


# -- CSV ---------------------------------------------------------------------------


def trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_HEADER)
    for row in zip(traj.t, traj.x, traj.y, traj.heading):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def read_trajectory(source) -> Trajectory:
    rows = _read_rows(source, TRAJECTORY_HEADER)
    cols = np.array(rows, dtype=float).reshape(-1, 4).T
    return Trajectory(*cols)


def read_schedule(source) -> DutySchedule:
    rows = _read_rows(source, SCHEDULE_HEADER)
    return DutySchedule(tuple(Segment(*map(float, r)) for r in rows))


def _read_rows(source, header: Sequence[str]) -> List[List[str]]:
    text = Path(source).read_text() if not hasattr(source, "read") else source.read()
    reader = csv.reader(io.StringIO(text))
    try:
        got = next(reader)
    except StopIteration:
        raise ValueError("empty CSV") from None
    if tuple(c.strip() for c in got) != tuple(header):
        raise ValueError(f"expected header {','.join(header)}, got {','.join(got)}")
    rows = []
    for n, r in enumerate(reader, start=2):
        if not r:
            continue
        if len(r) != len(header):
            raise ValueError(f"line {n}: expected {len(header)} fields, got {len(r)}")
        try:
            [float(v) for v in r]
        except ValueError:
            raise ValueError(f"line {n}: non-numeric value in {r!r}") from None
        rows.append(r)
    return rows
