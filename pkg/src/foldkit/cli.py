"""Command-line entry point.

Lengths are given in mm and angles in degrees on the command line and in
files; everything is converted to SI before reaching the library.

Exit codes: 0 success, 1 tolerance miss, 2 input error, 3 numeric failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .config import ToolConfig, load_config
from .design import (
    DesignQuery,
    POLYHEDRA,
    SweepGrid,
    export_map,
    inverse_design,
    polyhedron_targets,
    spacing_range,
    sweep,
)
from .locomotion import (
    ModuleBody,
    calibrate_bias,
    read_schedule,
    segment_curvatures,
    simulate,
    solve_straight_duty,
    trajectory_csv,
)
from .model import BandSpec, HingeSpec, JointConfig, SolverError, solve_equilibrium
from .net import (
    Hinge,
    InvalidNetError,
    MissingAngleError,
    NetSpec,
    canonical_net,
    dump_net,
    fold_net,
    geometry_csv,
    load_net,
    net_to_dict,
    predict_fold,
    target_angles,
    validate_net,
)
from .sensing import ClassifierConfig, DegenerateSNRError, classify, events_csv, read_log, snr

EXIT_OK, EXIT_MISS, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4


class InputError(Exception):
    """Bad user input; message names the offending flag."""


def _fail(flag: str, exc: Exception) -> InputError:
    return InputError(f"{flag}: {exc}")


def _mm(x: Optional[float]) -> Optional[float]:
    return None if x is None else x / 1e3


def _csv_list(text: str, cast=str) -> List:
    return [cast(t.strip()) for t in text.split(",") if t.strip()]


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- shared flag groups --------------------------------------------------------------


def _add_hinge_flags(p: argparse.ArgumentParser, multi: bool = False) -> None:
    g = p.add_argument_group("hinge")
    if multi:
        g.add_argument("--layers", default="1,2,3", help="comma-separated layer counts (default 1,2,3)")
    else:
        g.add_argument("--layers", type=int, help="printed layer count")
        g.add_argument("--thickness-mm", type=float, help="hinge thickness, instead of --layers")
    g.add_argument("--width-mm", type=float, help="hinge width W")
    g.add_argument("--hinge-length-mm", type=float, help="hinge length L_hinge")
    g.add_argument("--youngs-gpa", type=float, help="Young's modulus")
    g.add_argument("--layer-height-mm", type=float, help="print layer height")


def _add_band_flags(p: argparse.ArgumentParser, multi: bool = False) -> None:
    g = p.add_argument_group("band")
    if multi:
        g.add_argument("--bands", help="comma-separated band presets (default: all presets)")
    else:
        g.add_argument("--band", default="yellow", help="band preset (default yellow)")
        g.add_argument("--diameter-mm", type=float, help="override band inner diameter")
    g.add_argument("--kb", type=float, help="band stiffness k_b in N/m (overrides the preset)")
    g.add_argument("--gamma", type=float, help="relaxed-length factor (overrides the preset)")


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    _add_hinge_flags(p, multi=True)
    _add_band_flags(p, multi=True)
    g = p.add_argument_group("hook spacing")
    g.add_argument("--spacings-mm", help="explicit comma-separated spacings")
    g.add_argument("--spacing-min-mm", type=float, default=20.0)
    g.add_argument("--spacing-max-mm", type=float, default=60.0)
    g.add_argument("--spacing-step-mm", type=float, default=0.5)


def _material(args, cfg: ToolConfig) -> dict:
    return dict(
        width=_mm(args.width_mm) if args.width_mm is not None else cfg.hinge_width,
        length=_mm(args.hinge_length_mm) if args.hinge_length_mm is not None else cfg.hinge_length,
        young_modulus=args.youngs_gpa * 1e9 if args.youngs_gpa is not None else cfg.young_modulus,
        layer_height=_mm(args.layer_height_mm) if args.layer_height_mm is not None else cfg.layer_height,
    )


_HINGE_FLAGS = {
    "layers": "--layers",
    "thickness": "--thickness-mm",
    "width": "--width-mm",
    "length": "--hinge-length-mm",
    "young_modulus": "--youngs-gpa",
    "layer_height": "--layer-height-mm",
}


def _hinge(args, cfg: ToolConfig, layers: Optional[int]) -> HingeSpec:
    m = _material(args, cfg)
    try:
        if layers is not None:
            return HingeSpec.from_layers(layers, **m)
        thickness = getattr(args, "thickness_mm", None)
        if thickness is None:
            raise ValueError("give --layers or --thickness-mm")
        return HingeSpec(thickness=thickness / 1e3, width=m["width"], length=m["length"],
                         young_modulus=m["young_modulus"], layer_height=m["layer_height"])
    except ValueError as exc:
        field = str(exc).split(" ", 1)[0]
        raise _fail(_HINGE_FLAGS.get(field, "--layers"), exc) from None


def _band(label: str, args, cfg: ToolConfig, warn: bool = True) -> BandSpec:
    try:
        base = cfg.band(label)
    except KeyError as exc:
        raise _fail("--band", exc.args[0]) from None
    diameter = getattr(args, "diameter_mm", None)
    try:
        band = BandSpec(
            diameter=diameter / 1e3 if diameter is not None else base.diameter,
            stiffness=args.kb if args.kb is not None else base.stiffness,
            gamma=args.gamma if args.gamma is not None else base.gamma,
            label=label,
        )
    except ValueError as exc:
        msg = str(exc)
        flag = "--kb" if msg.startswith("stiffness") else "--gamma" if msg.startswith("gamma") else "--diameter-mm"
        raise _fail(flag, exc) from None
    if warn and args.kb is None and label in cfg.uncalibrated:
        print(f"warning: k_b for band {label!r} is an uncalibrated placeholder "
              f"({band.stiffness:g} N/m); pass --kb or set it in the config", file=sys.stderr)
    return band


def _grid(args, cfg: ToolConfig) -> SweepGrid:
    try:
        layers = _csv_list(args.layers, int)
    except ValueError:
        raise InputError(f"--layers: expected comma-separated integers, got {args.layers!r}") from None
    if not layers:
        raise InputError("--layers: no layer counts given")
    labels = _csv_list(args.bands) if args.bands else list(cfg.bands)
    if args.spacings_mm:
        try:
            spacings = tuple(s / 1e3 for s in _csv_list(args.spacings_mm, float))
        except ValueError:
            raise InputError("--spacings-mm: expected comma-separated numbers") from None
    else:
        try:
            spacings = spacing_range(args.spacing_min_mm / 1e3, args.spacing_max_mm / 1e3, args.spacing_step_mm / 1e3)
        except ValueError as exc:
            raise _fail("--spacing-step-mm", exc) from None
    hinges = tuple(_hinge(args, cfg, n) for n in layers)
    bands = []
    for label in labels:
        bands.append(_band(label, args, cfg))
    try:
        return SweepGrid(hook_spacings=spacings, bands=tuple(bands), hinge_variants=hinges)
    except ValueError as exc:
        raise _fail("--spacings-mm", exc) from None


def _deg(x: float, cfg: ToolConfig) -> str:
    return f"{math.degrees(x):.{cfg.precision}f}"


def _bool(b: bool) -> str:
    return "true" if b else "false"


# -- commands ------------------------------------------------------------------------


def cmd_solve(args, cfg: ToolConfig) -> int:
    hinge = _hinge(args, cfg, args.layers)
    band = _band(args.band, args, cfg)
    if args.spacing_mm is None:
        raise InputError("--spacing-mm: required")
    try:
        joint = JointConfig(hinge, band, args.spacing_mm / 1e3,
                            math.radians(args.stop_deg) if args.stop_deg is not None else None)
    except ValueError as exc:
        raise _fail("--stop-deg" if "stop" in str(exc) else "--spacing-mm", exc) from None
    sol = solve_equilibrium(joint, **cfg.solver)
    print(f"alpha_deg={_deg(sol.alpha, cfg)}")
    print(f"alpha_rad={sol.alpha!r}")
    print(f"band_slack={_bool(sol.band_slack)}")
    print(f"stop_limited={_bool(sol.stop_limited)}")
    print(f"stable={_bool(sol.stable)}")
    print(f"residual_Nm={sol.residual_moment:.6e}")
    return EXIT_OK


def cmd_map(args, cfg: ToolConfig) -> int:
    grid = _grid(args, cfg)
    dmap = sweep(grid, **cfg.solver)
    text = export_map(dmap)
    _emit(text, args.out)
    print(f"rows={len(dmap)}", file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK


def _design_targets(args) -> List[float]:
    if args.target_deg is None and args.polyhedron is None:
        raise InputError("--target-deg: give a target angle or --polyhedron")
    poly = []
    if args.polyhedron is not None:
        try:
            poly = polyhedron_targets(args.polyhedron)
        except ValueError as exc:
            raise _fail("--polyhedron", exc) from None
    if args.target_deg is None:
        return poly
    if not 0 < args.target_deg < 180:
        raise InputError(f"--target-deg: must lie in (0, 180), got {args.target_deg}")
    target = math.radians(args.target_deg)
    if poly and not any(abs(math.degrees(t) - args.target_deg) < 1e-3 for t in poly):
        raise InputError(f"--target-deg: {args.target_deg} is not a dihedral angle of {args.polyhedron}")
    return [target]


def cmd_design(args, cfg: ToolConfig) -> int:
    targets = _design_targets(args)
    if not args.tol_deg > 0:
        raise InputError("--tol-deg: must be > 0")
    grid = _grid(args, cfg)
    code = EXIT_OK
    for target in targets:
        res = inverse_design(DesignQuery(target, math.radians(args.tol_deg), grid), **cfg.solver)
        j = res.joint
        print(f"target_deg={_deg(target, cfg)} band={j.band.label} layers={j.hinge.layers} "
              f"hook_spacing_mm={j.hook_spacing * 1e3:.{cfg.precision}f} "
              f"predicted_deg={_deg(res.predicted, cfg)} error_deg={_deg(res.error, cfg)} "
              f"within_tolerance={_bool(res.within_tolerance)}")
        if not res.within_tolerance:
            code = EXIT_MISS
    return code


def cmd_net(args, cfg: ToolConfig) -> int:
    try:
        net = canonical_net(args.name, args.edge_mm / 1e3)
    except ValueError as exc:
        raise _fail("--edge-mm" if "edge" in str(exc) else "name", exc) from None
    code = EXIT_OK
    to_stdout = args.out in (None, "-")
    # keep stdout pure JSON when the net goes there
    info = sys.stderr if to_stdout else sys.stdout
    if args.design:
        grid = _grid(args, cfg)
        chosen = {}
        for t in sorted({h.target_angle for h in net.hinges}):
            res = inverse_design(DesignQuery(t, math.radians(args.tol_deg), grid), **cfg.solver)
            chosen[t] = res.joint
            print(f"target_deg={_deg(t, cfg)} band={res.joint.band.label} layers={res.joint.hinge.layers} "
                  f"hook_spacing_mm={res.joint.hook_spacing * 1e3:.{cfg.precision}f} "
                  f"predicted_deg={_deg(res.predicted, cfg)} within_tolerance={_bool(res.within_tolerance)}", file=info)
            if not res.within_tolerance:
                code = EXIT_MISS
        net = NetSpec(
            faces=net.faces,
            hinges=tuple(Hinge(h.face_a, h.face_b, h.edge_a, h.edge_b, chosen[h.target_angle], h.target_angle, h.id)
                         for h in net.hinges),
            mating=net.mating,
            root_face=net.root_face,
        )
    if to_stdout:
        sys.stdout.write(json.dumps(net_to_dict(net), indent=2) + "\n")
    else:
        dump_net(net, args.out)
        print(f"faces={len(net.faces)} hinges={len(net.hinges)} mating={len(net.mating)}")
    return code


def cmd_fold(args, cfg: ToolConfig) -> int:
    try:
        net = load_net(args.net, cfg)
    except (ValueError, KeyError) as exc:
        raise _fail("--net", exc) from None
    problems = validate_net(net)
    if problems:
        raise InputError("--net: invalid net\n" + "\n".join(f"  {p}" for p in problems))
    if args.predict:
        try:
            folded = predict_fold(net, **cfg.solver)
        except ValueError as exc:
            raise _fail("--predict", exc) from None
    else:
        if args.angles:
            try:
                raw = json.loads(Path(args.angles).read_text())
                angles = {str(k): math.radians(float(v)) for k, v in raw.items()}
            except (ValueError, AttributeError, TypeError) as exc:
                raise _fail("--angles", f"expected a JSON object of hinge id -> degrees ({exc})") from None
        else:
            try:
                angles = target_angles(net)
            except MissingAngleError as exc:
                raise _fail("--angles", exc.args[0]) from None
        try:
            folded = fold_net(net, angles)
        except MissingAngleError as exc:
            raise _fail("--angles", exc.args[0]) from None
        except ValueError as exc:
            raise _fail("--angles", exc) from None
    for hid, a in folded.angles.items():
        line = f"hinge={hid} alpha_deg={_deg(a, cfg)}"
        if folded.solutions:
            s = folded.solutions[hid]
            line += f" band_slack={_bool(s.band_slack)} stop_limited={_bool(s.stop_limited)} stable={_bool(s.stable)}"
        print(line)
    print(f"state={'flat' if folded.is_flat else 'folded'}")
    print(f"closure_error_m={folded.closure_error:.6e}")
    if args.geometry:
        Path(args.geometry).write_text(geometry_csv(folded))
    return EXIT_OK


def _body(args) -> ModuleBody:
    try:
        body = ModuleBody(
            eccentric_mass=args.mass_g / 1e3,
            eccentric_radius=args.radius_mm / 1e3,
            omega_max=args.omega_max,
            k_v=args.kv,
            k_omega=args.komega,
            beta=args.beta,
        )
    except ValueError as exc:
        raise _fail("--body", exc) from None
    if args.calibrate_straight:
        try:
            d1, d2 = _csv_list(args.calibrate_straight, float)
            body = calibrate_bias(body, d1, d2)
        except ValueError as exc:
            raise _fail("--calibrate-straight", exc) from None
    return body


def _add_body_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("module body")
    g.add_argument("--mass-g", type=float, default=0.2, help="eccentric mass")
    g.add_argument("--radius-mm", type=float, default=1.0, help="eccentric radius")
    g.add_argument("--omega-max", type=float, default=1250.0, help="motor speed at full duty, rad/s")
    g.add_argument("--kv", type=float, default=0.16, help="forward speed gain, m/s per N")
    g.add_argument("--komega", type=float, default=1.87e-4, help="yaw gain, rad/s per rad/s")
    g.add_argument("--beta", type=float, default=0.0, help="center-of-mass bias, rad/m")
    g.add_argument("--calibrate-straight", metavar="D1,D2",
                   help="set --beta so that this duty pair (fractions) drives straight")


def cmd_sim(args, cfg: ToolConfig) -> int:
    body = _body(args)
    try:
        schedule = read_schedule(args.schedule)
    except ValueError as exc:
        raise _fail("--schedule", exc) from None
    if not args.dt > 0:
        raise InputError("--dt: must be > 0")
    traj = simulate(body, schedule, args.dt, heading_noise=args.noise, seed=args.seed)
    _emit(trajectory_csv(traj), args.out)
    stream = sys.stderr if args.out in (None, "-") else sys.stdout
    for k, (seg, kappa) in enumerate(zip(schedule.segments, segment_curvatures(traj, schedule))):
        print(f"segment={k} duty1={seg.duty_1:g} duty2={seg.duty_2:g} curvature_per_m={kappa:.6e}", file=stream)
    return EXIT_OK


def cmd_straight(args, cfg: ToolConfig) -> int:
    body = _body(args)
    try:
        d2 = solve_straight_duty(body, args.duty1)
    except ValueError as exc:
        raise _fail("--duty1", exc) from None
    if d2 is None:
        print("duty2=none")
        return EXIT_MISS
    print(f"duty2={d2:.6f}")
    return EXIT_OK


def cmd_classify(args, cfg: ToolConfig) -> int:
    try:
        config = ClassifierConfig(
            baseline_window=args.baseline_window,
            hall_threshold=args.hall_threshold,
            touch_threshold=args.touch_threshold,
            debounce_gap=args.debounce_s,
            min_event=args.min_event_s,
        )
    except ValueError as exc:
        raise _fail("--threshold", exc) from None
    try:
        stream = read_log(args.input, args.kind, args.sample_rate)
        states = classify(stream, config)
    except ValueError as exc:
        raise _fail("--in", exc) from None
    _emit(events_csv(states), args.out)
    out = sys.stderr if args.out in (None, "-") else sys.stdout
    print(f"events={len(states.events)}", file=out)
    if args.snr:
        rep = snr(stream, states)
        print(f"mu_active={rep.mu_active:.6f} mu_inactive={rep.mu_inactive:.6f} "
              f"sigma_noise={rep.sigma_noise:.6f} snr_db={rep.snr_db:.4f}", file=out)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="foldkit", description="Elastic-band self-folding design toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="JSON config file (default: $FOLDKIT_CONFIG if set)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="equilibrium fold angle of one joint")
    _add_hinge_flags(s)
    _add_band_flags(s)
    s.add_argument("--spacing-mm", type=float, help="hook spacing L")
    s.add_argument("--stop-deg", type=float, help="mechanical stop angle")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("map", help="sweep a design grid and write CSV")
    _add_grid_flags(s)
    s.add_argument("--out", help="CSV path (default stdout)")
    s.set_defaults(func=cmd_map)

    s = sub.add_parser("design", help="pick grid parameters for a target angle")
    s.add_argument("--target-deg", type=float)
    s.add_argument("--polyhedron", help=f"use the dihedral angles of: {', '.join(POLYHEDRA)}")
    s.add_argument("--tol-deg", type=float, default=2.0)
    _add_grid_flags(s)
    s.set_defaults(func=cmd_design)

    s = sub.add_parser("net", help="write a canonical polyhedral net file")
    s.add_argument("name", help=", ".join(POLYHEDRA))
    s.add_argument("--edge-mm", type=float, default=30.0)
    s.add_argument("--design", action="store_true", help="attach inverse-designed joints to every hinge")
    s.add_argument("--tol-deg", type=float, default=2.0)
    _add_grid_flags(s)
    s.add_argument("--out", help="JSON path (default stdout)")
    s.set_defaults(func=cmd_net)

    s = sub.add_parser("fold", help="fold a net and report closure")
    s.add_argument("--net", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--angles", help="JSON object hinge id -> angle in degrees")
    g.add_argument("--predict", action="store_true", help="solve every hinge's joint first")
    s.add_argument("--geometry", help="write folded vertices CSV here")
    s.set_defaults(func=cmd_fold)

    s = sub.add_parser("sim", help="simulate locomotion under a duty schedule")
    _add_body_flags(s)
    s.add_argument("--schedule", required=True, help="CSV with duty1,duty2,duration_s")
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--noise", type=float, default=0.0, help="heading noise, rad/sqrt(s)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="trajectory CSV path (default stdout)")
    s.set_defaults(func=cmd_sim)

    s = sub.add_parser("straight", help="solve the motor-2 duty that drives straight")
    _add_body_flags(s)
    s.add_argument("--duty1", type=float, required=True, help="motor-1 duty as a fraction")
    s.set_defaults(func=cmd_straight)

    s = sub.add_parser("classify", help="classify a sensor log into events")
    s.add_argument("--kind", choices=("hall", "touch"), required=True)
    s.add_argument("--in", dest="input", required=True, help="CSV with t,value")
    s.add_argument("--out", help="events CSV path (default stdout)")
    s.add_argument("--sample-rate", type=float, help="override the rate inferred from t")
    s.add_argument("--baseline-window", type=int, default=20)
    s.add_argument("--hall-threshold", type=float, default=24.954)
    s.add_argument("--touch-threshold", type=float, default=6.4)
    s.add_argument("--debounce-s", type=float, default=0.1, help="bridge inactive gaps shorter than this")
    s.add_argument("--min-event-s", type=float, default=0.05, help="drop active runs shorter than this")
    s.add_argument("--snr", action="store_true", help="also report the SNR")
    s.set_defaults(func=cmd_classify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"error: --config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: --config: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvalidNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, DegenerateSNRError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        # reader went away (e.g. piped into head); stop quietly
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
