"""Command-line front end.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import calib, metrics, replay, sync, synth
from .errors import TrajcalError
from .geom import IDENTITY
from .textio import format_pose, parse_pose
from .traj import LHS, read_tum, save_tum, to_rhs


class _Formatter(argparse.HelpFormatter):
    """Append the default to every option whose default is meaningful."""

    def _get_help_string(self, action):
        text = action.help or ""
        if (action.option_strings and "%(default)" not in text
                and not any(action.default is v for v in (None, False, argparse.SUPPRESS))):
            text += " (default: %(default)s)"
        return text


def _pose_arg(text):
    try:
        return parse_pose(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def cmd_convert(args) -> int:
    traj = to_rhs(read_tum(args.input, handedness=LHS))
    save_tum(args.output, traj)
    print(f"converted {len(traj)} poses LHS -> RHS: {args.output}")
    return 0


def cmd_sync(args) -> int:
    a = read_tum(args.a)
    b = read_tum(args.b)
    report = sync.estimate_offset(a, b, axes=args.axes, prominence_m=args.prominence,
                                  match_window_s=args.match_window,
                                  min_separation_s=args.min_separation)
    sys.stdout.write(report.to_text())
    if args.apply:
        save_tum(args.apply, sync.apply_offset(b, -report.offset_s))
        print(f"wrote {args.apply} (b shifted by {-report.offset_s:+.6f} s)")
    return 0


def cmd_calibrate(args) -> int:
    a = read_tum(args.a)
    b = read_tum(args.b)
    pairs = calib.build_motion_pairs(a, b, stride=args.stride, max_dt=args.max_dt,
                                     min_rot_deg=args.min_rot_deg)
    result = calib.solve_hand_eye(pairs, args.method)
    text = result.to_text()
    sys.stdout.write(text)
    if args.output:
        Path(args.output).write_text(text)
    return 0


def cmd_replay_targets(args) -> int:
    cfg = replay.ReplayConfig.load(args.config)
    targets = replay.compute_tcp_targets(read_tum(args.opti), cfg)
    save_tum(args.output, targets)
    spacing = replay.validate_waypoint_spacing(targets, cfg.eef_step_m)
    print(f"wrote {len(targets)} TCP targets to {args.output}; max step {spacing.max_step_m:.4f} m, "
          f"{len(spacing.violations)} steps over eef_step={cfg.eef_step_m:g} m")
    return 0


def cmd_normalize(args) -> int:
    traj = read_tum(args.input)
    if args.mode == "gt":
        out = replay.normalize_ground_truth(traj)
    else:
        if args.calib:
            x = calib.HandEyeResult.from_text(Path(args.calib).read_text()).x
        elif args.transform is not None:
            x = args.transform
        else:
            print("trajcal normalize: error: --mode est needs --calib or --transform", file=sys.stderr)
            return 2
        out = replay.normalize_estimate(traj, x)
    save_tum(args.output, out)
    print(f"normalized {len(out)} poses ({args.mode}): {args.output}")
    return 0


def cmd_validate(args) -> int:
    rep = replay.validate_waypoint_spacing(read_tum(args.input), args.eef_step)
    print(f"max_step_m={rep.max_step_m:.6f}")
    print(f"eef_step_m={rep.eef_step_m:g}")
    print(f"violations={len(rep.violations)}")
    for i, step in rep.violations:
        print(f"  index {i}: step {step:.6f} m")
    return 0


def cmd_eval(args) -> int:
    est = read_tum(args.est)
    gt = read_tum(args.gt)
    report = metrics.ape(est, gt, align=args.align, max_dt=args.max_dt)
    print(report.summary())
    for fmt in metrics.FORMATS:
        path = getattr(args, fmt)
        if path:
            Path(path).write_bytes(metrics.emit_report(report, fmt))
    return 0


def cmd_gen(args) -> int:
    cfg = synth.ScenarioConfig(
        seed=args.seed, duration_s=args.duration, rate_hz=args.rate,
        trans_amplitude_m=args.trans_amplitude, rot_amplitude_deg=args.rot_amplitude_deg,
        x_true=args.x_true, offset_true_s=args.offset_ms * 1e-3,
        sigma_t_m=args.sigma_t, sigma_r_deg=args.sigma_r_deg, start_stamp=args.start_stamp,
    )
    paths = synth.generate_scenario(cfg).save(args.out_dir, sensor_lhs=args.lhs)
    print(" ".join(str(p) for p in paths.values()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    fmt = _Formatter
    p = argparse.ArgumentParser(prog="trajcal", description=__doc__, formatter_class=fmt)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("convert", help="convert a left-handed TUM file to right-handed", formatter_class=fmt)
    s.add_argument("input", help="left-handed TUM file")
    s.add_argument("-o", "--output", required=True, help="right-handed TUM output")
    s.set_defaults(func=cmd_convert, stage="convert")

    s = sub.add_parser("sync", help="estimate the clock offset of B relative to A", formatter_class=fmt)
    s.add_argument("a", help="reference trajectory")
    s.add_argument("b", help="trajectory whose clock offset is estimated")
    s.add_argument("--axes", default=sync.DEFAULT_AXES, help="position axes to use, e.g. xyz")
    s.add_argument("--prominence", type=_positive(float), default=sync.DEFAULT_PROMINENCE_M,
                   help="minimum peak prominence [m]")
    s.add_argument("--min-separation", type=float, default=sync.DEFAULT_MIN_SEPARATION_S,
                   help="minimum spacing of same-polarity peaks [s]")
    s.add_argument("--match-window", type=_positive(float), default=sync.DEFAULT_MATCH_WINDOW_S,
                   help="maximum peak stamp difference for a match [s]")
    s.add_argument("--apply", metavar="OUT", help="write B with the offset removed")
    s.set_defaults(func=cmd_sync, stage="sync")

    s = sub.add_parser("calibrate", help="hand-eye calibration from two synchronised TUM files",
                       formatter_class=fmt)
    s.add_argument("a", help="trajectory whose motions are A in AX=XB")
    s.add_argument("b", help="trajectory whose motions are B in AX=XB")
    s.add_argument("--method", choices=calib.METHODS, default=calib.DEFAULT_METHOD,
                   help="AX=XB solver")
    s.add_argument("--stride", type=_positive(int), default=None,
                   help="samples between motion endpoints; auto picks median rotation >= 5 deg")
    s.add_argument("--min-rot-deg", type=float, default=calib.DEFAULT_MIN_ROT_DEG,
                   help="discard motion pairs rotating less than this [deg]")
    s.add_argument("--max-dt", type=_positive(float), default=None,
                   help="association tolerance [s]; default is half the coarser sample period")
    s.add_argument("-o", "--output", help="write the result block here")
    s.set_defaults(func=cmd_calibrate, stage="calibrate")

    s = sub.add_parser("replay-targets", help="TCP targets from a mocap TUM file and a config",
                       formatter_class=fmt)
    s.add_argument("opti", help="right-handed mocap TUM file")
    s.add_argument("config", help="key=value file: b_start, t_tcp_unity, t_unity_opti, dilution_k, eef_step_m")
    s.add_argument("-o", "--output", required=True, help="TUM file of TCP targets")
    s.set_defaults(func=cmd_replay_targets, stage="replay")

    s = sub.add_parser("normalize", help="origin-align a ground-truth or estimated trajectory",
                       formatter_class=fmt)
    s.add_argument("input", help="TUM file to normalize")
    s.add_argument("--mode", choices=("gt", "est"), required=True,
                   help="gt: robot TCP poses; est: right-handed headset poses")
    s.add_argument("--calib", help="hand-eye result file (est mode)")
    s.add_argument("--transform", type=_pose_arg, default=None,
                   help="hand-eye X as 'x y z qx qy qz qw' (est mode)")
    s.add_argument("-o", "--output", required=True, help="normalized TUM output")
    s.set_defaults(func=cmd_normalize, stage="normalize")

    s = sub.add_parser("validate", help="check waypoint spacing against eef_step", formatter_class=fmt)
    s.add_argument("input", help="TUM file of waypoints")
    s.add_argument("--eef-step", type=_positive(float), default=replay.DEFAULT_EEF_STEP_M,
                   help="maximum step between consecutive waypoints [m]")
    s.set_defaults(func=cmd_validate, stage="validate")

    s = sub.add_parser("eval", help="absolute pose error of EST against GT", formatter_class=fmt)
    s.add_argument("est", help="estimated trajectory")
    s.add_argument("gt", help="ground-truth trajectory")
    s.add_argument("--align", action=argparse.BooleanOptionalAction, default=True,
                   help="rigidly align EST to GT before measuring")
    s.add_argument("--max-dt", type=_positive(float), default=None,
                   help="association tolerance [s]; default is half the coarser sample period")
    s.add_argument("--csv", help="write per-pose errors as CSV")
    s.add_argument("--json", help="write the full report as JSON")
    s.add_argument("--svg", help="write an error-vs-time plot")
    s.set_defaults(func=cmd_eval, stage="eval")

    s = sub.add_parser("gen", help="generate a synthetic scenario", formatter_class=fmt)
    s.add_argument("--seed", type=int, default=0, help="seeds motion phases and noise")
    s.add_argument("--duration", type=_positive(float), default=60.0, help="scenario length [s]")
    s.add_argument("--rate", type=_positive(float), default=120.0, help="sample rate of both streams [Hz]")
    s.add_argument("--trans-amplitude", type=float, default=0.15, help="translation amplitude per axis [m]")
    s.add_argument("--rot-amplitude-deg", type=float, default=30.0, help="rotation amplitude per axis [deg]")
    s.add_argument("--x-true", type=_pose_arg, default=format_pose(IDENTITY),
                   help="hand-eye transform as 'x y z qx qy qz qw'")
    s.add_argument("--offset-ms", type=float, default=0.0, help="sensor clock offset [ms]")
    s.add_argument("--sigma-t", type=float, default=0.0, help="translation noise std [m]")
    s.add_argument("--sigma-r-deg", type=float, default=0.0, help="rotation noise std [deg]")
    s.add_argument("--start-stamp", type=float, default=synth.DEFAULT_START_STAMP,
                   help="first ground-truth stamp [s]")
    s.add_argument("--lhs", action="store_true", help="write the sensor trajectory left-handed")
    s.add_argument("--out-dir", required=True, help="directory for gt.tum, sensor.tum, truth.txt")
    s.set_defaults(func=cmd_gen, stage="gen")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TrajcalError as exc:
        print(f"error [{args.stage}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error [{args.stage}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
