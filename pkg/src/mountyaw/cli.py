"""Command-line interface.

Subcommands: generate, train, eval, stream, plotdata. Configuration is a
flat key=value text file; command-line flags override file values. Every
command echoes its merged configuration into the output directory, so any
artifact can be regenerated from its own record. All randomness derives
from one root seed, hashed per component.

Exit codes: 0 success, 2 configuration errors, 3 data errors, 4 numeric
faults.
"""

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import evaluate, io, realtime
from .constants import VAL_YAW_RANGE
from .dataset import (
    build_manifest,
    concat_window_sets,
    derive_seed,
    save_manifest,
    split_train_val,
    synthesize_pairs,
)
from .errors import ConfigError, DataError, MountYawError, NumericFaultError
from .net import TrainConfig, load_checkpoint, save_checkpoint, train, write_training_log
from .net.train import config_to_dict
from .realtime import EstimatorParams
from .signal import preprocess_drive
from .simulate import DriveProfile, MountPose, synthesize_drive

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

TRAIN_STRIDE_SAMPLES = 10  # desk-default training-window stride (0.5 s)


def read_config_file(path):
    """Flat key=value lines; '#' starts a comment; values stay strings."""
    cfg = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, val = line.split("=", 1)
        cfg[key.strip()] = val.strip()
    return cfg


def merge_option(args, cfg, key, default, cast=float):
    """flag > config file > default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in cfg:
        raw = cfg[key]
        try:
            if cast is bool:
                return raw.lower() in ("1", "true", "yes", "on")
            return cast(raw)
        except ValueError as e:
            raise ConfigError(f"config key {key}: bad value {raw!r}") from e
    return default


def write_config_echo(out_dir, merged):
    lines = [f"{k} = {merged[k]}" for k in sorted(merged)]
    (Path(out_dir) / "config_echo").write_text("\n".join(lines) + "\n")


def _out_dir(args):
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create output dir {out}: {e}") from e
    return out


def _parse_mid_rotation(text):
    try:
        t_s, deg = text.split(":")
        return float(t_s), float(deg)
    except ValueError as e:
        raise ConfigError(f"--mid-rotation expects T:DEG, got {text!r}") from e


# ---------------------------------------------------------------- generate

def cmd_generate(args, cfg):
    out = _out_dir(args)
    seed = int(merge_option(args, cfg, "seed", 0, int))
    hours = merge_option(args, cfg, "hours", 2.0)
    drives = int(merge_option(args, cfg, "drives", 12, int))
    yaw_deg = merge_option(args, cfg, "yaw_deg", 0.0)
    per_drive_s = hours * 3600.0 / drives
    write_config_echo(out, {"command": "generate", "seed": seed,
                            "hours": hours, "drives": drives,
                            "yaw_deg": yaw_deg,
                            "mid_rotation": args.mid_rotation or ""})
    for i in range(drives):
        profile = DriveProfile(duration_s=per_drive_s,
                               seed=derive_seed(seed, f"drive{i}") % 2**32)
        schedule = [(0.0, MountPose(yaw=np.radians(yaw_deg)))]
        if args.mid_rotation:
            t_change, delta_deg = _parse_mid_rotation(args.mid_rotation)
            schedule.append(
                (t_change, MountPose(yaw=np.radians(yaw_deg + delta_deg)))
            )
        rec = synthesize_drive(profile, schedule, drive_id=f"drive{i:03d}")
        path = io.write_drive_csv(rec, out / f"drive{i:03d}.csv")
        print(f"{rec.drive_id}: {per_drive_s:.0f} s, "
              f"{rec.meta['n_turns']} turns, {rec.meta['n_stops']} stops -> {path}")
    return 0


# ------------------------------------------------------------------- train

def _load_drives(data_dir):
    paths = sorted(Path(data_dir).glob("*.csv"))
    paths = [p for p in paths if not p.name.endswith(".truth.csv")]
    if not paths:
        raise DataError(f"no drive CSVs under {data_dir}")
    return [io.read_drive_csv(p) for p in paths]


def _build_sets(recs, seed, stride, yaw_range, limit_windows=None, ratio=0.85):
    ids = [r.drive_id for r in recs]
    train_ids, val_ids = split_train_val(ids, ratio=ratio,
                                         seed=derive_seed(seed, "split"))
    by_id = {r.drive_id: r for r in recs}

    def windows_of(drive_ids):
        sets = []
        for did in drive_ids:
            rec = by_id[did]
            windows, starts = preprocess_drive(rec.t, rec.imu, stride=stride)
            if limit_windows is not None:
                windows, starts = windows[:limit_windows], starts[:limit_windows]
            sets.append(synthesize_pairs(
                windows, yaw_range, derive_seed(seed, f"labels:{did}"),
                drive_id=did, start_times=starts,
            ))
        return concat_window_sets(sets)

    return windows_of(train_ids), windows_of(val_ids), (train_ids, val_ids)


def cmd_train(args, cfg):
    out = _out_dir(args)
    seed = int(merge_option(args, cfg, "seed", 0, int))
    epochs = int(merge_option(args, cfg, "epochs", 150, int))
    batch_size = int(merge_option(args, cfg, "batch_size", 128, int))
    lr = merge_option(args, cfg, "lr", 1e-3)
    stride = int(merge_option(args, cfg, "train_stride", TRAIN_STRIDE_SAMPLES, int))
    limit = args.limit_windows

    recs = _load_drives(args.data)
    train_set, val_set, (train_ids, val_ids) = _build_sets(
        recs, seed, stride, yaw_range=(-0.75 * np.pi, 0.75 * np.pi),
        limit_windows=limit,
    )
    if len(train_set) == 0:
        raise DataError("training set is empty (drives too short?)")

    config = TrainConfig(lr=lr, batch_size=batch_size, epochs=epochs,
                         seed=derive_seed(seed, "train") % 2**32)
    merged = dict(config_to_dict(config), command="train", root_seed=seed,
                  train_stride=stride, data=str(args.data),
                  train_drives=",".join(train_ids),
                  val_drives=",".join(val_ids))
    write_config_echo(out, merged)
    save_manifest(
        build_manifest([r.drive_id for r in recs], train_ids, val_ids,
                       seed=seed, yaw_range=(-0.75 * np.pi, 0.75 * np.pi),
                       stride_s=stride / 20.0),
        out / "manifest.json",
    )

    t0 = time.perf_counter()
    model, log = train(train_set, val_set, config,
                       callback=lambda row: print(
                           f"epoch {row['epoch']:4d}  train {row['train_loss']:.5f}"
                           f"  val {row['val_loss']:.5f}"
                           f"  val_mae {row['val_mae_deg']:.2f} deg",
                           flush=True))
    print(f"trained {len(log)} epochs in {time.perf_counter() - t0:.1f} s")
    save_checkpoint(model, out / "checkpoint.json", config=merged)
    write_training_log(log, out / "training_log.csv")
    return 0


# -------------------------------------------------------------------- eval

def cmd_eval(args, cfg):
    out = _out_dir(args)
    seed = int(merge_option(args, cfg, "seed", 0, int))
    change_time = merge_option(args, cfg, "change_time", 300.0)
    model = load_checkpoint(args.checkpoint)
    recs = _load_drives(args.data)
    params = EstimatorParams()
    rng = np.random.default_rng(derive_seed(seed, "eval-rotations"))
    base_psis = rng.uniform(*VAL_YAW_RANGE, size=len(recs))

    write_config_echo(out, {"command": "eval", "seed": seed,
                            "checkpoint": str(args.checkpoint),
                            "data": str(args.data),
                            "change_time": change_time})

    runs = [
        evaluate.eval_drive(rec, model, params, base_psi=base)
        for rec, base in zip(recs, base_psis)
    ]
    table = evaluate.metrics_table(runs)
    evaluate.write_metrics_table(table, out / "table1.csv")
    print("metrics:", {k: {m: round(v, 3) for m, v in row.items()}
                       for k, row in table.items()})

    if len(runs) >= 2:
        grid, mean_deg, std_deg = evaluate.convergence_curve(runs)
        evaluate.write_convergence_csv(grid, mean_deg, std_deg,
                                       out / "convergence.csv")

    deltas = rng.uniform(*VAL_YAW_RANGE, size=len(recs))
    _, rows = evaluate.midpoint_rotation_protocol(
        model, recs, change_time, deltas, params, base_psis=base_psis)
    evaluate.write_midpoint_csv(rows, out / "midpoint.csv")
    for row in rows:
        print(f"midpoint {row['drive']}: change {row['change_deg']:+.1f} deg"
              f" -> converge {row['converge_s']:.1f} s")
    return 0


# ------------------------------------------------------------------ stream

def cmd_stream(args, cfg):
    out = _out_dir(args)
    model = load_checkpoint(args.checkpoint)
    rec = io.read_drive_csv(args.source, max_bad_fraction=0.01)
    if rec.meta.get("bad_rows"):
        print(f"skipped {rec.meta['bad_rows']} malformed rows")
    params = EstimatorParams(
        alpha_t_rad=merge_option(args, cfg, "alpha_t_rad", realtime.ALPHA_T),
        n_max=merge_option(args, cfg, "n_max", realtime.N_MAX),
        step_period_s=merge_option(args, cfg, "step_period_s", 0.5),
        paper_faithful=bool(merge_option(args, cfg, "paper_faithful", False, bool)),
    )
    write_config_echo(out, {"command": "stream", "source": str(args.source),
                            "checkpoint": str(args.checkpoint),
                            "speed": args.speed,
                            "alpha_t_rad": params.alpha_t_rad,
                            "n_max": params.n_max,
                            "step_period_s": params.step_period_s,
                            "paper_faithful": params.paper_faithful})

    realtime_pace = args.speed == "real"
    csv_path = out / "reports.csv"
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "psi_hat_deg", "psi_raw_deg", "status", "latency_ms"])
        wall0 = time.perf_counter()
        for rep in realtime.run_stream(zip(rec.t, rec.imu), model, params):
            if realtime_pace:
                lag = rep.t - (time.perf_counter() - wall0)
                if lag > 0:
                    time.sleep(lag)
            line = (f"{rep.t:.2f},{np.degrees(rep.psi_hat):.4f},"
                    f"{np.degrees(rep.psi_raw):.4f},{rep.status},"
                    f"{rep.latency_ms:.3f}")
            writer.writerow(line.split(","))
            print(line)
            if rep.status == realtime.REBASED and rep.t > params.warmup_s:
                print(f"*** REBASED at t={rep.t:.1f} s -> "
                      f"{np.degrees(rep.psi_hat):+.1f} deg ***")
    print(f"report stream written to {csv_path}")
    return 0


# ---------------------------------------------------------------- plotdata

def cmd_plotdata(args, cfg):
    out = _out_dir(args)
    src = Path(args.eval_dir)
    made = []

    conv = src / "convergence.csv"
    if conv.exists():
        rows = list(csv.DictReader(open(conv)))
        want = {"t", "mean_abs_err_deg", "std_deg"}
        if rows and set(rows[0]) != want:
            raise DataError(f"{conv}: columns {sorted(rows[0])} != {sorted(want)}")
        with open(out / "convergence_band.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["t", "mean", "lo", "hi"])
            for r in rows:
                m, s = float(r["mean_abs_err_deg"]), float(r["std_deg"])
                w.writerow([r["t"], m, max(0.0, m - s), m + s])
        made.append("convergence_band.csv")

    mid = src / "midpoint.csv"
    if mid.exists():
        rows = list(csv.DictReader(open(mid)))
        with open(out / "change_recovery_long.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["drive", "variable", "value"])
            for r in rows:
                w.writerow([r["drive"], "change_deg", r["change_deg"]])
                w.writerow([r["drive"], "converge_s", r["converge_s"]])
        made.append("change_recovery_long.csv")

    study = src / "smoothing_study.csv"
    if study.exists():
        rows = list(csv.DictReader(open(study)))
        with open(out / "smoothing_study_long.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["n_max", "t", "psi_hat_deg"])
            for r in rows:
                for key, val in r.items():
                    if key.startswith("n"):
                        w.writerow([key[1:], r["t"], val])
        made.append("smoothing_study_long.csv")

    if not made:
        raise DataError(f"no known eval CSVs under {src}")
    print("wrote:", ", ".join(made))
    return 0


# -------------------------------------------------------------------- main

def build_parser():
    parser = argparse.ArgumentParser(
        prog="mountyaw",
        description="IMU yaw mounting-angle estimation pipeline",
    )
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize drive CSVs")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--hours", type=float)
    p.add_argument("--drives", type=int)
    p.add_argument("--yaw-deg", dest="yaw_deg", type=float)
    p.add_argument("--mid-rotation", dest="mid_rotation",
                   help="T:DEG  extra yaw step at time T seconds")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="build dataset and train a checkpoint")
    p.add_argument("--data", required=True, help="directory of drive CSVs")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--train-stride", dest="train_stride", type=int)
    p.add_argument("--limit-windows", dest="limit_windows", type=int,
                   help="cap windows per drive (smoke mode)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="held-out evaluation protocols")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="held-out drive CSVs")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--change-time", dest="change_time", type=float)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stream", help="replay a drive through the estimator")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--source", required=True, help="drive CSV to replay")
    p.add_argument("--out", required=True)
    p.add_argument("--speed", choices=["real", "max"], default="max")
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("plotdata", help="reshape eval CSVs into tidy tables")
    p.add_argument("--eval-dir", dest="eval_dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plotdata)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = read_config_file(args.config) if args.config else {}
        return args.func(args, cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFaultError as e:
        print(f"numeric fault: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, MountYawError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
