"""File formats: raw drive CSV and the ground-truth sidecar.

Drive CSV: header ``t,ax,ay,az,gx,gy,gz``, SI units, one row per 100 Hz
sample. Sidecar ``<stem>.truth.csv``: comment header lines with seed and
profile hash, then ``t_start,yaw_deg`` rows describing the piecewise-
constant mount-yaw schedule.
"""

import csv
from pathlib import Path

import numpy as np

from .errors import DataError
from .simulate import DriveRecording, MountPose

DRIVE_HEADER = ["t", "ax", "ay", "az", "gx", "gy", "gz"]


def truth_path(drive_path):
    p = Path(drive_path)
    return p.with_name(p.stem + ".truth.csv")


def write_drive_csv(rec, path):
    """Write the raw stream and its truth sidecar; deterministic bytes."""
    path = Path(path)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(DRIVE_HEADER)
        for i in range(rec.t.shape[0]):
            w.writerow([f"{rec.t[i]:.2f}"] + [f"{v:.10g}" for v in rec.imu[i]])
    with open(truth_path(path), "w", newline="") as f:
        f.write(f"# drive_id={rec.drive_id}\n")
        for key in ("seed", "profile_hash", "duration_s"):
            if key in rec.meta:
                f.write(f"# {key}={rec.meta[key]}\n")
        f.write("t_start,yaw_deg\n")
        for t_start, pose in rec.schedule:
            f.write(f"{t_start:.2f},{np.degrees(pose.yaw):.6f}\n")
    return path


def read_drive_csv(path, *, max_bad_fraction=0.0):
    """Load a drive and its sidecar back into a DriveRecording.

    Malformed rows are skipped and counted; more than max_bad_fraction of
    bad rows raises DataError.
    """
    path = Path(path)
    rows, bad = [], 0
    try:
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header != DRIVE_HEADER:
                raise DataError(f"{path}: unexpected header {header}")
            for row in reader:
                try:
                    if len(row) != 7:
                        raise ValueError
                    rows.append([float(v) for v in row])
                except ValueError:
                    bad += 1
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    if not rows:
        raise DataError(f"{path}: no samples")
    if bad > max_bad_fraction * (bad + len(rows)):
        raise DataError(f"{path}: {bad} malformed rows")
    data = np.asarray(rows)

    schedule = []
    meta = {"bad_rows": bad}
    tpath = truth_path(path)
    if tpath.exists():
        with open(tpath) as f:
            for line in f:
                line = line.strip()
                if line.startswith("#"):
                    if "=" in line:
                        key, val = line[1:].split("=", 1)
                        meta[key.strip()] = val.strip()
                    continue
                if not line or line.startswith("t_start"):
                    continue
                t_start, yaw_deg = line.split(",")
                schedule.append(
                    (float(t_start), MountPose(yaw=np.radians(float(yaw_deg))))
                )
    else:
        schedule = [(0.0, MountPose())]

    return DriveRecording(
        drive_id=meta.get("drive_id", path.stem),
        t=data[:, 0],
        imu=data[:, 1:7],
        schedule=schedule or [(0.0, MountPose())],
        meta=meta,
    )
