import hashlib

import numpy as np
import pytest

from mountyaw.errors import DataError
from mountyaw.io import read_drive_csv, truth_path, write_drive_csv
from mountyaw.simulate import DriveProfile, MountPose, synthesize_drive


@pytest.fixture()
def rec():
    profile = DriveProfile(duration_s=12.0, seed=5)
    return synthesize_drive(
        profile,
        [(0.0, MountPose(yaw=0.3)), (6.0, MountPose(yaw=1.2))],
        drive_id="io-test",
    )


def test_round_trip(rec, tmp_path):
    path = write_drive_csv(rec, tmp_path / "d.csv")
    back = read_drive_csv(path)
    assert back.drive_id == "io-test"
    assert back.t.shape == rec.t.shape
    np.testing.assert_allclose(back.imu, rec.imu, rtol=1e-9, atol=1e-12)
    assert len(back.schedule) == 2
    assert back.schedule[1][0] == 6.0
    assert back.yaw_at(8.0) == pytest.approx(1.2, abs=1e-6)


def test_deterministic_bytes(rec, tmp_path):
    p1 = write_drive_csv(rec, tmp_path / "a.csv")
    p2 = write_drive_csv(rec, tmp_path / "b.csv")
    h1 = hashlib.sha256(p1.read_bytes()).hexdigest()
    h2 = hashlib.sha256(p2.read_bytes()).hexdigest()
    assert h1 == h2
    assert truth_path(p1).read_text().splitlines()[0] == "# drive_id=io-test"


def test_sidecar_carries_metadata(rec, tmp_path):
    path = write_drive_csv(rec, tmp_path / "d.csv")
    text = truth_path(path).read_text()
    assert "profile_hash=" in text
    assert "t_start,yaw_deg" in text


def test_malformed_rows_counted(rec, tmp_path):
    path = write_drive_csv(rec, tmp_path / "d.csv")
    lines = path.read_text().splitlines()
    lines[5] = "garbage,row"
    path.write_text("\n".join(lines) + "\n")
    back = read_drive_csv(path, max_bad_fraction=0.01)
    assert back.meta["bad_rows"] == 1

    lines = [lines[0]] + ["bad"] * 50 + lines[1:]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataError):
        read_drive_csv(path, max_bad_fraction=0.01)


def test_missing_file():
    with pytest.raises(DataError):
        read_drive_csv("/nonexistent/drive.csv")


def test_bad_header(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(DataError):
        read_drive_csv(path)
