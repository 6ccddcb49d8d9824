import math
import os

import numpy as np
import pytest

from fracwave.cli import kernel_table, main
from fracwave.records import read_branch_rows, read_checkpoint


def test_bifurcation_points_fkdv(tmp_path, capsys):
    code = main(["bifurcation-points", "--equation", "fkdv", "--P", repr(2 * math.pi), "--s", "0.5",
                 "--k-max", "3", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "0.840896415253715" in out
    lines = (tmp_path / "bifurcation_points.csv").read_text().splitlines()
    assert lines[-3].startswith("1,0.8408964152537")


def test_bifurcation_points_fdp_inadmissible(tmp_path, capsys):
    code = main(["bifurcation-points", "--equation", "fdp", "--P", repr(2 * math.pi), "--s", "0.5",
                 "--kappa", "1", "--out", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == 3
    assert "8.94427191" in err


def test_bifurcation_points_fdp_admissible(tmp_path, capsys):
    code = main(["bifurcation-points", "--equation", "fdp", "--P", "0.5", "--s", "0.5", "--kappa", "1",
                 "--out", str(tmp_path)])
    assert code == 0
    assert "4.6854196223" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["bifurcation-points", "--s", "1.5"],
    ["bifurcation-points", "--equation", "fdp", "--P", "0.5", "--kappa", "0"],
    ["continue", "--N", "7"],
])
def test_config_errors(tmp_path, argv):
    code = main(argv + ["--out", str(tmp_path)])
    assert code in (2, 3)
    if "--kappa" in argv:
        assert code == 3
    else:
        assert code == 2


def test_config_file_and_unknown_key(tmp_path):
    ini = tmp_path / "bad.ini"
    ini.write_text("[problem]\nspeed = 3\n")
    assert main(["bifurcation-points", "--config", str(ini), "--out", str(tmp_path)]) == 2


def test_continue_writes_records(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["continue", "--equation", "fkdv", "--N", "128", "--out", str(out),
                 "--snapshot-stride", "10", "--checkpoint-every", "5"])
    assert code == 0
    assert "CrestGapTol" in capsys.readouterr().out
    files = set(os.listdir(out))
    assert {"branch.csv", "checkpoint.json", "final.txt", "report.json", "report.txt",
            "snapshot_00000.txt", "snapshot_00010.txt"} <= files
    rows = read_branch_rows(str(out / "branch.csv"))
    steps = [int(r.split(",")[0]) for r in rows]
    assert steps == list(range(len(rows)))
    ck = read_checkpoint(str(out / "checkpoint.json"))
    assert ck.rows == rows


def test_continue_mu_bound_exit(tmp_path):
    code = main(["continue", "--equation", "fdp", "--P", "0.5", "--kappa", "1", "--N", "64",
                 "--mu-max", "4.7", "--out", str(tmp_path)])
    assert code == 4


def test_continue_step_limit_exit(tmp_path):
    assert main(["continue", "--N", "64", "--max-steps", "4", "--out", str(tmp_path)]) == 5


def test_resume_appends_identical_rows(tmp_path):
    full, part = tmp_path / "full", tmp_path / "part"
    main(["continue", "--N", "64", "--max-steps", "12", "--out", str(full)])
    main(["continue", "--N", "64", "--max-steps", "7", "--out", str(part)])
    code = main(["continue", "--resume", str(part / "checkpoint.json"), "--max-steps", "12"])
    assert code == 5  # step limit again
    assert read_branch_rows(str(full / "branch.csv")) == read_branch_rows(str(part / "branch.csv"))


def test_resume_with_changed_config_refused(tmp_path):
    main(["continue", "--N", "64", "--max-steps", "4", "--out", str(tmp_path)])
    assert main(["continue", "--resume", str(tmp_path / "checkpoint.json"), "--s", "0.3"]) == 2


def test_diagnose_exit_codes(tmp_path, capsys):
    out = tmp_path / "run"
    main(["continue", "--N", "256", "--out", str(out), "--snapshot-stride", "2"])
    capsys.readouterr()
    assert main(["diagnose", str(out / "snapshot_00002.txt")]) == 0
    assert "PASS" in capsys.readouterr().out
    assert os.path.exists(str(out / "snapshot_00002.txt") + ".report.json")
    # a profile pushed above the wave speed fails the battery
    bad = tmp_path / "bad.txt"
    lines = [l if not l.startswith("# mu") else "# mu = 0.01" for l in (out / "snapshot_00002.txt").read_text().splitlines()]
    bad.write_text("\n".join(lines) + "\n")
    assert main(["diagnose", str(bad)]) == 1
    assert main(["diagnose", str(tmp_path / "missing.txt")]) == 2


def test_kernel_table(tmp_path):
    assert main(["kernel-table", "--s", "0.5", "--points", "20", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "kernel_table_s0.5.csv").read_text().splitlines()
    assert lines[4] == "x,K_s,error_bound,singular_part,regular_part"
    assert len(lines) == 25
    t = kernel_table(0.5, 1e-3, 10.0, 20)
    below = t[:, 0] < 1
    np.testing.assert_allclose(t[below, 3] + t[below, 4], t[below, 1], rtol=1e-14)
    assert np.all(np.isnan(t[~below, 4]))
    assert main(["kernel-table", "--s", "2"]) == 2
