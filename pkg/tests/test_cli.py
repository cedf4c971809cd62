import csv
import filecmp
from pathlib import Path

import pytest

from abrsim.cli import (
    ConfigError,
    RunSpec,
    execute_run,
    main,
    parse_config,
    run_matrix,
    verify,
)
from abrsim.switches import AllocUpdate, CongestionEffect, InputRateMethod, VcRateMethod


def write(tmp_path, text):
    p = tmp_path / "config.toml"
    p.write_text(text)
    return p


def test_single_run_block(tmp_path):
    specs = parse_config(write(tmp_path, """
[[run]]
scenario = "parking_lot"
arch = "vsvd"
preset = "D"
"""))
    assert len(specs) == 1
    assert specs[0].scenario == "parking_lot"
    assert specs[0].column == "D"


def test_explicit_option_tuple(tmp_path):
    specs = parse_config(write(tmp_path, """
[[run]]
scenario = "two_src_vbr"
arch = "vsvd"
[run.options]
vc_rate = "frm2_ccr"
input_rate = "per_class"
congestion = "prev_only"
alloc_update = "frm_only"
"""))
    opts = specs[0].options
    assert opts.vc_rate is VcRateMethod.FRM2_CCR
    assert opts.input_rate is InputRateMethod.PER_CLASS
    assert opts.congestion is CongestionEffect.PREV_ONLY
    assert opts.alloc_update is AllocUpdate.FRM_ONLY


def test_bad_preset_rejected(tmp_path):
    with pytest.raises(ConfigError, match="preset"):
        parse_config(write(tmp_path, """
[[run]]
scenario = "parking_lot"
arch = "vsvd"
preset = "Z"
"""))


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="unknown keys"):
        parse_config(write(tmp_path, """
[[run]]
scenario = "parking_lot"
arch = "nonvsvd"
lotto_numbers = [4, 8, 15]
"""))


def test_preset_xor_options(tmp_path):
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(write(tmp_path, """
[[run]]
scenario = "parking_lot"
arch = "vsvd"
"""))
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(write(tmp_path, """
[[run]]
scenario = "parking_lot"
arch = "vsvd"
preset = "D"
[run.options]
vc_rate = "frm1_ccr"
input_rate = "sum_per_vc"
congestion = "both"
alloc_update = "frm_only"
"""))


def test_nonvsvd_takes_no_preset(tmp_path):
    with pytest.raises(ConfigError, match="no preset"):
        parse_config(write(tmp_path, """
[[run]]
scenario = "parking_lot"
arch = "nonvsvd"
preset = "D"
"""))


def test_parse_error_carries_position(tmp_path):
    with pytest.raises(ConfigError, match="line"):
        parse_config(write(tmp_path, "[[run]\nscenario ="))


def test_matrix_expands_cross_product(tmp_path):
    specs = parse_config(write(tmp_path, """
[matrix]
scenarios = ["two_src_vbr", "parking_lot", "upstream_bottleneck", "transient"]
columns = ["A", "B", "C", "D", "E", "F", "nonvsvd"]
"""))
    assert len(specs) == 28
    assert {s.column for s in specs} == {"A", "B", "C", "D", "E", "F", "nonvsvd"}


def test_bad_override_rejected(tmp_path):
    with pytest.raises(ConfigError, match="override"):
        parse_config(write(tmp_path, """
[[run]]
scenario = "parking_lot"
arch = "nonvsvd"
[run.overrides]
warp_factor = 9
"""))


def test_list_scenarios(capsys):
    assert main(["--list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert "parking_lot" in out and "transient" in out


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    """One executed transient/D run, shared by the e2e tests."""
    out = tmp_path_factory.mktemp("runs")
    spec = RunSpec(scenario="transient", arch="vsvd", preset="D")
    rows = execute_run(spec, str(out))
    from abrsim.cli import write_summary

    write_summary(out, rows)
    return out


def test_run_writes_expected_files(run_dir):
    d = run_dir / "transient__D"
    for name in ("acr.csv", "queues.csv", "delivered.csv", "run.json"):
        assert (d / name).exists()
    with open(d / "acr.csv") as f:
        header = f.readline().strip()
    assert header == "time_ns,vc_id,acr_mbps"


def test_summary_mirrors_metrics(run_dir):
    with open(run_dir / "summary.csv", newline="") as f:
        rows = {(r[0], r[1], r[2]): r[3] for r in list(csv.reader(f))[1:]}
    assert ("transient", "D", "convergence_ms") in rows
    assert float(rows[("transient", "D", "throughput_kcells:S1")]) > 0


def test_verify_accepts_fresh_run(run_dir, capsys):
    assert verify(run_dir) == 0


def test_verify_catches_tampering(run_dir, tmp_path):
    import shutil

    out = tmp_path / "tampered"
    shutil.copytree(run_dir, out)
    summary = out / "summary.csv"
    text = summary.read_text()
    with open(out / "summary.csv", newline="") as f:
        rows = list(csv.reader(f))
    for r in rows[1:]:
        if r[2] == "max_queue_kcells":
            r[3] = "999.000000"
    with open(summary, "w", newline="") as f:
        csv.writer(f).writerows(rows)
    assert text != summary.read_text()
    assert verify(out) == 1


def test_repeat_run_is_byte_identical(run_dir, tmp_path):
    spec = RunSpec(scenario="transient", arch="vsvd", preset="D")
    execute_run(spec, str(tmp_path))
    for name in ("acr.csv", "queues.csv", "delivered.csv"):
        assert filecmp.cmp(run_dir / "transient__D" / name,
                           tmp_path / "transient__D" / name, shallow=False), name
