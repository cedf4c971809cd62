"""Experiment runner: config parsing, matrix execution, CSV/summary output.

Usage:
    abrsim run CONFIG [--out DIR] [--workers N]
    abrsim --list-scenarios
    abrsim --verify DIR

The config is TOML.  Each [[run]] block names a scenario and either a
preset letter (arch = "vsvd") or an explicit option tuple; a [matrix]
block expands scenarios x columns into one run per cell.  Unknown keys
are rejected.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from abrsim.engine import MS
from abrsim.metrics import RunSeries
from abrsim.runio import load_run_dir, write_run_dir
from abrsim.scenarios import (
    SCENARIO_NAMES,
    RunParams,
    Sim,
    build,
    compute_metrics,
)
from abrsim.switches import (
    PRESETS,
    AllocUpdate,
    CongestionEffect,
    InputRateMethod,
    VcRateMethod,
    VsVdOptions,
)

COLUMNS_ALL = ("A", "B", "C", "D", "E", "F", "nonvsvd")

_OVERRIDE_KEYS = {
    "target_utilization": ("target_util", float),
    "interval_ms": ("interval_ns", lambda v: int(float(v) * MS)),
    "icr_mbps": ("icr_mbps", float),
    "response_tol": ("response_tol", float),
    "conv_tol": ("conv_tol", float),
    "conv_window_ms": ("conv_window_ns", lambda v: int(float(v) * MS)),
}


class ConfigError(Exception):
    pass


@dataclass
class RunSpec:
    scenario: str
    arch: str  # "nonvsvd" | "vsvd"
    preset: Optional[str] = None
    options: Optional[VsVdOptions] = None
    overrides: Optional[dict] = None

    @property
    def column(self) -> str:
        if self.arch == "nonvsvd":
            return "nonvsvd"
        if self.preset is not None:
            return self.preset
        return self.options.label()

    def run_dir_name(self) -> str:
        return f"{self.scenario}__{self.column}"


def _parse_options_table(tbl: dict, where: str) -> VsVdOptions:
    fields = {
        "vc_rate": VcRateMethod,
        "input_rate": InputRateMethod,
        "congestion": CongestionEffect,
        "alloc_update": AllocUpdate,
    }
    unknown = set(tbl) - set(fields)
    if unknown:
        raise ConfigError(f"{where}: unknown option keys {sorted(unknown)}")
    missing = set(fields) - set(tbl)
    if missing:
        raise ConfigError(f"{where}: missing option keys {sorted(missing)}")
    kwargs = {}
    for key, enum_cls in fields.items():
        try:
            kwargs[key] = enum_cls(tbl[key])
        except ValueError:
            valid = [e.value for e in enum_cls]
            raise ConfigError(
                f"{where}: bad value {tbl[key]!r} for {key}; expected one of "
                f"{valid}") from None
    return VsVdOptions(**kwargs)


def _parse_overrides(tbl: dict, where: str) -> dict:
    unknown = set(tbl) - set(_OVERRIDE_KEYS)
    if unknown:
        raise ConfigError(f"{where}: unknown override keys {sorted(unknown)}")
    out = {}
    for key, raw in tbl.items():
        field_name, conv = _OVERRIDE_KEYS[key]
        out[field_name] = conv(raw)
    return out


def _parse_run_block(tbl: dict, where: str) -> RunSpec:
    allowed = {"scenario", "arch", "preset", "options", "overrides"}
    unknown = set(tbl) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    scenario = tbl.get("scenario")
    if scenario not in SCENARIO_NAMES:
        raise ConfigError(
            f"{where}: scenario must be one of {SCENARIO_NAMES}, got {scenario!r}")
    arch = tbl.get("arch", "vsvd")
    if arch not in ("vsvd", "nonvsvd"):
        raise ConfigError(f"{where}: arch must be 'vsvd' or 'nonvsvd'")
    preset = tbl.get("preset")
    options_tbl = tbl.get("options")
    if arch == "vsvd":
        if (preset is None) == (options_tbl is None):
            raise ConfigError(
                f"{where}: vsvd runs need exactly one of preset / options")
        if preset is not None and preset not in PRESETS:
            raise ConfigError(
                f"{where}: preset must be one of {sorted(PRESETS)}, got {preset!r}")
    elif preset is not None or options_tbl is not None:
        raise ConfigError(f"{where}: nonvsvd runs take no preset/options")
    options = (_parse_options_table(options_tbl, where)
               if options_tbl is not None else None)
    overrides = _parse_overrides(tbl.get("overrides", {}), where)
    return RunSpec(scenario=scenario, arch=arch, preset=preset,
                   options=options, overrides=overrides or None)


def parse_config(path: Path) -> list[RunSpec]:
    try:
        with open(path, "rb") as f:
            doc = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    unknown = set(doc) - {"run", "matrix"}
    if unknown:
        raise ConfigError(f"{path}: unknown top-level keys {sorted(unknown)}")
    specs: list[RunSpec] = []
    for i, tbl in enumerate(doc.get("run", [])):
        specs.append(_parse_run_block(tbl, f"{path}: run[{i}]"))
    matrix = doc.get("matrix")
    if matrix is not None:
        unknown = set(matrix) - {"scenarios", "columns", "presets", "overrides"}
        if unknown:
            raise ConfigError(f"{path}: matrix: unknown keys {sorted(unknown)}")
        if "columns" in matrix and "presets" in matrix:
            raise ConfigError(f"{path}: matrix: give either columns or presets")
        scenarios = matrix.get("scenarios", list(SCENARIO_NAMES))
        columns = matrix.get("columns", matrix.get("presets", list(COLUMNS_ALL)))
        overrides = _parse_overrides(matrix.get("overrides", {}),
                                     f"{path}: matrix")
        for sc in scenarios:
            for col in columns:
                tbl = {"scenario": sc}
                if col == "nonvsvd":
                    tbl["arch"] = "nonvsvd"
                else:
                    tbl["arch"] = "vsvd"
                    tbl["preset"] = col
                spec = _parse_run_block(tbl, f"{path}: matrix[{sc},{col}]")
                spec.overrides = overrides or None
                specs.append(spec)
    if not specs:
        raise ConfigError(f"{path}: no runs configured")
    return specs


def _params_for(spec: RunSpec) -> RunParams:
    params = RunParams()
    if spec.overrides:
        params = replace(params, **spec.overrides)
    return params


def execute_run(spec: RunSpec, outdir: str) -> list[tuple[str, str, str, str]]:
    """Run one spec, write its run directory, return summary rows."""
    params = _params_for(spec)
    sc = build(spec.scenario, params.target_util)
    options = PRESETS[spec.preset] if spec.preset else spec.options
    sim = Sim(sc, options, spec.column, params)
    series = sim.run()
    run_dir = Path(outdir) / spec.run_dir_name()
    meta = {
        "scenario": spec.scenario,
        "arch": spec.arch,
        "column": spec.column,
        "options": None if options is None else {
            "vc_rate": options.vc_rate.value,
            "input_rate": options.input_rate.value,
            "congestion": options.congestion.value,
            "alloc_update": options.alloc_update.value,
        },
        "overrides": spec.overrides or {},
        "bucket_ns": params.bucket_ns,
        "optimal_mbps": sc.optimal_alloc,
        "injected": series.injected,
    }
    write_run_dir(run_dir, series, meta)
    metrics = compute_metrics(sc, series, params)
    return [(spec.scenario, spec.column, name, _fmt_value(v))
            for name, v in sorted(metrics.items())]


def _fmt_value(v: Optional[float]) -> str:
    return "" if v is None else f"{v:.6f}"


def write_summary(outdir: Path, rows: list[tuple[str, str, str, str]]) -> None:
    with open(outdir / "summary.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["scenario", "column", "metric", "value"])
        for row in sorted(rows):
            w.writerow(row)


def print_summary_tables(rows: list[tuple[str, str, str, str]]) -> None:
    """Pretty-print one scenario x column grid per metric."""
    metrics = sorted({m for _s, _c, m, _v in rows if not m.startswith("optimal")})
    scenarios = sorted({s for s, _c, _m, _v in rows})
    columns = [c for c in COLUMNS_ALL
               if any(r[1] == c for r in rows)]
    columns += sorted({r[1] for r in rows} - set(columns))
    cell = {(s, c, m): v for s, c, m, v in rows}
    for metric in metrics:
        print(f"\n== {metric} ==")
        width = max(len(s) for s in scenarios + ["scenario"]) + 2
        print("scenario".ljust(width) + "".join(c.rjust(12) for c in columns))
        for s in scenarios:
            vals = []
            for c in columns:
                v = cell.get((s, c, metric), "")
                try:
                    vals.append(f"{float(v):.3f}".rjust(12))
                except ValueError:
                    vals.append((v or "-").rjust(12))
            print(s.ljust(width) + "".join(vals))


def run_matrix(specs: list[RunSpec], outdir: Path, workers: int = 1) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    rows: list[tuple[str, str, str, str]] = []
    failed = 0
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(execute_run, spec, str(outdir))
                       for spec in specs]
            for spec, fut in zip(specs, futures):
                try:
                    rows.extend(fut.result())
                except Exception as e:  # noqa: BLE001 - report and continue
                    failed += 1
                    print(f"FAILED {spec.run_dir_name()}: {e}", file=sys.stderr)
    else:
        for spec in specs:
            try:
                rows.extend(execute_run(spec, str(outdir)))
            except Exception as e:  # noqa: BLE001
                failed += 1
                print(f"FAILED {spec.run_dir_name()}: {e}", file=sys.stderr)
    write_summary(outdir, rows)
    print_summary_tables(rows)
    return 1 if failed else 0


def verify(outdir: Path) -> int:
    """Recompute every run's metrics from its CSVs and compare with
    summary.csv; nonzero exit on any mismatch."""
    summary_path = outdir / "summary.csv"
    if not summary_path.exists():
        print(f"no summary.csv under {outdir}", file=sys.stderr)
        return 1
    with open(summary_path, newline="") as f:
        stored = {(r[0], r[1], r[2]): r[3] for r in list(csv.reader(f))[1:]}
    bad = 0
    checked = 0
    for run_dir in sorted(p for p in outdir.iterdir() if p.is_dir()):
        series, meta = load_run_dir(run_dir)
        params = RunParams()
        if meta.get("overrides"):
            params = replace(params, **{
                k: v for k, v in meta["overrides"].items()
            })
        sc = build(meta["scenario"], params.target_util)
        metrics = compute_metrics(sc, series, params)
        for name, v in metrics.items():
            checked += 1
            want = stored.get((meta["scenario"], meta["column"], name))
            got = _fmt_value(v)
            if want != got:
                bad += 1
                print(f"MISMATCH {run_dir.name} {name}: summary={want!r} "
                      f"recomputed={got!r}", file=sys.stderr)
    print(f"verified {checked} summary values, {bad} mismatches")
    return 1 if bad else 0


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = argparse.ArgumentParser(prog="abrsim", description=__doc__)
    parser.add_argument("--list-scenarios", action="store_true",
                        help="print known scenario names and exit")
    parser.add_argument("--verify", metavar="DIR",
                        help="recompute summary metrics from run CSVs")
    sub = parser.add_subparsers(dest="cmd")
    runp = sub.add_parser("run", help="execute the runs in a config file")
    runp.add_argument("config", type=Path)
    runp.add_argument("--out", type=Path, default=Path("runs"))
    runp.add_argument("--workers", type=int, default=1)
    args = parser.parse_args(argv)
    if args.list_scenarios:
        for name in SCENARIO_NAMES:
            print(name)
        return 0
    if args.verify:
        return verify(Path(args.verify))
    if args.cmd == "run":
        try:
            specs = parse_config(args.config)
        except ConfigError as e:
            print(f"config error: {e}", file=sys.stderr)
            return 1
        return run_matrix(specs, args.out, args.workers)
    parser.print_help()
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
