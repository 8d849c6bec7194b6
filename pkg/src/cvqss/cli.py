"""Command-line front end.

    cvqss list
    cvqss validate CONFIG
    cvqss run CONFIG [--out DIR] [--threads N] [--seed K]

A config is a JSON document with optional ``device``, ``experiment``,
``output`` and ``seed`` sections; anything omitted takes the ideal-model
default.  Example::

    {"device": {"preset": "calibrated"},
     "experiment": {"name": "fig3-security", "sigma_sq": {"start": 0.5, "stop": 6, "num": 56}},
     "output": {"path": "results", "format": "csv"},
     "seed": 7}
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import numbers
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .experiments import EXPERIMENTS, ResultTable, expand_grid, list_experiments
from .protocol import DEVICE_FIELDS, DeviceModel, parse_scheme

log = logging.getLogger("cvqss")

TOP_LEVEL = ("device", "experiment", "output", "seed")
FORMATS = ("csv", "jsonl")
DEFAULT_OUTPUT = {"path": "results", "format": "csv"}
FLOAT_FMT = "{:.17e}"

# device fields with closed ranges; the rest only need to be >= 0
_UNIT_INTERVAL = {"input_efficiency", "path_efficiency"}


class ConfigError(ValueError):
    """Raised by :func:`load_config` when a config has violations."""

    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class ExperimentConfig:
    device: DeviceModel
    experiment: str
    params: dict
    output_path: str
    output_format: str
    seed: int


def _is_number(x) -> bool:
    return isinstance(x, numbers.Real) and not isinstance(x, bool) and math.isfinite(x)


def _check_device(dev, report: ValidationReport):
    if dev is None:
        report.notes.append("device: section missing, ideal defaults applied")
        return
    if not isinstance(dev, dict):
        report.violations.append("device: must be an object")
        return
    for key, val in dev.items():
        if key == "preset":
            if val not in ("ideal", "calibrated"):
                report.violations.append(f"device.preset: unknown preset {val!r}")
            continue
        if key not in DEVICE_FIELDS:
            report.violations.append(f"device.{key}: unknown field")
        elif not _is_number(val):
            report.violations.append(f"device.{key}: must be a finite number")
        elif key in _UNIT_INTERVAL and not 0 <= val <= 1:
            report.violations.append(f"device.{key}: must lie in [0, 1], got {val}")
        elif key == "interferometer_imbalance" and not 0 <= val < 1:
            report.violations.append(f"device.{key}: must lie in [0, 1), got {val}")
        elif key != "hybrid_phase_mismatch" and val < 0:
            report.violations.append(f"device.{key}: must be non-negative, got {val}")


def _check_grid(name: str, spec, report: ValidationReport, lo=None, hi=None) -> list[float] | None:
    where = f"experiment.{name}"
    if isinstance(spec, dict):
        missing = {"start", "stop", "num"} - set(spec)
        extra = set(spec) - {"start", "stop", "num"}
        if missing or extra:
            report.violations.append(f"{where}: range needs exactly start, stop, num")
            return None
        if not all(_is_number(spec[k]) for k in ("start", "stop")):
            report.violations.append(f"{where}: start and stop must be finite numbers")
            return None
        if not isinstance(spec["num"], int) or isinstance(spec["num"], bool) or spec["num"] < 1:
            report.violations.append(f"{where}: num must be a positive integer")
            return None
    elif isinstance(spec, list):
        if not spec:
            report.violations.append(f"{where}: grid is empty")
            return None
        if not all(_is_number(x) for x in spec):
            report.violations.append(f"{where}: grid entries must be finite numbers")
            return None
    elif not _is_number(spec):
        report.violations.append(f"{where}: must be a number, a list or a start/stop/num range")
        return None
    values = expand_grid(spec)
    bad = [x for x in values if (lo is not None and x < lo) or (hi is not None and x > hi)]
    if bad:
        bounds = f"[{lo if lo is not None else '-inf'}, {hi if hi is not None else 'inf'}]"
        report.violations.append(f"{where}: values {bad[:3]} outside {bounds}")
        return None
    return values


# per-parameter checks: name -> (kind, lower, upper)
_PARAM_RULES = {
    "squeezing_db": ("grid", 0.0, None),
    "gain_db": ("gain", 0.0, None),
    "alpha_sq": ("grid", 0.0, None),
    "sigma_sq": ("grid", 0.0, None),
    "sigma_ens_sq": ("number", 0.25, None),
    "lambda": ("grid", 0.0, 1.0),
    "s_conv": ("number", 0.0, None),
    "monte_carlo_trials": ("count", 0, None),
    "schemes": ("schemes", None, None),
    "scheme": ("scheme", None, None),
    "optimize_rescale": ("bool", None, None),
    "polish": ("bool", None, None),
    "search_range": ("range", 0.0, None),
}


def _check_param(exp_name: str, name: str, val, report: ValidationReport):
    kind, lo, hi = _PARAM_RULES[name]
    where = f"experiment.{name}"
    grid_param = name in EXPERIMENTS[exp_name].grids
    if kind == "grid" and grid_param:
        _check_grid(name, val, report, lo, hi)
    elif kind in ("grid", "number"):
        if not _is_number(val):
            report.violations.append(f"{where}: must be a finite number")
        elif val < lo or (hi is not None and val > hi):
            report.violations.append(f"{where}: value {val} outside [{lo}, {hi if hi is not None else 'inf'}]")
    elif kind == "gain":
        if val is not None and (not _is_number(val) or val < 0):
            report.violations.append(f"{where}: must be null (optimize) or a number >= 0")
    elif kind == "count":
        if not isinstance(val, int) or isinstance(val, bool) or val < 0:
            report.violations.append(f"{where}: must be a non-negative integer")
    elif kind == "bool":
        if not isinstance(val, bool):
            report.violations.append(f"{where}: must be true or false")
    elif kind in ("scheme", "schemes"):
        items = val if kind == "schemes" else [val]
        if kind == "schemes" and (not isinstance(val, list) or not val):
            report.violations.append(f"{where}: must be a non-empty list")
            return
        for s in items:
            try:
                parse_scheme(str(s))
            except ValueError:
                report.violations.append(f"{where}: unknown scheme {s!r}")
    elif kind == "range":
        if (not isinstance(val, list) or len(val) != 2 or not all(_is_number(x) for x in val)
                or not 0 < val[0] < val[1]):
            report.violations.append(f"{where}: must be [low, high] with 0 < low < high")


def validate(config) -> ValidationReport:
    """Schema and range checks without running anything; every violation is listed."""
    report = ValidationReport()
    if not isinstance(config, dict):
        report.violations.append("config: top level must be an object")
        return report
    for key in config:
        if key not in TOP_LEVEL:
            report.violations.append(f"{key}: unknown section")
    _check_device(config.get("device"), report)

    exp = config.get("experiment")
    if not isinstance(exp, dict):
        report.violations.append("experiment: section missing or not an object")
    elif "name" not in exp:
        report.violations.append("experiment.name: missing")
    elif exp["name"] not in EXPERIMENTS:
        report.violations.append(f"experiment.name: unknown experiment {exp['name']!r}")
    else:
        known = EXPERIMENTS[exp["name"]].defaults
        for key, val in exp.items():
            if key == "name":
                continue
            if key not in known:
                report.violations.append(f"experiment.{key}: not a parameter of {exp['name']}")
            else:
                _check_param(exp["name"], key, val, report)

    out = config.get("output")
    if out is None:
        report.notes.append("output: section missing, writing CSV to ./results")
    elif not isinstance(out, dict):
        report.violations.append("output: must be an object")
    else:
        for key in out:
            if key not in DEFAULT_OUTPUT:
                report.violations.append(f"output.{key}: unknown field")
        if "format" in out and out["format"] not in FORMATS:
            report.violations.append(f"output.format: must be one of {FORMATS}")
        if "path" in out and (not isinstance(out["path"], str) or not out["path"]):
            report.violations.append("output.path: must be a non-empty string")

    seed = config.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        report.violations.append("seed: must be a non-negative integer")
    return report


def load_config(config: dict) -> ExperimentConfig:
    report = validate(config)
    if not report.ok:
        raise ConfigError(report.violations)
    exp = dict(config["experiment"])
    name = exp.pop("name")
    params = {**EXPERIMENTS[name].defaults, **exp}
    out = {**DEFAULT_OUTPUT, **(config.get("output") or {})}
    return ExperimentConfig(DeviceModel.from_dict(config.get("device")), name, params,
                            out["path"], out["format"], int(config.get("seed", 0)))


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    return FLOAT_FMT.format(float(x))


def write_table(table: ResultTable, path: Path, fmt: str) -> Path:
    if fmt == "csv":
        target = path.with_suffix(".csv")
        with target.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table.columns)
            writer.writerows([_fmt(v) for v in row] for row in table.rows)
    else:
        target = path.with_suffix(".jsonl")
        with target.open("w") as fh:
            for row in table.rows:
                rec = {c: (v if isinstance(v, str) else (None if v is None or math.isnan(v) else float(v)))
                       for c, v in zip(table.columns, row)}
                fh.write(json.dumps(rec, sort_keys=False) + "\n")
    return target


def run(config: dict, out_dir: str | None = None, threads: int | None = None, seed: int | None = None) -> dict:
    """Run the configured experiment, write its table and summary, and return the summary."""
    cfg = load_config(config)
    exp = EXPERIMENTS[cfg.experiment]
    seed = cfg.seed if seed is None else seed
    threads = threads or os.cpu_count() or 1
    out = Path(out_dir or cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)

    log.info("running %s with %d thread(s)", exp.name, threads)
    table = exp.runner(cfg.params, cfg.device, seed, threads)
    target = write_table(table, out / exp.name, cfg.output_format)
    summary = {"experiment": exp.name, "rows": len(table.rows), "output": str(target), "seed": seed,
               "device": cfg.device.to_dict(), **table.summary}
    (out / f"{exp.name}_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cvqss", description="Gaussian secret-sharing experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment in a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory (overrides output.path)")
    p_run.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    sub.add_parser("list", help="list available experiments")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.command == "list":
        for name, desc in list_experiments():
            print(f"{name:15s} {desc}")
        return 0

    try:
        config = _read_json(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        report = validate(config)
        for note in report.notes:
            print(f"note: {note}")
        for v in report.violations:
            print(f"violation: {v}")
        print("valid" if report.ok else f"{len(report.violations)} violation(s)")
        return 0 if report.ok else 1

    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        summary = run(config, args.out, args.threads, args.seed)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"error: {v}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({k: summary[k] for k in summary if k != "device"}, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
