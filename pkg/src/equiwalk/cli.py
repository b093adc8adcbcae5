"""Command-line experiment runner.

    equiwalk <lattice|crystal|torus|sphere> --config PATH [--out DIR] [--threads N] [--tolerance X]

Exit codes: 0 when every check passes, 1 on any failed check, 2 on a
validation error. ``EQUIWALK_OUT`` sets the default output directory.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from importlib import resources

from . import experiments
from .errors import ValidationError

log = logging.getLogger("equiwalk")

SCHEMA_VERSION = 1
SUBCOMMANDS = ("lattice", "crystal", "torus", "sphere")
OUT_ENV = "EQUIWALK_OUT"
RESERVED = {"schema_version", "subcommand", "scenario", "params", "tolerance", "output"}


class ConfigError(ValidationError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ExperimentConfig:
    subcommand: str
    scenario: str
    params: dict
    tolerance: float | None = None
    output: str | None = None
    source: str | None = None
    raw: dict = field(default_factory=dict)


def shipped_scenarios() -> dict:
    """Shipped scenario file names mapped to their paths."""
    root = resources.files("equiwalk.data.scenarios")
    return {p.name[:-5]: str(p) for p in root.iterdir() if p.name.endswith(".json")}


def _resolve_config_path(path: str) -> str:
    if os.path.exists(path):
        return path
    shipped = shipped_scenarios()
    stem = os.path.splitext(os.path.basename(path))[0]
    if stem in shipped:
        return shipped[stem]
    return path


def parse_config(path_or_dict, subcommand: str | None = None) -> ExperimentConfig:
    """Validate a config. Raises ConfigError listing every problem found."""
    base_dir, source = None, None
    if isinstance(path_or_dict, dict):
        raw = path_or_dict
    else:
        source = _resolve_config_path(str(path_or_dict))
        base_dir = os.path.dirname(os.path.abspath(source))
        try:
            with open(source) as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError([f"config: file {path_or_dict!r} not found"]) from None
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config: malformed JSON ({exc})"]) from None
    if not isinstance(raw, dict):
        raise ConfigError(["config: top level must be a JSON object"])

    errors = []
    ver = raw.get("schema_version", SCHEMA_VERSION)
    if ver != SCHEMA_VERSION:
        errors.append(f"schema_version: unsupported version {ver!r}, expected {SCHEMA_VERSION}")
    name = raw.get("scenario")
    sc = experiments.REGISTRY.get(name) if isinstance(name, str) else None
    if sc is None:
        errors.append(f"scenario: unknown scenario {name!r}; known: {sorted(experiments.REGISTRY)}")
    sub = raw.get("subcommand", subcommand)
    if sub is not None and sub not in SUBCOMMANDS:
        errors.append(f"subcommand: must be one of {SUBCOMMANDS}, got {sub!r}")
    if subcommand is not None and raw.get("subcommand") not in (None, subcommand):
        errors.append(f"subcommand: config says {raw['subcommand']!r} but {subcommand!r} was requested")
    if sc is not None and sub is not None and sc.subcommand != sub:
        errors.append(f"scenario: {name!r} belongs to subcommand {sc.subcommand!r}, not {sub!r}")
    tol = raw.get("tolerance")
    if tol is not None and (isinstance(tol, bool) or not isinstance(tol, (int, float)) or tol <= 0):
        errors.append(f"tolerance: must be a positive number, got {tol!r}")

    nested = raw.get("params", {})
    if not isinstance(nested, dict):
        errors.append("params: must be an object")
        nested = {}
    flat = {k: v for k, v in raw.items() if k not in RESERVED}
    dup = set(flat) & set(nested)
    errors.extend(f"params.{k}: given both at top level and under params" for k in sorted(dup))
    params = {}
    if sc is not None:
        params, perr = experiments.validate_params(sc, {**flat, **nested}, base_dir)
        errors.extend(perr)
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(sc.subcommand, sc.name, params, tol, raw.get("output"), source, raw)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "%.17g" % x
    if hasattr(x, "item"):
        return _fmt(x.item())
    return str(x)


def write_table(path: str, table: experiments.Table) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=",", lineterminator="\n")
        w.writerow(table.header)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])


def run_experiment(config: ExperimentConfig, out_dir: str | None = None, threads: int = 1,
                   tolerance: float | None = None) -> experiments.ScenarioResult:
    """Run a validated config and write CSV tables plus summary.json under out_dir/scenario."""
    sc = experiments.REGISTRY[config.scenario]
    tol = tolerance if tolerance is not None else config.tolerance
    try:
        result = sc.run(config.params, tol, max(int(threads), 1))
    except ValidationError as exc:
        raise ValidationError(f"scenario {config.scenario!r}: {exc}") from exc
    if out_dir is not None:
        target = os.path.join(out_dir, config.scenario)
        os.makedirs(target, exist_ok=True)
        files = {}
        for name, table in result.tables.items():
            fn = f"{name}.csv"
            write_table(os.path.join(target, fn), table)
            files[name] = fn
        summary = {
            "schema_version": SCHEMA_VERSION,
            "subcommand": config.subcommand,
            "scenario": config.scenario,
            "criterion": sc.criterion,
            "params": config.params,
            "tolerance": tol,
            "pass": result.passed,
            "checks": [c.to_dict() for c in result.checks],
            "tables": files,
            "notes": result.notes,
        }
        with open(os.path.join(target, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return result


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="equiwalk", description="Run quantum-walk equidistribution experiments.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, help="config JSON path or shipped scenario name")
    ap.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./results)")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--tolerance", type=float, default=None, help="eigenvalue grouping tolerance override")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    if args.tolerance is not None and args.tolerance <= 0:
        print("error: --tolerance must be positive", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(args.config, args.subcommand)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return 2
    out = args.out or cfg.output or os.environ.get(OUT_ENV) or "results"
    try:
        result = run_experiment(cfg, out, args.threads, args.tolerance)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for c in result.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {cfg.scenario}: {c.name} = {c.value:.6g} ({c.relation} {c.threshold:g})")
    print(f"{cfg.scenario}: {'PASS' if result.passed else 'FAIL'} -> {os.path.join(out, cfg.scenario)}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
