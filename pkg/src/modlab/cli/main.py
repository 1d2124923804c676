"""``modlab <experiment> run --config FILE --out DIR``.

Writes ``report.json`` (deterministic: config echo, version, results and
verdicts), one CSV per data table, optional snapshots, and ``manifest.json``
(file hashes and wall-clock timings). Exit status: 0 when every verdict
passes, 1 when any fails, 2 on invalid configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
from pathlib import Path

from .. import __version__
from ..config import SUBCOMMANDS, ConfigError, load_config
from ..experiments import runner_for
from ..io import write_csv, write_json, write_snapshot, write_snapshot_csv

OUT_ENV = "MODLAB_OUT"
DEFAULT_OUT_ROOT = "modlab-out"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="modlab", description="Modulated dispersion experiments.")
    ap.add_argument("--version", action="version", version=f"modlab {__version__}")
    sub = ap.add_subparsers(dest="experiment", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=f"{SUBCOMMANDS[name]} experiment")
        actions = sp.add_subparsers(dest="action", required=True)
        run = actions.add_parser("run", help="run the experiment")
        run.add_argument("--config", help="INI config file (defaults when omitted)")
        run.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<experiment> "
                                       f"or ./{DEFAULT_OUT_ROOT}/<experiment>)")
        run.add_argument("--seed", type=int, help="run a single seed instead of the config seed list")
        run.add_argument("--jobs", type=int, help="worker processes for independent seeds")
        run.add_argument("--quiet", action="store_true", help="suppress the verdict summary")
    return ap


def output_dir(out: str | None, experiment: str) -> Path:
    if out:
        return Path(out)
    return Path(os.environ.get(OUT_ENV, DEFAULT_OUT_ROOT)) / experiment


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_experiment(cfg, out_dir: Path) -> dict:
    """Execute ``cfg`` and write all outputs into ``out_dir``; returns the report."""
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    outcome = runner_for(cfg.experiment)(cfg)
    elapsed = time.perf_counter() - t0

    files = []
    for name, (header, rows) in sorted(outcome.tables.items()):
        files.append(write_csv(out_dir / f"{name}.csv", header, rows).name)
    for name, (fld, t) in sorted(outcome.snapshots.items()):
        files.append(write_snapshot(fld, t, out_dir / f"{name}.bin").name)
        if fld.d == 1:
            files.append(write_snapshot_csv(fld, out_dir / f"{name}.csv").name)

    report = {
        "experiment": cfg.experiment,
        "artifact_version": __version__,
        "config": cfg.echo(),
        "results": outcome.results,
        "verdicts": outcome.verdicts,
        "all_passed": all(v["passed"] for v in outcome.verdicts),
        "outputs": sorted(files),
    }
    if outcome.label:
        report["label"] = outcome.label
    write_json(report, out_dir / "report.json")
    manifest = {
        "experiment": cfg.experiment,
        "artifact_version": __version__,
        "config_source": cfg.source,
        "timings": {"wall_seconds": elapsed},
        "files": {f: _sha256(out_dir / f) for f in sorted(files + ["report.json"])},
    }
    write_json(manifest, out_dir / "manifest.json")
    return report


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    experiment = SUBCOMMANDS[args.experiment]
    try:
        cfg = load_config(args.config, experiment)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed: must be non-negative")
            cfg.seeds = [args.seed]
        if args.jobs is not None:
            if args.jobs < 1:
                raise ConfigError("--jobs: must be >= 1")
            cfg.jobs = args.jobs
    except ConfigError as exc:
        print(f"modlab: invalid config: {exc}", file=sys.stderr)
        return 2
    out = output_dir(args.out, experiment)
    try:
        report = run_experiment(cfg, out)
    except (ValueError, OSError) as exc:
        print(f"modlab: {experiment} failed: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        for v in report["verdicts"]:
            mark = "PASS" if v["passed"] else "FAIL"
            print(f"{mark}  {v['name']}: {v['value']!r} {v['relation']} {v['tolerance']!r}  ({v['checks']})")
        print(f"{experiment}: {'all passed' if report['all_passed'] else 'FAILED'} -> {out}")
    return 0 if report["all_passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
