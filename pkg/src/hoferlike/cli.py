"""Command line front end.

    hoferlike <suite> [--config FILE] [--set key=value]... [--out DIR] [--seed INT] [--parallel K]
    hoferlike all [...]                      runs config ``suites`` (or every suite)
    hoferlike convert FILE --to json|container [--out PATH]

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import SUITES, ConfigError, RunConfig, apply_overrides
from .io import ContainerParseError, convert
from .suites import SuiteResult, run

SCHEMA = "hoferlike.report/1"


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return x


def report_dict(res: SuiteResult, cfg: RunConfig) -> dict:
    return _plain({
        "schema": SCHEMA,
        "version": __version__,
        "suite": res.name,
        "config_hash": cfg.hash(),
        "config": json.loads(cfg.canonical()),
        "pass": res.passed,
        "checks": res.checks,
        "failures": res.failures,
        "tables": res.tables,
    })


def _csv_text(rows: list) -> str:
    buf = _stdio.StringIO()
    if not rows:
        return ""
    cols = list(rows[0].keys())
    for r in rows[1:]:
        cols += [k for k in r if k not in cols]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for k, v in _plain(r).items()})
    return buf.getvalue()


def write_artifacts(res: SuiteResult, cfg: RunConfig, out: Path) -> Path:
    """Write report.json, one CSV per table and one plot_<name>.csv per plot series."""
    d = Path(out) / res.name
    d.mkdir(parents=True, exist_ok=True)
    rep = report_dict(res, cfg)
    (d / "report.json").write_text(json.dumps(rep, sort_keys=True, indent=1) + "\n")
    for name, rows in res.tables.items():
        (d / f"{name}.csv").write_text(_csv_text(rows))
    for name, rows in res.plots.items():
        (d / f"plot_{name}.csv").write_text(_csv_text(rows))
    return d / "report.json"


def _suite_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hoferlike", description="Hofer-like geometry toolkit on the flat torus")
    p.add_argument("suite", choices=list(SUITES) + ["all"])
    p.add_argument("--config", help="YAML run configuration")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--out", help="output directory (overrides config 'output')")
    p.add_argument("--seed", type=int, help="estimator and sampling seed")
    p.add_argument("--parallel", type=int, default=1, metavar="K")
    p.add_argument("--version", action="version", version=__version__)
    return p


def _convert_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hoferlike convert")
    p.add_argument("file")
    p.add_argument("--to", required=True, choices=["json", "container"])
    p.add_argument("--out")
    return p


def _load_config(args) -> RunConfig:
    if args.config:
        cfg = RunConfig.load(args.config, args.overrides)
    else:
        cfg = RunConfig.from_dict(apply_overrides({}, args.overrides))
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "convert":
        args = _convert_parser().parse_args(argv[1:])
        try:
            out = convert(args.file, args.to, args.out)
        except (ContainerParseError, OSError, ValueError) as exc:
            print(f"hoferlike convert: {exc}", file=sys.stderr)
            return 2
        print(out)
        return 0
    parser = _suite_parser()
    args = parser.parse_args(argv)
    if args.parallel < 1:
        parser.error("--parallel must be at least 1")
    try:
        cfg = _load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"hoferlike: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out or cfg["output"])
    names = (cfg["suites"] or list(SUITES)) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        res = run(name, cfg, args.parallel)
        path = write_artifacts(res, cfg, out)
        print(f"{name}: {'PASS' if res.passed else 'FAIL'} ({path})")
        for f in res.failures:
            print(f"  failed: {json.dumps(_plain(f), sort_keys=True)}", file=sys.stderr)
        ok = ok and res.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
