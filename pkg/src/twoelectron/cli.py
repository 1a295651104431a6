"""Command-line driver.

::

    twoelectron run   --config FILE [--set key=value ...] [--out PATH] [--format csv|json]
    twoelectron sweep --config FILE --axis name=start:stop:num [--axis ...] [--out PATH]

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(non-convergence or an exact resonance).  ``TWOELECTRON_THREADS`` sets the
number of worker threads for grid points (default 1); row order never
depends on it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import yaml

from . import __version__
from .config import RunConfig, apply_override, parse_axis, yaml_load
from .errors import ConfigError, ConvergenceError, NumericError
from .experiments import columns, error_columns, run_point

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
THREADS_ENV = "TWOELECTRON_THREADS"

NORMALIZATION_NOTE = (
    "currents and densities use plane-wave normalisation with the extensive "
    "normalisation factors stripped (values per normalisation volume); "
    "bond currents are 2 Im<c+_l c_(l+1)> on bond (site, site+1)"
)


def fmt(v) -> str:
    """12 significant digits for floats, verbatim for everything else."""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _json_value(v):
    return float(fmt(v)) if isinstance(v, float) else v


def header(cfg: RunConfig, rows, n_points: int) -> dict:
    cols = columns(cfg)
    errs = [cols.index(c) for c in error_columns(cfg)]
    max_err = max((float(r[i]) for r in rows for i in errs), default=0.0)
    return {
        "tool": f"twoelectron {__version__}",
        "experiment": cfg.experiment,
        "model": cfg.model,
        "params": cfg.resolved_params(),
        "grid": cfg.grid,
        "grid_points": n_points,
        "quadrature": {"rtol": cfg.quadrature.rtol, "atol": cfg.quadrature.atol},
        "max_error_estimate": float(fmt(max_err)),
        "normalization": NORMALIZATION_NOTE,
    }


def render(cfg: RunConfig, rows, n_points: int, fmt_name: str) -> str:
    head = header(cfg, rows, n_points)
    cols = columns(cfg)
    if fmt_name == "json":
        doc = {"header": head, "columns": list(cols), "rows": [[_json_value(v) for v in r] for r in rows]}
        return json.dumps(doc, indent=1) + "\n"
    lines = []
    for k, v in head.items():
        text = v if isinstance(v, str) else json.dumps(v, sort_keys=True)
        lines.append(f"# {k}: {text}")
    lines.append(",".join(cols))
    lines.extend(",".join(fmt(v) for v in r) for r in rows)
    return "\n".join(lines) + "\n"


def threads_from_env() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer", {THREADS_ENV: raw}) from None
    return n


def _config_hash(cfg: RunConfig) -> str:
    body = cfg.to_dict()
    body.pop("output")
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def execute(cfg: RunConfig, progress_path: str | None = None, threads: int = 1):
    """Evaluate every grid point in order; returns the concatenated rows.

    With ``progress_path`` each finished point is appended as a JSON line
    ``{"index": i, "rows": [...]}``; a rerun with the same configuration skips
    those points.  JSON keeps full float precision, so resumed and fresh runs
    produce identical tables.
    """
    points = list(cfg.points())
    done = {}
    key = _config_hash(cfg)
    if progress_path and os.path.exists(progress_path):
        with open(progress_path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if lines and json.loads(lines[0]).get("config") == key:
            for line in lines[1:]:
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    break  # torn final line from an interrupted write
                done[rec["index"]] = [tuple(r) for r in rec["rows"]]
        else:
            os.remove(progress_path)
    log = None
    if progress_path:
        fresh = not os.path.exists(progress_path)
        log = open(progress_path, "a", encoding="utf-8")
        if fresh:
            log.write(json.dumps({"config": key}) + "\n")
            log.flush()
    todo = [i for i in range(len(points)) if i not in done]
    try:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for i, rows in zip(todo, pool.map(lambda i: run_point(cfg, points[i]), todo)):
                done[i] = rows
                if log:
                    log.write(json.dumps({"index": i, "rows": rows}) + "\n")
                    log.flush()
    finally:
        if log:
            log.close()
    return [r for i in range(len(points)) for r in done[i]]


def run_config(cfg: RunConfig, out: str | None = None, threads: int = 1) -> str:
    """Run ``cfg``, write the table to ``out`` (or return it) and clean up progress."""
    progress = f"{out}.progress.jsonl" if out else None
    rows = execute(cfg, progress, threads)
    text = render(cfg, rows, cfg.n_points(), cfg.output.format)
    if out:
        tmp = f"{out}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, out)
        if os.path.exists(progress):
            os.remove(progress)
    return text


def _load(args) -> RunConfig:
    try:
        with open(args.config, encoding="utf-8") as fh:
            raw = yaml_load(fh.read()) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc}", {"--config": str(exc)}) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {args.config}", {"--config": str(exc)}) from exc
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping", {"--config": "not a mapping"})
    for item in args.set or []:
        apply_override(raw, item)
    if args.format:
        raw.setdefault("output", {})["format"] = args.format
    if args.out:
        raw.setdefault("output", {})["path"] = args.out
    axes = getattr(args, "axis", None)
    if axes:
        if len(axes) > 2:
            raise ConfigError("a sweep takes one or two axes", {"--axis": f"{len(axes)} given"})
        grid = raw.setdefault("grid", {}) or {}
        raw["grid"] = grid
        for spec in axes:
            name, values = parse_axis(spec)
            grid[name] = values
    return RunConfig.from_dict(raw)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twoelectron", description="Exact two-electron scattering experiments.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("run", "run one configured experiment"),
                       ("sweep", "run an experiment over one or two swept parameters")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry (dotted keys; bare keys go to params)")
        p.add_argument("--out", help="output path (stdout if omitted)")
        p.add_argument("--format", choices=("csv", "json"))
        if name == "sweep":
            p.add_argument("--axis", action="append", required=True, metavar="NAME=SPEC",
                           help="start:stop:num (inclusive) or v1,v2,...")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        threads = threads_from_env()
        text = run_config(cfg, cfg.output.path, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        for k, v in exc.fields.items():
            print(f"  {k}: {v}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        for item in exc.trace:
            print(f"  {item}", file=sys.stderr)
        return EXIT_NUMERIC
    except NumericError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if not cfg.output.path:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
