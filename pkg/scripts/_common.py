"""Helpers shared by the figure scripts."""

import csv
import io
import os

from twoelectron.cli import run_config, threads_from_env
from twoelectron.config import RunConfig

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run(config_name, out_name):
    """Run ``configs/<config_name>`` into ``results/<out_name>``; returns rows as dicts."""
    cfg = RunConfig.load(os.path.join(ROOT, "configs", config_name))
    os.makedirs(os.path.join(ROOT, "results"), exist_ok=True)
    out = os.path.join(ROOT, "results", out_name)
    text = run_config(cfg, out, threads_from_env())
    body = "\n".join(l for l in text.splitlines() if not l.startswith("#"))
    print(f"wrote {out}")
    return [{k: _num(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(body))]


def _num(v):
    try:
        return float(v)
    except ValueError:
        return v
