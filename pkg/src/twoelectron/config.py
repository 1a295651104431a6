"""Run configuration: a YAML document plus ``--set key=value`` overrides.

Example::

    experiment: singlet
    model: sidedot
    params: {eps_d: -0.2, gamma: 0.3, U: 1.0}
    grid:
      gamma: [0.3, 0.4, 0.5]
      U: [0.1, 0.2, 0.5, 1.0, 2.0]
    quadrature: {rtol: 1.0e-10, atol: 1.0e-12}
    output: {format: csv, path: fig4.csv}

``params`` holds scalar values; every key in ``grid`` is swept over its list
(cross product, first key slowest) and overrides the scalar of the same name.
For the parallel model ``gamma`` and ``eps`` set both conductors at once.
"""

from __future__ import annotations

import copy
import itertools
import math
import re
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ConfigError

EXPERIMENTS = (
    "amplitudes",
    "kernel",
    "deltaS",
    "current",
    "closed-form-check",
    "pump",
    "pump-average",
    "singlet",
    "correlators",
    "conservation-check",
)

MODEL_PARAMS = {
    "parallel": ("eps_I", "eps_II", "gamma_I", "gamma_II", "lam"),
    "sidedot": ("eps_d", "gamma", "U"),
}

# parameters each experiment reads besides the model ones, with defaults
EXPERIMENT_PARAMS = {
    "amplitudes": {"k": None},
    "kernel": {"k1": None, "k2": None},
    "deltaS": {"E1": None, "E2": None, "E3": None, "E4": None},
    "current": {"k1": None, "k2": None, "site": 50, "conductor": 1},
    "closed-form-check": {"k1": None, "k2": None, "site": 50},
    "pump": {"k1": 1.35, "k2": 1.35, "omega": 0.01, "phi": 0.35, "n_samples": 256, "site": 50, "conductor": 1},
    "pump-average": {"k1": 1.35, "k2": 1.35, "omega": 0.01, "phi": 0.35, "n_samples": 256, "site": 50,
                     "conductor": 1},
    "singlet": {"site": 50},
    "correlators": {"k1": None, "k2": None, "l": 50, "m": 50},
    "conservation-check": {"k1": "k0", "k2": "k0", "site": 50},
}

# which models an experiment accepts
EXPERIMENT_MODELS = {
    "amplitudes": ("parallel", "sidedot"),
    "kernel": ("parallel", "sidedot"),
    "deltaS": ("parallel",),
    "current": ("parallel", "sidedot"),
    "closed-form-check": ("parallel",),
    "pump": ("parallel",),
    "pump-average": ("parallel",),
    "singlet": ("sidedot",),
    "correlators": ("parallel", "sidedot"),
    "conservation-check": ("sidedot",),
}

# shorthand keys that set several model parameters at once
MODEL_ALIASES = {
    "parallel": {"gamma": ("gamma_I", "gamma_II"), "eps": ("eps_I", "eps_II")},
    "sidedot": {},
}

MODEL_DEFAULTS = {
    "parallel": {"eps_I": 0.0, "eps_II": 0.0, "gamma_I": 1.0, "gamma_II": 1.0, "lam": 0.0},
    "sidedot": {"eps_d": 0.0, "gamma": 0.5, "U": 0.0},
}

FORMATS = ("csv", "json")


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e-8`` (no decimal point) as a float."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"),
    list("-+0123456789"),
)


def yaml_load(text):
    """Parse one YAML document with :class:`_Loader`."""
    return yaml.load(text, Loader=_Loader)


@dataclass
class QuadratureSettings:
    """Tolerances handed to every band integral."""

    rtol: float = 1e-10
    atol: float = 1e-12


@dataclass
class OutputSettings:
    format: str = "csv"
    path: str | None = None


@dataclass
class RunConfig:
    """Validated description of one experiment run."""

    experiment: str
    model: str
    params: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "model": self.model,
            "params": dict(self.params),
            "grid": {k: list(v) for k, v in self.grid.items()},
            "quadrature": {"rtol": self.quadrature.rtol, "atol": self.quadrature.atol},
            "output": {"format": self.output.format, "path": self.output.path},
        }

    @classmethod
    def from_dict(cls, raw) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a mapping", {"<root>": "not a mapping"})
        known = {"experiment", "model", "params", "grid", "quadrature", "output"}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError("unknown top-level keys", {k: "unknown key" for k in unknown})
        quad = raw.get("quadrature") or {}
        out = raw.get("output") or {}
        errors = {}
        for name, sect, allowed in (("quadrature", quad, {"rtol", "atol"}), ("output", out, {"format", "path"})):
            if not isinstance(sect, dict):
                errors[name] = "must be a mapping"
            else:
                for k in set(sect) - allowed:
                    errors[f"{name}.{k}"] = "unknown key"
        if errors:
            raise ConfigError("invalid configuration", errors)
        cfg = cls(
            experiment=raw.get("experiment"),
            model=raw.get("model", "parallel"),
            params=copy.deepcopy(raw.get("params") or {}),
            grid=copy.deepcopy(raw.get("grid") or {}),
            quadrature=QuadratureSettings(**quad),
            output=OutputSettings(**out),
        )
        cfg.validate()
        return cfg

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            raw = yaml_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse configuration: {exc}", {"<file>": "YAML syntax"}) from exc
        return cls.from_dict(raw if raw is not None else {})

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}", {"<file>": str(exc)}) from exc
        return cls.loads(text)

    # -- resolution -------------------------------------------------------

    def resolved_params(self) -> dict:
        """Model defaults, experiment defaults, then user ``params``."""
        base = dict(MODEL_DEFAULTS.get(self.model, {}))
        base.update(EXPERIMENT_PARAMS.get(self.experiment, {}))
        base.update(self.params)
        return base

    def points(self):
        """Parameter dicts of the grid cross product (first grid key slowest)."""
        base = self.resolved_params()
        keys = list(self.grid)
        for combo in itertools.product(*(self.grid[k] for k in keys)):
            p = dict(base)
            p.update(zip(keys, combo))
            for alias, targets in MODEL_ALIASES.get(self.model, {}).items():
                if alias in p:
                    for t in targets:
                        p[t] = p[alias]
            yield p

    def n_points(self) -> int:
        return int(np.prod([len(v) for v in self.grid.values()])) if self.grid else 1

    # -- validation -------------------------------------------------------

    def validate(self) -> None:
        """Check every field; raise :class:`ConfigError` listing all problems."""
        from .experiments import build_point

        errors = {}
        if self.experiment not in EXPERIMENTS:
            errors["experiment"] = f"must be one of {', '.join(EXPERIMENTS)}"
        if self.model not in MODEL_PARAMS:
            errors["model"] = f"must be one of {', '.join(MODEL_PARAMS)}"
        elif self.experiment in EXPERIMENT_MODELS and self.model not in EXPERIMENT_MODELS[self.experiment]:
            errors["model"] = f"experiment {self.experiment!r} needs model in {EXPERIMENT_MODELS[self.experiment]}"
        if not isinstance(self.params, dict):
            errors["params"] = "must be a mapping"
        if not isinstance(self.grid, dict):
            errors["grid"] = "must be a mapping"
        structural = bool(errors)
        if self.output.format not in FORMATS:
            errors["output.format"] = f"must be one of {', '.join(FORMATS)}"
        if self.output.path is not None and not isinstance(self.output.path, str):
            errors["output.path"] = "must be a string"
        for name in ("rtol", "atol"):
            v = getattr(self.quadrature, name)
            if not _is_number(v) or not math.isfinite(v) or v < 0 or (name == "rtol" and v == 0):
                errors[f"quadrature.{name}"] = "must be a finite number (rtol > 0, atol >= 0)"
        if structural:
            raise ConfigError("invalid configuration", errors)

        allowed = set(MODEL_PARAMS[self.model]) | set(EXPERIMENT_PARAMS[self.experiment])
        allowed |= set(MODEL_ALIASES[self.model])
        for sect, mapping in (("params", self.params), ("grid", self.grid)):
            for k in mapping:
                if k not in allowed:
                    errors[f"{sect}.{k}"] = f"not a parameter of {self.experiment}/{self.model}"
        for k, v in self.grid.items():
            if not isinstance(v, (list, tuple)) or len(v) == 0:
                errors[f"grid.{k}"] = "must be a non-empty list"
        for k, v in self.resolved_params().items():
            if v is None and k not in self.grid:
                errors[f"params.{k}"] = "required"
        if any(k.startswith(("params.", "grid.")) for k in errors):
            raise ConfigError("invalid configuration", errors)

        # build every grid point so domain errors surface before any integral runs
        seen = set()
        for p in self.points():
            where = ", ".join(f"{k}={p[k]}" for k in self.grid)
            try:
                build_point(self, p)
            except ConfigError as exc:
                for k, v in exc.fields.items():
                    if (k, v) not in seen:
                        seen.add((k, v))
                        errors[f"{k} ({where})" if where else k] = v
            except (ValueError, TypeError) as exc:
                if str(exc) in seen:
                    continue
                seen.add(str(exc))
                errors[f"params ({where})" if where else "params"] = str(exc)
            if len(errors) >= 20:
                break
        if errors:
            raise ConfigError("invalid configuration", errors)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def apply_override(raw: dict, assignment: str) -> dict:
    """Apply one ``dotted.key=value`` assignment to a raw config mapping.

    Values are parsed as YAML scalars or flow sequences (``[0.1, 0.2]``).
    A bare key that is not a top-level section is taken to live in ``params``.
    """
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not key=value", {assignment: "expected key=value"})
    key, text = assignment.split("=", 1)
    key = key.strip()
    try:
        value = yaml_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse value in {assignment!r}", {key: str(exc)}) from exc
    parts = key.split(".")
    if len(parts) == 1 and parts[0] not in ("experiment", "model"):
        parts = ["params", parts[0]]
        # the flag wins over a grid entry of the same name in the file
        grid = raw.get("grid")
        if isinstance(grid, dict):
            grid.pop(parts[1], None)
    node = raw
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot set {key}", {key: f"{p} is not a mapping"})
    node[parts[-1]] = value
    return raw


def parse_axis(spec: str):
    """``name=start:stop:num`` (inclusive linspace) or ``name=v1,v2,...``."""
    if "=" not in spec:
        raise ConfigError(f"axis {spec!r} is not name=values", {spec: "expected name=values"})
    name, text = spec.split("=", 1)
    name = name.strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError("num must be >= 1")
            values = [float(x) for x in np.linspace(float(a), float(b), n)]
        else:
            values = [yaml_load(x) for x in text.split(",") if x.strip()]
            if not values:
                raise ValueError("empty value list")
    except ValueError as exc:
        raise ConfigError(f"bad axis {spec!r}", {f"axis.{name}": str(exc)}) from exc
    return name, values
