"""Run configuration: a YAML file with a fixed schema, overridable by dotted ``key=value`` flags.

Schema (defaults shown)::

    grid:       {N: 128, T: 64, S: 32, substeps: 4}
    tolerances: {closed: null, endpoint: 1.0e-3, loop: 1.0e-6}
    estimator:  {M_cut: 3, temporal: 6, budget: 200, restarts: 5, seed: 0}
    suites:     []        # suite names run by ``hoferlike all``
    output:     out

``tolerances.closed`` null means the grid default 1e-6 * N.  Unknown keys are
rejected at every level.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass

import yaml

SUITES = ("hodge", "flux", "lengths", "loop", "scaling", "fragment", "twoparam",
          "flux0", "displace", "duality", "iterates")

DEFAULTS = {
    "grid": {"N": 128, "T": 64, "S": 32, "substeps": 4},
    "tolerances": {"closed": None, "endpoint": 1e-3, "loop": 1e-6},
    "estimator": {"M_cut": 3, "temporal": 6, "budget": 200, "restarts": 5, "seed": 0},
    "suites": [],
    "output": "out",
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, new: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in new.items():
        if k not in base:
            raise ConfigError(f"unknown config key {where + k!r}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"config key {where + k!r} must be a mapping")
            out[k] = _merge(base[k], v, where + k + ".")
        else:
            out[k] = v
    return out


def _check_int(value, name, lo, hi, even=False) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer")
    if not lo <= value <= hi:
        raise ConfigError(f"{name} must lie in [{lo}, {hi}]")
    if even and value % 2:
        raise ConfigError(f"{name} must be even")
    return value


def _check_pos(value, name, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, str):
        # YAML 1.1 reads exponent floats without a dot (1e-4) as strings
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigError(f"{name} must be a positive number")
    return float(value)


@dataclass(frozen=True)
class RunConfig:
    data: dict

    @classmethod
    def from_dict(cls, d: dict | None = None) -> "RunConfig":
        merged = _merge(DEFAULTS, d or {})
        g, tol, est = merged["grid"], merged["tolerances"], merged["estimator"]
        _check_int(g["N"], "grid.N", 8, 512, even=True)
        _check_int(g["T"], "grid.T", 16, 512)
        _check_int(g["S"], "grid.S", 2, 512)
        _check_int(g["substeps"], "grid.substeps", 1, 64)
        tol["closed"] = _check_pos(tol["closed"], "tolerances.closed", allow_none=True)
        tol["endpoint"] = _check_pos(tol["endpoint"], "tolerances.endpoint")
        tol["loop"] = _check_pos(tol["loop"], "tolerances.loop")
        _check_int(est["M_cut"], "estimator.M_cut", 1, 16)
        _check_int(est["temporal"], "estimator.temporal", 2, 16)
        _check_int(est["budget"], "estimator.budget", 1, 100000)
        _check_int(est["restarts"], "estimator.restarts", 1, 100)
        _check_int(est["seed"], "estimator.seed", 0, 2**32 - 1)
        if not isinstance(merged["suites"], list) or any(s not in SUITES for s in merged["suites"]):
            raise ConfigError(f"suites must be a list drawn from {', '.join(SUITES)}")
        if not isinstance(merged["output"], str):
            raise ConfigError("output must be a path string")
        return cls(merged)

    @classmethod
    def load(cls, path, overrides=()) -> "RunConfig":
        with open(path) as fh:
            try:
                d = yaml.safe_load(fh) or {}
            except yaml.YAMLError as exc:
                raise ConfigError(f"config is not valid YAML: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config file must hold a mapping")
        return cls.from_dict(apply_overrides(d, overrides))

    def __getitem__(self, key):
        return self.data[key]

    @property
    def N(self) -> int:
        return self.data["grid"]["N"]

    @property
    def T(self) -> int:
        return self.data["grid"]["T"]

    @property
    def seed(self) -> int:
        return self.data["estimator"]["seed"]

    def with_seed(self, seed: int) -> "RunConfig":
        d = copy.deepcopy(self.data)
        d["estimator"]["seed"] = int(seed)
        return RunConfig.from_dict(d)

    def canonical(self) -> str:
        """Sorted compact JSON of everything except the output directory."""
        d = {k: v for k, v in self.data.items() if k != "output"}
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def apply_overrides(d: dict, overrides) -> dict:
    """Apply ``a.b=value`` strings; values are parsed as YAML scalars."""
    d = copy.deepcopy(d)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = d
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} descends into a scalar")
        node[parts[-1]] = yaml.safe_load(raw)
    return d
