"""Run configuration: one JSON document, every field overridable by a dotted flag."""

import copy
import json

import numpy as np

DEFAULTS = {
    "seed": 0,
    "data": {"path": None, "format": None, "label_column": 0, "header": False, "zero_one": False},
    "uncertainty": {"gamma": 0.1, "p": 2.0, "sigma_half": 1.0},
    "features": {"kind": "rff", "D": 64, "sigma": 1.0, "variant": "paired", "m": 50, "rank_tol": None},
    "pbar": 2.0,
    "solver": {
        "method": "proximal", "epochs": 20, "schedule": "inverse", "eta0": None,
        "lambda": 1.0, "trace_every": 0, "tail_average": False,
    },
    "verify": {"gammas": [0.0, 0.1, 0.5, 2.0, 10.0], "pbars": [1.0, 2.0, "inf"], "trials": 10000,
               "points": 3, "n": 3},
    "output": {"model": "model.json", "trace": None, "report": None, "predictions": None},
}


class ConfigError(ValueError):
    pass


def _merge(base, new, prefix=""):
    for key, val in new.items():
        if key not in base:
            raise ConfigError(f"unknown config field {prefix}{key}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config field {prefix}{key} must be an object")
            _merge(base[key], val, f"{prefix}{key}.")
        else:
            base[key] = val


def load_config(path=None, overrides=()):
    """Defaults, then the JSON file at ``path``, then ``(dotted_name, raw_value)`` overrides."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        _merge(cfg, user)
    for name, raw in overrides:
        set_dotted(cfg, name, raw)
    return cfg


def set_dotted(cfg, name, raw):
    """Set ``a.b.c`` from a command-line string, parsed as JSON when possible."""
    parts = name.split(".")
    node = cfg
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            raise ConfigError(f"unknown config field {name}")
        node = node[part]
    if parts[-1] not in node or isinstance(node[parts[-1]], dict):
        raise ConfigError(f"unknown config field {name}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node[parts[-1]] = value


def parse_exponent(v, name):
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "infinity", "+inf"):
            return np.inf
        try:
            v = float(v)
        except ValueError:
            raise ConfigError(f"{name} must be a number or 'inf'") from None
    if not isinstance(v, (int, float)) or not v >= 1:
        raise ConfigError(f"{name} must be >= 1 or 'inf'")
    return float(v)


def validate(cfg):
    """Check cross-field consistency; raises :class:`ConfigError`."""
    cfg["uncertainty"]["p"] = parse_exponent(cfg["uncertainty"]["p"], "uncertainty.p")
    cfg["pbar"] = parse_exponent(cfg["pbar"], "pbar")
    feat = cfg["features"]
    if feat["kind"] not in ("rff", "nystrom", "linear"):
        raise ConfigError("features.kind must be rff, nystrom or linear")
    if feat["kind"] == "nystrom":
        if cfg["uncertainty"]["p"] != 2.0:
            raise ConfigError("nystrom features require uncertainty.p = 2")
        if cfg["pbar"] != 2.0:
            raise ConfigError("nystrom features certify pbar = 2 only")
    if feat["kind"] == "rff" and cfg["pbar"] not in (1.0, 2.0, np.inf):
        raise ConfigError("pbar must be 1, 2 or inf for rff features")
    if feat["kind"] == "linear":
        cfg["pbar"] = cfg["uncertainty"]["p"]
    g = cfg["uncertainty"]["gamma"]
    if not isinstance(g, (int, float)) or g < 0:
        raise ConfigError("uncertainty.gamma must be a nonnegative number")
    cfg["verify"]["pbars"] = [parse_exponent(p, "verify.pbars") for p in cfg["verify"]["pbars"]]
    return cfg
