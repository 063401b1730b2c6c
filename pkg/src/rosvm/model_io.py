"""Versioned JSON model files and CSV training traces."""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CorruptModelError, ModelVersionError
from .nystrom import NystromMap
from .objective import IdentityMap, RobustClassifier
from .rff import RffMap

FORMAT_VERSION = 1

_TOP_KEYS = {"format_version", "feature_map", "zeta", "bias", "metadata"}
_MAP_KEYS = {
    "rff": {"kind", "sigma", "D", "variant", "seed", "omegas", "offsets"},
    "nystrom": {"kind", "sigma", "rank", "rank_tol", "landmarks", "eigvecs", "eigvals"},
    "linear": {"kind", "n"},
}


@dataclass(frozen=True, eq=False)
class ModelFile:
    classifier: RobustClassifier
    metadata: dict = field(default_factory=dict)


def map_to_dict(fmap):
    if isinstance(fmap, RffMap):
        return {
            "kind": "rff", "sigma": fmap.sigma, "D": fmap.D, "variant": fmap.variant,
            "seed": fmap.seed, "omegas": fmap.omegas.tolist(),
            "offsets": None if fmap.offsets is None else fmap.offsets.tolist(),
        }
    if isinstance(fmap, NystromMap):
        return {
            "kind": "nystrom", "sigma": fmap.sigma, "rank": fmap.rank, "rank_tol": fmap.rank_tol,
            "landmarks": fmap.landmarks.tolist(), "eigvecs": fmap.eigvecs.tolist(),
            "eigvals": fmap.eigvals.tolist(),
        }
    if isinstance(fmap, IdentityMap):
        return {"kind": "linear", "n": fmap.n}
    raise TypeError(f"cannot serialize feature map {type(fmap).__name__}")


def map_from_dict(d):
    kind = d.get("kind")
    if kind not in _MAP_KEYS:
        raise ModelVersionError(f"unknown feature map kind {kind!r}")
    extra = set(d) - _MAP_KEYS[kind]
    if extra:
        raise ModelVersionError(f"unknown feature map fields {sorted(extra)}")
    if kind == "rff":
        return RffMap(d["omegas"], d["sigma"], d["D"], d["variant"], d["offsets"], d["seed"])
    if kind == "nystrom":
        nmap = NystromMap(d["landmarks"], d["sigma"], d["eigvecs"], d["eigvals"], d["rank_tol"])
        if nmap.rank != d["rank"]:
            raise CorruptModelError("stored rank does not match the eigenpairs")
        return nmap
    return IdentityMap(d["n"])


def model_to_dict(classifier, metadata=None):
    return {
        "format_version": FORMAT_VERSION,
        "feature_map": map_to_dict(classifier.feature_map),
        "zeta": classifier.zeta.tolist(),
        "bias": classifier.bias,
        "metadata": dict(metadata or {}),
    }


def model_from_dict(d):
    if not isinstance(d, dict) or "format_version" not in d:
        raise CorruptModelError("missing format_version")
    if d["format_version"] != FORMAT_VERSION:
        raise ModelVersionError(f"model format version {d['format_version']!r}, this build reads {FORMAT_VERSION}")
    extra = set(d) - _TOP_KEYS
    if extra:
        raise ModelVersionError(f"unknown model fields {sorted(extra)}")
    try:
        fmap = map_from_dict(d["feature_map"])
        clf = RobustClassifier(np.array(d["zeta"], dtype=float), float(d["bias"]), fmap)
    except ModelVersionError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptModelError(f"invalid model contents: {exc}") from None
    return ModelFile(clf, d.get("metadata") or {})


def dumps_model(classifier, metadata=None):
    # repr-based float output round-trips every double exactly
    return json.dumps(model_to_dict(classifier, metadata), allow_nan=False)


def loads_model(text):
    try:
        d = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptModelError(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(d)


def save_model(path, classifier, metadata=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model(classifier, metadata))


def load_model(path):
    with open(path, "rb") as fh:
        return loads_model(fh.read())


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["update_index", "objective"])
        for t, obj in trace.rows():
            w.writerow([t, repr(obj)])
