"""From datasets and configs to feature maps, bounds and trained classifiers."""

import numpy as np

from .config import ConfigError
from .core import UncertaintyModel, check_scope, derive_seed
from .nystrom import NystromMap, nystrom_bounds, nystrom_fit, select_landmarks
from .objective import IdentityMap, SolverProblem, linear_bound
from .rff import RffMap, rff_bounds, rff_sample
from .solver import SolverConfig, train


def build_uncertainty(spec, n):
    """``sigma_half`` may be a scalar (times I), a diagonal list or a dense n x n list."""
    S = np.asarray(spec.get("sigma_half", 1.0), dtype=float)
    if S.ndim == 0:
        S = np.full(n, float(S))
    if S.shape not in ((n,), (n, n)):
        raise ConfigError(f"sigma_half has shape {S.shape}, data has n={n}")
    try:
        return UncertaintyModel(S, spec["gamma"], spec["p"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_feature_map(spec, X, seed):
    X = np.asarray(X, dtype=float)
    kind = spec["kind"]
    if kind == "rff":
        return rff_sample(X.shape[1], spec["D"], spec["sigma"], spec.get("variant", "paired"),
                          seed=derive_seed(seed, "features"))
    if kind == "nystrom":
        m = min(int(spec["m"]), X.shape[0])
        landmarks = select_landmarks(X, m, seed=derive_seed(seed, "landmarks"))
        return nystrom_fit(landmarks, spec["sigma"], spec.get("rank_tol"))
    return IdentityMap(X.shape[1])


def feature_bounds(fmap, X, unc, pbar=2.0):
    """Per-sample feature bounds for any supported map."""
    check_scope(unc, len(X))
    if isinstance(fmap, RffMap):
        return rff_bounds(fmap, X, unc, pbar)
    if isinstance(fmap, NystromMap):
        return nystrom_bounds(fmap, X, unc)
    if isinstance(unc, UncertaintyModel):
        return [linear_bound(unc)] * len(X)
    return [linear_bound(u) for u in unc]


def build_problem(dataset, unc, fmap, pbar=2.0, lam=1.0):
    X = dataset.samples
    return SolverProblem(fmap.transform(X), dataset.labels, feature_bounds(fmap, X, unc, pbar), lam, fmap)


def solver_config(spec, seed):
    return SolverConfig(
        method=spec["method"], epochs=int(spec["epochs"]), schedule=spec["schedule"],
        eta0=spec["eta0"], lam=float(spec["lambda"]), seed=derive_seed(seed, "solver"),
        trace_every=int(spec["trace_every"]), tail_average=bool(spec["tail_average"]),
    )


def fit(dataset, unc, fmap, pbar=2.0, config=None):
    """Build the robust problem for ``fmap`` and train it."""
    config = config or SolverConfig()
    return train(build_problem(dataset, unc, fmap, pbar, config.lam), config)
