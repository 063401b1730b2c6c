"""Stochastic subgradient and stochastic proximal training of the robust objective."""

import logging
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from ._accel import use_numba
from .errors import DivergedTrainingError
from .objective import (
    RobustClassifier,
    objective_value,
    prox_ridge,
    robust_hinge_subgrad,
    subgrad_scale,
)

log = logging.getLogger(__name__)

METHODS = ("subgradient", "proximal")
SCHEDULES = ("constant", "inverse")


@dataclass(frozen=True)
class SolverConfig:
    """Training settings.

    ``eta0=None`` resolves at training time to 1/(lam + L G^2), where G
    bounds the per-sample subgradient norm. ``schedule="inverse"``
    uses eta0 / (1 + lam * eta0 * t). ``tail_average`` returns the mean
    iterate of the final epoch instead of the last one.
    """

    method: str = "proximal"
    epochs: int = 20
    schedule: str = "inverse"
    eta0: float = None
    lam: float = 1.0
    seed: int = 0
    trace_every: int = 0
    tail_average: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}")
        if int(self.epochs) < 1:
            raise ValueError("epochs must be >= 1")
        if self.eta0 is not None and not self.eta0 > 0:
            raise ValueError("eta0 must be positive")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if int(self.trace_every) < 0:
            raise ValueError("trace_every must be >= 0")


@dataclass(frozen=True, eq=False)
class TrainingTrace:
    updates: np.ndarray
    objectives: np.ndarray
    total_updates: int

    def rows(self):
        return zip(self.updates.tolist(), self.objectives.tolist())


def step_size(config, t):
    if t < 1:
        raise ValueError("update index starts at 1")
    if config.eta0 is None:
        raise ValueError("eta0 is unresolved; train() fills it in")
    if config.schedule == "constant":
        return config.eta0
    return config.eta0 / (1.0 + config.lam * config.eta0 * t)


@np.errstate(over="ignore", invalid="ignore")
def _epoch_numpy(problem, config, zeta, bias, idx, t0, avg, avg_from):
    L = problem.L
    lam = config.lam
    F, y, bounds = problem.features, problem.labels, problem.bounds
    trace = []
    for k, l in enumerate(idx):
        t = t0 + k + 1
        eta = step_size(config, t)
        gz, gb = robust_hinge_subgrad(zeta, bias, F[l], y[l], bounds[l])
        if not (np.all(np.isfinite(gz)) and np.isfinite(zeta @ F[l] + bias)):
            raise DivergedTrainingError(f"non-finite loss at update {t}")
        if config.method == "subgradient":
            zeta = zeta - eta * (lam * zeta + L * gz)
        else:
            zeta = prox_ridge(zeta - eta * L * gz, eta, lam)
        bias = bias - eta * L * gb
        if t >= avg_from:
            avg[:-1] += zeta
            avg[-1] += bias
        if config.trace_every and t % config.trace_every == 0:
            trace.append(objective_value(problem, zeta, bias))
    return zeta, bias, trace


def _epoch_numba(problem, config, zeta, bias, idx, t0, avg, avg_from):
    pk = problem.packed
    n_trace = len(idx) // config.trace_every if config.trace_every else 0
    trace = np.empty(n_trace + 1)
    bias, status, n_traced = _kernels.sgd_epoch(
        zeta, float(bias), problem.features, problem.labels, pk["gam"], pk["q"], pk["qcode"],
        pk["kind"], pk["trig"], pk["diag"], pk["dense"], pk["fidx"], pk["udim"],
        config.lam, config.eta0, SCHEDULES.index(config.schedule), METHODS.index(config.method),
        idx, t0, int(config.trace_every), avg, avg_from, trace)
    if status:
        raise DivergedTrainingError(f"non-finite loss within updates {t0 + 1}..{t0 + len(idx)}")
    return zeta, bias, trace[:n_traced].tolist()


def train(problem, config):
    """Minimize lam/2 ||zeta||^2 + sum_i robust_hinge_i by sampling one term per update.

    Each update draws an index uniformly with replacement and scales that
    term's subgradient by L, so the step is an unbiased estimate of a full
    subgradient. One epoch is L updates. Returns (classifier, trace).
    """
    L = problem.L
    if config.lam != problem.lam:
        log.debug("config lambda %g overrides problem lambda %g", config.lam, problem.lam)
        problem = replace(problem, lam=config.lam, _packed=problem.packed)
    if config.eta0 is None:
        config = replace(config, eta0=1.0 / (config.lam + L * subgrad_scale(problem) ** 2))
    rng = np.random.default_rng(config.seed)
    zeta = np.zeros(problem.dim)
    bias = 0.0
    total = config.epochs * L
    avg_from = total - L + 1 if config.tail_average else total + 1
    avg = np.zeros(problem.dim + 1)
    epoch = _epoch_numba if use_numba() else _epoch_numpy
    updates, objectives = [], []
    for e in range(config.epochs):
        idx = rng.integers(0, L, size=L)
        t0 = e * L
        zeta, bias, tr = epoch(problem, config, zeta, bias, idx, t0, avg, avg_from)
        if tr:
            te = config.trace_every
            updates.extend(range((t0 // te + 1) * te, t0 + L + 1, te)[:len(tr)])
            objectives.extend(tr)
    if config.tail_average:
        zeta, bias = avg[:-1] / L, avg[-1] / L
    final = objective_value(problem, zeta, bias)
    if not (np.isfinite(final) and np.all(np.isfinite(zeta))):
        raise DivergedTrainingError("final objective is not finite")
    clf = RobustClassifier(zeta, bias, problem.feature_map)
    log.info("trained %d updates, objective %.6g", total, final)
    return clf, TrainingTrace(np.array(updates, dtype=np.int64), np.array(objectives), total)
