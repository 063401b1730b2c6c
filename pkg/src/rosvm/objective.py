"""Robust hinge losses, their subgradients and the regularized objective."""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._accel import use_numba
from .core import UncertaintyModel, dual_exponent, lp_norm
from .errors import UnsupportedNormError
from .rff import FeatureBound, LinearFactor, RotationBlocks


def _check_q(q):
    q = float(q)
    if not q >= 1.0:
        raise UnsupportedNormError(f"unsupported dual norm exponent {q}")
    return q


def norm_subgrad(u, q):
    """One subgradient of ||.||_q at u.

    Ties are fixed: zero at the origin, sign(0) = 0 for q = 1 and the
    lowest index among maximizers for q = inf.
    """
    u = np.asarray(u, dtype=float)
    q = _check_q(q)
    if not np.any(u):
        return np.zeros_like(u)
    if q == 1.0:
        return np.sign(u)
    if np.isinf(q):
        v = np.zeros_like(u)
        j = int(np.argmax(np.abs(u)))
        v[j] = np.sign(u[j])
        return v
    if q == 2.0:
        return u / np.linalg.norm(u)
    nrm = lp_norm(u, q)
    return np.sign(u) * (np.abs(u) / nrm) ** (q - 1.0)


def _hinge_parts(zeta, bias, phi, y, bound):
    zeta = np.asarray(zeta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if zeta.shape != phi.shape:
        raise ValueError(f"dimension mismatch: zeta {zeta.shape} vs phi {phi.shape}")
    u = bound.rotation.apply_T(zeta)
    nrm = lp_norm(u, _check_q(bound.qbar))
    return 1.0 - y * (zeta @ phi + bias) + bound.gamma_feat * nrm, u


def robust_hinge(zeta, bias, phi, y, bound):
    """max{0, 1 - y(<zeta, phi> + b) + Gamma ||R^T zeta||_qbar}."""
    arg, _ = _hinge_parts(zeta, bias, phi, y, bound)
    return max(0.0, float(arg))


def plain_hinge(zeta, bias, phi, y):
    return max(0.0, 1.0 - y * (np.dot(zeta, phi) + bias))


def robust_hinge_subgrad(zeta, bias, phi, y, bound):
    """A subgradient (d zeta, d bias) of :func:`robust_hinge`; the kink counts as active."""
    arg, u = _hinge_parts(zeta, bias, phi, y, bound)
    if arg < 0:
        return np.zeros(len(phi)), 0.0
    g = bound.rotation.apply(norm_subgrad(u, bound.qbar))
    return -y * np.asarray(phi, dtype=float) + bound.gamma_feat * g, -float(y)


def linear_bound(unc):
    """Express the input-space set as a bound for the identity feature map."""
    return FeatureBound(unc.gamma, LinearFactor(unc.sigma_half), pbar=unc.p)


def linear_robust_loss(w, b, x, y, unc):
    """max{0, 1 - y(<w, x> + b) + gamma ||Sigma^{T/2} w||_q}, the worst-case hinge over the set."""
    w = np.asarray(w, dtype=float)
    return max(0.0, 1.0 - y * (w @ np.asarray(x, dtype=float) + b) + unc.gamma * unc.dual_norm(w))


def prox_ridge(w, eta, lam):
    """argmin_u ||u - w||^2 / (2 eta) + lam/2 ||u||^2."""
    if not (eta > 0 and lam > 0):
        raise ValueError("eta and lambda must be positive")
    return np.asarray(w, dtype=float) / (1.0 + eta * lam)


class IdentityMap:
    """Feature map of the linear model."""

    def __init__(self, n):
        self.n = int(n)

    @property
    def dim(self):
        return self.n

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.n:
            raise ValueError(f"dimension mismatch: expected {self.n}, got {X.shape[-1]}")
        return X.copy()


@dataclass(frozen=True, eq=False)
class RobustClassifier:
    zeta: np.ndarray
    bias: float
    feature_map: object

    def __post_init__(self):
        z = np.array(self.zeta, dtype=float)
        if z.shape != (self.feature_map.dim,):
            raise ValueError(f"zeta has shape {z.shape}, feature map outputs {self.feature_map.dim}")
        if not (np.all(np.isfinite(z)) and np.isfinite(self.bias)):
            raise ValueError("non-finite classifier parameters")
        z.setflags(write=False)
        object.__setattr__(self, "zeta", z)
        object.__setattr__(self, "bias", float(self.bias))

    def decision_function(self, X):
        return self.feature_map.transform(X) @ self.zeta + self.bias

    def predict(self, X):
        # sign(0) = +1
        return np.where(self.decision_function(X) >= 0.0, 1, -1)


def predict(classifier, x):
    return classifier.predict(x)


@dataclass(frozen=True, eq=False)
class SolverProblem:
    """Features, labels and per-sample bounds of a training run.

    All bounds must share qbar. ``feature_map`` is carried along so the
    trained classifier can predict; without one the features are taken as
    the raw inputs.
    """

    features: np.ndarray
    labels: np.ndarray
    bounds: list
    lam: float
    feature_map: object = None
    _packed: dict = field(default=None, repr=False)

    def __post_init__(self):
        F = np.array(self.features, dtype=float)
        y = np.array(self.labels, dtype=float).reshape(-1)
        if F.ndim != 2 or F.shape[0] != y.shape[0] or len(self.bounds) != y.shape[0]:
            raise ValueError("features, labels and bounds must be aligned")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not np.all((y == 1) | (y == -1)):
            raise ValueError("labels must be -1 or +1")
        qbars = {b.qbar for b in self.bounds}
        if len(qbars) != 1:
            raise ValueError("all bounds must share the same dual norm")
        F.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", F)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "bounds", list(self.bounds))
        object.__setattr__(self, "lam", float(self.lam))
        if self.feature_map is None:
            object.__setattr__(self, "feature_map", IdentityMap(F.shape[1]))

    @property
    def L(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    @property
    def qbar(self):
        return self.bounds[0].qbar

    @property
    def packed(self):
        """Array form of the bounds consumed by the compiled kernels."""
        if self._packed is None:
            object.__setattr__(self, "_packed", _pack_bounds(self.bounds, self.dim))
        return self._packed


def qcode(q):
    if q == 1.0:
        return 1
    if q == 2.0:
        return 2
    if np.isinf(q):
        return 3
    return 0


def _pack_bounds(bounds, D):
    L = len(bounds)
    q = bounds[0].qbar
    gam = np.array([b.gamma_feat for b in bounds])
    empty2 = np.zeros((0, 0))
    empty3 = np.zeros((0, 0, 0))
    fidx = np.zeros(L, dtype=np.int64)
    rots = [b.rotation for b in bounds]
    if all(isinstance(r, RotationBlocks) for r in rots):
        angles = np.vstack([r.angles for r in rots])
        trig = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        return dict(kind=_kernels.R_ROTATION, trig=trig, diag=empty2, dense=empty3,
                    fidx=fidx, gam=gam, q=q, qcode=qcode(q), udim=D)
    if not all(isinstance(r, LinearFactor) for r in rots):
        raise TypeError("bounds mix rotation blocks with linear factors")
    seen = {}
    for i, r in enumerate(rots):
        fidx[i] = seen.setdefault(id(r), (len(seen), r))[0]
    factors = [r for _, r in sorted(seen.values(), key=lambda t: t[0])]
    if all(f.is_diagonal for f in factors):
        diag = np.vstack([f.matrix for f in factors])
        return dict(kind=_kernels.R_DIAG, trig=empty3, diag=diag, dense=empty3,
                    fidx=fidx, gam=gam, q=q, qcode=qcode(q), udim=diag.shape[1])
    dense = np.stack([f.dense() for f in factors])
    return dict(kind=_kernels.R_DENSE, trig=empty3, diag=empty2, dense=dense,
                fidx=fidx, gam=gam, q=q, qcode=qcode(q), udim=dense.shape[2])


def _batch_RT(packed, zeta):
    kind = packed["kind"]
    if kind == _kernels.R_ROTATION:
        c, s = packed["trig"][..., 0], packed["trig"][..., 1]
        u = np.empty((c.shape[0], zeta.shape[0]))
        u[:, 0::2] = c * zeta[0::2] - s * zeta[1::2]
        u[:, 1::2] = s * zeta[0::2] + c * zeta[1::2]
        return u
    if kind == _kernels.R_DIAG:
        return packed["diag"][packed["fidx"]] * zeta
    return np.einsum("ljk,j->lk", packed["dense"][packed["fidx"]], zeta)


def hinge_arguments(problem, zeta, bias):
    """1 - y_i(<zeta, phi_i> + b) + Gamma_i ||R_i^T zeta||_qbar for every sample."""
    pk = problem.packed
    nrm = lp_norm(_batch_RT(pk, np.asarray(zeta, dtype=float)), pk["q"])
    return 1.0 - problem.labels * (problem.features @ zeta + bias) + pk["gam"] * nrm


def subgrad_scale(problem):
    """Upper bound on the 2-norm of any per-sample zeta-subgradient."""
    pk = problem.packed
    kind = pk["kind"]
    if kind == _kernels.R_ROTATION:
        rnorm = np.ones(problem.L)
    elif kind == _kernels.R_DIAG:
        rnorm = np.abs(pk["diag"]).max(axis=1)[pk["fidx"]]
    else:
        rnorm = np.array([np.linalg.norm(M, 2) for M in pk["dense"]])[pk["fidx"]]
    # a unit dual-norm vector has 2-norm at most udim^(1/2 - 1/pbar)
    pbar = dual_exponent(pk["q"])
    c = pk["udim"] ** max(0.0, 0.5 - 1.0 / pbar)
    G = np.linalg.norm(problem.features, axis=1) + pk["gam"] * rnorm * c
    return float(G.max())


def full_objective(problem, classifier):
    """lam/2 ||zeta||^2 + sum_i robust_hinge_i."""
    return objective_value(problem, classifier.zeta, classifier.bias)


def objective_value(problem, zeta, b):
    zeta = np.asarray(zeta, dtype=float)
    if use_numba():
        pk = problem.packed
        return float(_kernels.objective(zeta, float(b), problem.features, problem.labels, pk["gam"],
                                        pk["q"], pk["qcode"], pk["kind"], pk["trig"], pk["diag"],
                                        pk["dense"], pk["fidx"], problem.lam, pk["udim"]))
    losses = np.maximum(0.0, hinge_arguments(problem, zeta, b))
    return float(0.5 * problem.lam * zeta @ zeta + losses.sum())


def make_linear_problem(dataset, unc, lam):
    """Identity-map problem; its losses coincide with :func:`linear_robust_loss`."""
    if isinstance(unc, UncertaintyModel):
        bounds = [linear_bound(unc)] * dataset.L
    else:
        cache = {}
        bounds = []
        for u in unc:
            if id(u) not in cache:
                cache[id(u)] = linear_bound(u)
            bounds.append(cache[id(u)])
    return SolverProblem(dataset.samples, dataset.labels, bounds, lam, IdentityMap(dataset.n))

