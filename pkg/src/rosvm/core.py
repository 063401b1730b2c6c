"""Shared domain types: datasets, uncertainty sets, norms and the Gaussian kernel."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidExponentError

# Stream ids for splitting one top-level seed between consumers.
SEED_STREAMS = {"features": 0, "landmarks": 1, "solver": 2, "verify": 3, "robust_error": 4}


def derive_seed(seed, stream):
    """Deterministic child seed of ``seed`` for the named consumer."""
    key = SEED_STREAMS[stream] if isinstance(stream, str) else int(stream)
    return int(np.random.SeedSequence([int(seed), key]).generate_state(1, dtype=np.uint64)[0])


def dual_exponent(p):
    """Return q with 1/p + 1/q = 1 (1 <-> inf)."""
    p = float(p)
    if not p >= 1.0:
        raise InvalidExponentError(f"norm exponent must be >= 1, got {p}")
    if p == 1.0:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def lp_norm(v, p, axis=-1):
    v = np.asarray(v, dtype=float)
    if v.ndim == 0:
        return abs(float(v))
    return np.linalg.norm(v, ord=p, axis=axis)


@dataclass(frozen=True)
class NormPair:
    p: float
    q: float

    @classmethod
    def from_p(cls, p):
        return cls(float(p), dual_exponent(p))

    def __post_init__(self):
        p, q = self.p, self.q
        if {p, q} == {1.0, np.inf}:
            return
        if not (p > 1 and q > 1 and abs(1 / p + 1 / q - 1) <= 1e-12):
            raise InvalidExponentError(f"({p}, {q}) is not a dual pair")


def gaussian_kernel(x, z, sigma):
    """exp(-||x - z||^2 / (2 sigma^2))."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {z.shape}")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    d = x - z
    return float(np.exp(-np.dot(d, d) / (2.0 * sigma * sigma)))


def gaussian_kernel_matrix(X, Z, sigma):
    """Pairwise Gaussian kernel between the rows of X and Z."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if X.shape[1] != Z.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Z.shape[1]}")
    return np.exp(-cdist(X, Z, "sqeuclidean") / (2.0 * sigma * sigma))


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = np.array(self.samples, dtype=float)
        y = np.array(self.labels, dtype=float).reshape(-1)
        if X.ndim != 2:
            raise ValueError("samples must be a 2-D array (L, n)")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("dataset must have at least one sample and one feature")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} samples but {y.shape[0]} labels")
        if not np.all(np.isfinite(X)):
            raise ValueError("samples contain non-finite entries")
        if not np.all((y == 1.0) | (y == -1.0)):
            raise ValueError("labels must be -1 or +1")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "samples", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self):
        return self.samples.shape[1]

    @property
    def L(self):
        return self.samples.shape[0]

    def __len__(self):
        return self.L


@dataclass(frozen=True, eq=False)
class UncertaintyModel:
    """The set ||Sigma^{-1/2} dx||_p <= gamma.

    ``sigma_half`` holds the factor Sigma^{1/2}; a 1-D array is read as the
    diagonal of a diagonal factor.
    """

    sigma_half: np.ndarray
    gamma: float
    p: float = 2.0

    def __post_init__(self):
        S = np.array(self.sigma_half, dtype=float)
        if S.ndim not in (1, 2) or (S.ndim == 2 and S.shape[0] != S.shape[1]):
            raise ValueError("sigma_half must be a vector (diagonal) or a square matrix")
        if not np.all(np.isfinite(S)):
            raise ValueError("sigma_half has non-finite entries")
        if S.ndim == 1:
            if not np.all(S > 0):
                raise ValueError("diagonal sigma_half must be strictly positive")
        elif np.linalg.matrix_rank(S) < S.shape[0]:
            raise ValueError("sigma_half must be invertible")
        gamma = float(self.gamma)
        if not gamma >= 0 or not np.isfinite(gamma):
            raise ValueError("gamma must be a finite nonnegative number")
        p = float(self.p)
        dual_exponent(p)  # validates p
        S.setflags(write=False)
        object.__setattr__(self, "sigma_half", S)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "p", p)

    @classmethod
    def isotropic(cls, n, gamma, p=2.0, scale=1.0):
        return cls(np.full(n, float(scale)), gamma, p)

    @property
    def n(self):
        return self.sigma_half.shape[0]

    @property
    def q(self):
        return dual_exponent(self.p)

    @property
    def is_diagonal(self):
        return self.sigma_half.ndim == 1

    def dense(self):
        return np.diag(self.sigma_half) if self.is_diagonal else self.sigma_half.copy()

    def apply(self, u):
        """Sigma^{1/2} u, row-wise for 2-D input."""
        u = np.asarray(u, dtype=float)
        if self.is_diagonal:
            return u * self.sigma_half
        return u @ self.sigma_half.T

    def apply_T(self, w):
        """Sigma^{T/2} w, row-wise for 2-D input."""
        w = np.asarray(w, dtype=float)
        if self.is_diagonal:
            return w * self.sigma_half
        return w @ self.sigma_half

    def whiten(self, dx):
        """Sigma^{-1/2} dx, row-wise for 2-D input."""
        dx = np.asarray(dx, dtype=float)
        if self.is_diagonal:
            return dx / self.sigma_half
        return np.linalg.solve(self.sigma_half, dx.T).T

    def dual_norm(self, w):
        """||Sigma^{T/2} w||_q, row-wise for 2-D input."""
        return lp_norm(self.apply_T(w), self.q)

    def set_norm(self, dx):
        """||Sigma^{-1/2} dx||_p, the quantity bounded by gamma."""
        return lp_norm(self.whiten(dx), self.p)

    @property
    def spectral_norm(self):
        if self.is_diagonal:
            return float(np.max(np.abs(self.sigma_half)))
        return float(np.linalg.norm(self.sigma_half, 2))

    @property
    def frobenius_norm(self):
        return float(np.linalg.norm(self.sigma_half))


def model_for(unc, i):
    """Uncertainty model of sample ``i`` for a shared model or a per-sample list."""
    return unc if isinstance(unc, UncertaintyModel) else unc[i]


def check_scope(unc, L):
    if not isinstance(unc, UncertaintyModel) and len(unc) != L:
        raise ValueError(f"per-sample uncertainty list has {len(unc)} entries, expected {L}")


def sample_unit_ball(n, p, mode="interior", rng=None, size=None):
    """Draw from the unit p-ball (``interior``) or the unit p-sphere (``surface``).

    p in {1, 2, inf} use exact uniform constructions; other p use the
    generalized-Gaussian radial construction.
    """
    if mode not in ("interior", "surface"):
        raise ValueError(f"mode must be 'interior' or 'surface', got {mode!r}")
    rng = np.random.default_rng(rng)
    p = float(p)
    dual_exponent(p)
    m = 1 if size is None else int(size)
    if np.isinf(p):
        u = rng.uniform(-1.0, 1.0, size=(m, n))
        if mode == "surface":
            face = rng.integers(0, n, size=m)
            u[np.arange(m), face] = rng.choice([-1.0, 1.0], size=m)
    elif p == 1.0:
        e = rng.exponential(size=(m, n + 1))
        signs = rng.choice([-1.0, 1.0], size=(m, n))
        denom = e.sum(axis=1, keepdims=True) if mode == "interior" else e[:, :n].sum(axis=1, keepdims=True)
        u = signs * e[:, :n] / denom
    else:
        if p == 2.0:
            g = rng.standard_normal((m, n))
        else:
            g = rng.choice([-1.0, 1.0], size=(m, n)) * rng.gamma(1.0 / p, size=(m, n)) ** (1.0 / p)
        nrm = lp_norm(g, p)
        nrm[nrm == 0] = 1.0
        u = g / nrm[:, None]
        if mode == "interior":
            u *= rng.uniform(size=(m, 1)) ** (1.0 / n)
    return u[0] if size is None else u


def sample_uncertainty(model, mode="interior", seed=None, size=None):
    """Perturbation dx = gamma * Sigma^{1/2} u with u in the unit p-ball or p-sphere."""
    u = sample_unit_ball(model.n, model.p, mode, rng=seed, size=size)
    return model.gamma * model.apply(u)


def sample_mixed(model, trials, rng):
    """``trials`` perturbations, the first half interior and the rest on the surface."""
    rng = np.random.default_rng(rng)
    half = trials // 2
    return np.vstack([
        sample_uncertainty(model, "interior", rng, size=half),
        sample_uncertainty(model, "surface", rng, size=trials - half),
    ])
