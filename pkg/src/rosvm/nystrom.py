"""Nystrom features for the Gaussian kernel and their uncertainty bound."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .core import gaussian_kernel_matrix, model_for
from .errors import DegenerateMapError, UnsupportedNormError
from .rff import FeatureBound, LinearFactor

RELATIVE_RANK_TOL = 1e-10


def symmetric_eigh(A, method="lapack"):
    """Eigenpairs of a symmetric matrix sorted by decreasing eigenvalue.

    ``method="jacobi"`` runs the cyclic Jacobi kernel (compiled when numba is
    active). LAPACK is the default since it is much faster at landmark sizes.
    """
    A = np.ascontiguousarray(A, dtype=float)
    if method == "jacobi":
        w, V = _kernels.jacobi_eigh(A)
    elif method == "lapack":
        w, V = np.linalg.eigh(A)
    else:
        raise ValueError("method must be 'lapack' or 'jacobi'")
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


@dataclass(frozen=True, eq=False)
class NystromMap:
    landmarks: np.ndarray
    sigma: float
    eigvecs: np.ndarray
    eigvals: np.ndarray
    rank_tol: float

    def __post_init__(self):
        for name in ("landmarks", "eigvecs", "eigvals"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        m = self.landmarks.shape[0]
        r = self.eigvals.shape[0]
        if self.eigvecs.shape != (m, r) or r < 1:
            raise ValueError("eigenvector matrix must be m x r with r >= 1")
        if not np.all(self.eigvals > self.rank_tol):
            raise ValueError("retained eigenvalues must exceed rank_tol")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "rank_tol", float(self.rank_tol))

    @property
    def n(self):
        return self.landmarks.shape[1]

    @property
    def m(self):
        return self.landmarks.shape[0]

    @property
    def rank(self):
        return self.eigvals.shape[0]

    @property
    def dim(self):
        return self.rank

    @cached_property
    def _projection(self):
        return self.eigvecs / np.sqrt(self.eigvals)

    @cached_property
    def root_eigvals(self):
        """R = Lambda^{1/2}, shared by every sample's bound."""
        return LinearFactor(np.sqrt(self.eigvals))

    def kernel_vector(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.n:
            raise ValueError(f"dimension mismatch: expected {self.n}, got {X.shape[-1]}")
        K = gaussian_kernel_matrix(X.reshape(-1, self.n), self.landmarks, self.sigma)
        return K.reshape(X.shape[:-1] + (self.m,))

    def transform(self, X):
        """Lambda^{-1/2} U^T k(x) for one sample or a batch."""
        return self.kernel_vector(X) @ self._projection


def select_landmarks(X, m, seed=0):
    """``m`` rows of X drawn uniformly without replacement."""
    X = np.asarray(X, dtype=float)
    if not 1 <= m <= X.shape[0]:
        raise ValueError(f"cannot pick {m} landmarks from {X.shape[0]} samples")
    idx = np.random.default_rng(seed).choice(X.shape[0], size=m, replace=False)
    return X[np.sort(idx)]


def nystrom_fit(landmarks, sigma, rank_tol=None):
    """Eigendecompose the landmark kernel matrix and keep eigenvalues above ``rank_tol``.

    ``rank_tol=None`` uses 1e-10 times the largest eigenvalue.
    """
    Xh = np.atleast_2d(np.asarray(landmarks, dtype=float))
    if not np.all(np.isfinite(Xh)):
        raise ValueError("landmarks contain non-finite entries")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    K = gaussian_kernel_matrix(Xh, Xh, sigma)
    w, V = symmetric_eigh(K)
    if rank_tol is None:
        rank_tol = RELATIVE_RANK_TOL * max(w[0], 0.0)
    elif rank_tol < 0:
        raise ValueError("rank_tol must be nonnegative")
    keep = w > rank_tol
    if not keep.any():
        raise DegenerateMapError(f"no eigenvalue above rank_tol={rank_tol}")
    return NystromMap(Xh, sigma, V[:, keep], w[keep], rank_tol)


def nystrom_transform(nmap, x):
    return nmap.transform(x)


def nystrom_radicand(nmap, x, unc):
    """sum_j k_j^2 (1/tau_j^2 + 1) - 2 rho sum_j k_j^2 tau_j for sample x."""
    if unc.p != 2.0:
        raise UnsupportedNormError("the Nystrom bound requires the Euclidean uncertainty set (p = 2)")
    x = np.asarray(x, dtype=float)
    if x.shape != (nmap.n,):
        raise ValueError(f"dimension mismatch: expected ({nmap.n},), got {x.shape}")
    s2 = nmap.sigma ** 2
    diff = x - nmap.landmarks
    log_k2 = -np.einsum("ij,ij->i", diff, diff) / s2
    a = unc.gamma * np.linalg.norm(unc.apply_T(diff), axis=1) / s2  # tau = exp(-a)
    k2 = np.exp(log_k2)
    # k^2 / tau^2 evaluated in log space so large gamma cannot produce inf * 0
    term1 = np.exp(log_k2 + 2.0 * a) + k2
    rho = np.exp(-(unc.gamma * unc.spectral_norm) ** 2 / (2.0 * s2))
    return float(np.sum(term1) - 2.0 * rho * np.sum(k2 * np.exp(-a)))


def nystrom_bound(nmap, x, unc):
    rad = nystrom_radicand(nmap, x, unc)
    if rad < -1e-12:
        raise ArithmeticError(f"negative radicand {rad} in Nystrom bound")
    G = float(np.sqrt(nmap.rank * max(rad, 0.0)))
    return FeatureBound(G, nmap.root_eigvals, pbar=2.0)


def nystrom_bounds(nmap, X, unc):
    return [nystrom_bound(nmap, x, model_for(unc, i)) for i, x in enumerate(np.asarray(X, dtype=float))]
