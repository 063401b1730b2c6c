"""Random Fourier features for the Gaussian kernel and their uncertainty bounds."""

from dataclasses import dataclass, field

import numpy as np

from .core import dual_exponent, model_for
from .errors import UnsupportedNormError, UnsupportedVariantError

SUPPORTED_PBAR = (1.0, 2.0, np.inf)


def check_pbar(pbar):
    pbar = float(pbar)
    if pbar not in SUPPORTED_PBAR:
        raise UnsupportedNormError(f"feature-space norm must be 1, 2 or inf, got {pbar}")
    return pbar


@dataclass(frozen=True, eq=False)
class RffMap:
    omegas: np.ndarray
    sigma: float
    D: int
    variant: str = "paired"
    offsets: np.ndarray = None
    seed: int = None

    def __post_init__(self):
        om = np.array(self.omegas, dtype=float)
        if self.variant not in ("paired", "offset"):
            raise UnsupportedVariantError(f"unknown RFF variant {self.variant!r}")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        D = int(self.D)
        rows = D // 2 if self.variant == "paired" else D
        if self.variant == "paired" and D % 2:
            raise ValueError("D must be even for the paired variant")
        if om.ndim != 2 or om.shape[0] != rows:
            raise ValueError(f"expected {rows} frequency rows, got shape {om.shape}")
        if not np.all(np.isfinite(om)):
            raise ValueError("non-finite frequencies")
        offsets = self.offsets
        if self.variant == "offset":
            offsets = np.array(offsets, dtype=float)
            if offsets.shape != (D,):
                raise ValueError("offset variant needs D offsets")
            offsets.setflags(write=False)
        elif offsets is not None:
            raise ValueError("offsets are only used by the offset variant")
        om.setflags(write=False)
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def n(self):
        return self.omegas.shape[1]

    @property
    def dim(self):
        return self.D

    def transform(self, X):
        """Feature vectors for one sample (n,) or a batch (..., n)."""
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.n:
            raise ValueError(f"dimension mismatch: expected {self.n}, got {X.shape[-1]}")
        Z = X @ self.omegas.T
        scale = np.sqrt(2.0 / self.D)
        if self.variant == "offset":
            return scale * np.cos(Z + self.offsets)
        out = np.empty(Z.shape[:-1] + (self.D,))
        out[..., 0::2] = np.cos(Z)
        out[..., 1::2] = np.sin(Z)
        return scale * out

    def angles(self, x):
        """omega_j^T x for every frequency; these parametrize the rotation blocks."""
        return np.asarray(x, dtype=float) @ self.omegas.T


def rff_sample(n, D, sigma, variant="paired", seed=0):
    """Draw frequencies from the Gaussian kernel's spectral density N(0, sigma^-2 I)."""
    if variant not in ("paired", "offset"):
        raise UnsupportedVariantError(f"unknown RFF variant {variant!r}")
    D = int(D)
    if D < 2:
        raise ValueError("D must be at least 2")
    if variant == "paired" and D % 2:
        raise ValueError("D must be even for the paired variant")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    rows = D // 2 if variant == "paired" else D
    omegas = rng.normal(0.0, 1.0 / sigma, size=(rows, int(n)))
    offsets = rng.uniform(0.0, 2 * np.pi, size=D) if variant == "offset" else None
    return RffMap(omegas, sigma, D, variant, offsets, seed)


def rff_transform(rmap, x):
    return rmap.transform(x)


@dataclass(frozen=True, eq=False)
class RotationBlocks:
    """Block-diagonal R whose j-th 2x2 block is the rotation by -angles[j].

    Only the angles are stored; R and R^T are applied block by block.
    """

    angles: np.ndarray

    def __post_init__(self):
        a = np.array(self.angles, dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    @property
    def dim(self):
        return 2 * self.angles.shape[-1]

    def _rotate(self, v, sign):
        v = np.asarray(v, dtype=float)
        c, s = np.cos(self.angles), sign * np.sin(self.angles)
        a, b = v[..., 0::2], v[..., 1::2]
        half = np.broadcast_shapes(a.shape, c.shape)
        out = np.empty(half[:-1] + (2 * half[-1],))
        out[..., 0::2] = c * a + s * b
        out[..., 1::2] = c * b - s * a
        return out

    def apply(self, v):
        """R v."""
        return self._rotate(v, 1.0)

    def apply_T(self, v):
        """R^T v."""
        return self._rotate(v, -1.0)

    def dense(self):
        R = np.zeros((self.dim, self.dim))
        for j, t in enumerate(self.angles):
            c, s = np.cos(t), np.sin(t)
            R[2 * j:2 * j + 2, 2 * j:2 * j + 2] = [[c, s], [-s, c]]
        return R


@dataclass(frozen=True, eq=False)
class LinearFactor:
    """A fixed matrix R, diagonal when ``matrix`` is 1-D."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def identity(cls, d):
        return cls(np.ones(d))

    @property
    def is_diagonal(self):
        return self.matrix.ndim == 1

    @property
    def dim(self):
        return self.matrix.shape[0]

    def apply(self, v):
        v = np.asarray(v, dtype=float)
        return v * self.matrix if self.is_diagonal else v @ self.matrix.T

    def apply_T(self, v):
        v = np.asarray(v, dtype=float)
        return v * self.matrix if self.is_diagonal else v @ self.matrix

    def dense(self):
        return np.diag(self.matrix) if self.is_diagonal else self.matrix.copy()


@dataclass(frozen=True, eq=False)
class FeatureBound:
    """Certificate ||R (phi(x + dx) - phi(x))||_pbar <= gamma_feat over the uncertainty set."""

    gamma_feat: float
    rotation: object
    pbar: float = 2.0
    qbar: float = field(default=None)
    dual_norms: np.ndarray = None

    def __post_init__(self):
        if not self.gamma_feat >= 0:
            raise ValueError("gamma_feat must be nonnegative")
        qbar = dual_exponent(self.pbar)
        if self.qbar is not None and self.qbar != qbar:
            raise ValueError("qbar must be the dual exponent of pbar")
        object.__setattr__(self, "qbar", qbar)
        object.__setattr__(self, "gamma_feat", float(self.gamma_feat))
        object.__setattr__(self, "pbar", float(self.pbar))


def rff_dual_norms(rmap, unc):
    """||Sigma^{T/2} omega_j||_q for every frequency row."""
    if unc.n != rmap.n:
        raise ValueError(f"uncertainty dimension {unc.n} != map input dimension {rmap.n}")
    return unc.dual_norm(rmap.omegas)


def rff_gamma(dual_norms, gamma, D, pbar):
    t = gamma * np.asarray(dual_norms, dtype=float)
    alpha = np.minimum(2.0, 0.5 * t * t)
    beta = np.minimum(1.0, t)
    pbar = check_pbar(pbar)
    if pbar == 1.0:
        return float(np.sqrt(2.0 / D) * np.sum(alpha + beta))
    if pbar == 2.0:
        # dividing last keeps the saturated value exact
        return float(np.sqrt(4.0 * np.sum(alpha) / D))
    return float(np.sqrt(2.0 / D) * max(alpha.max(), beta.max()))


def rff_bound(rmap, x, unc, pbar=2.0, dual_norms=None):
    """Feature-space uncertainty bound for sample ``x`` under ``unc`` (paired variant only)."""
    if rmap.variant != "paired":
        raise UnsupportedVariantError("uncertainty bounds need the paired cos/sin variant")
    pbar = check_pbar(pbar)
    x = np.asarray(x, dtype=float)
    if x.shape != (rmap.n,):
        raise ValueError(f"dimension mismatch: expected ({rmap.n},), got {x.shape}")
    if dual_norms is None:
        dual_norms = rff_dual_norms(rmap, unc)
    G = rff_gamma(dual_norms, unc.gamma, rmap.D, pbar)
    return FeatureBound(G, RotationBlocks(rmap.angles(x)), pbar, dual_norms=dual_norms)


def rff_bounds(rmap, X, unc, pbar=2.0):
    """Bounds for every row of X; ``unc`` is shared or a per-sample list."""
    cache = {}
    out = []
    for i, x in enumerate(np.asarray(X, dtype=float)):
        u = model_for(unc, i)
        if id(u) not in cache:
            cache[id(u)] = (u, rff_dual_norms(rmap, u))
        out.append(rff_bound(rmap, x, u, pbar, dual_norms=cache[id(u)][1]))
    return out


def rff_sigma_min(gamma, sigma_half, theta_max):
    """Smallest bandwidth keeping |omega^T dx| <= theta_max when every |omega_k| <= 3/sigma.

    ``sigma_half`` must be diagonal: a vector of diagonal entries or a
    diagonal matrix.
    """
    S = np.asarray(sigma_half, dtype=float)
    if S.ndim == 2:
        if S.shape[0] != S.shape[1] or np.any(S - np.diag(np.diag(S))):
            raise ValueError("unsupported: sigma_half must be diagonal")
        S = np.diag(S)
    if S.ndim != 1 or not np.all(S > 0):
        raise ValueError("sigma_half must have strictly positive diagonal entries")
    if not theta_max > 0:
        raise ValueError("theta_max must be positive")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    return 3.0 * gamma * float(np.linalg.norm(S)) / theta_max

