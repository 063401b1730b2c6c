"""Monte-Carlo certificates for the feature bounds, gradient checks and error metrics."""

from dataclasses import asdict, dataclass

import numpy as np

from .core import UncertaintyModel, gaussian_kernel_matrix, lp_norm, model_for, sample_mixed
from .errors import KinkProximityError
from .objective import robust_hinge, robust_hinge_subgrad
from .rff import RotationBlocks, rff_sigma_min

VIOLATION_TOL = 1e-10


@dataclass(frozen=True)
class BoundReport:
    trials: int
    max_ratio: float
    violations: int
    gamma_feat: float
    max_norm: float

    @property
    def passed(self):
        return self.violations == 0

    def to_dict(self):
        return asdict(self)


def verify_bound_mc(fmap, x, unc, bound, trials=10_000, seed=0):
    """Sample perturbations (half interior, half on the boundary) and test ||R dphi|| <= Gamma.

    A trial violates the bound when ||R dphi||_pbar > Gamma + 1e-10.
    """
    x = np.asarray(x, dtype=float)
    dx = sample_mixed(unc, trials, seed)
    dphi = fmap.transform(x + dx) - fmap.transform(np.broadcast_to(x, dx.shape))
    # batched and single-row products may round differently; a zero shift is exact
    dphi[np.all(dx == 0, axis=1)] = 0.0
    norms = lp_norm(bound.rotation.apply(dphi), bound.pbar)
    G = bound.gamma_feat
    if G > 0:
        ratios = norms / G
    else:
        ratios = np.where(norms == 0.0, 0.0, np.inf)
    return BoundReport(
        trials=int(trials),
        max_ratio=float(ratios.max(initial=0.0)),
        violations=int(np.count_nonzero(norms > G + VIOLATION_TOL)),
        gamma_feat=float(G),
        max_norm=float(norms.max(initial=0.0)),
    )


@dataclass(frozen=True)
class BandwidthCutReport:
    sigma: float
    draws: int
    coordinate_fraction: float
    joint_fraction: float
    conditioned: int
    counterexamples: int
    max_angle: float

    def to_dict(self):
        return asdict(self)


def bandwidth_cut_check(gamma, sigma_half, theta_max, draws=100_000, frequencies=1, p=2.0, seed=0):
    """Empirical check of the bandwidth lower cut from :func:`rff_sigma_min`.

    Draws ``draws`` maps of ``frequencies`` Gaussian rows at sigma = sigma_min
    together with one perturbation each. A draw is conditioned when every
    coordinate of every row lies within 3/sigma; a counterexample is a
    conditioned draw with some |omega^T dx| above ``theta_max``. The joint
    fraction of conditioned draws is reported, not asserted.
    """
    s = np.asarray(sigma_half, dtype=float)
    s = np.diag(s) if s.ndim == 2 else s
    sigma = rff_sigma_min(gamma, sigma_half, theta_max)
    unc = UncertaintyModel(s, gamma, p)
    rng = np.random.default_rng(seed)
    scale = 1.0 / sigma if sigma > 0 else 1.0
    omega = rng.standard_normal((draws, frequencies, s.size)) * scale
    dx = sample_mixed(unc, draws, rng)
    inside = np.abs(omega) <= 3.0 * scale
    cond = inside.all(axis=(1, 2))
    angles = np.abs(np.einsum("dfk,dk->df", omega, dx)).max(axis=1)
    bad = cond & (angles > theta_max)
    return BandwidthCutReport(
        sigma=float(sigma),
        draws=int(draws),
        coordinate_fraction=float(inside.mean()),
        joint_fraction=float(cond.mean()),
        conditioned=int(cond.sum()),
        counterexamples=int(bad.sum()),
        max_angle=float(angles[cond].max(initial=0.0)),
    )


def _kink_margin(zeta, bias, phi, y, bound, h):
    """Raise unless every kink of the loss is more than 10h (scaled) away."""
    zeta = np.asarray(zeta, dtype=float)
    R = bound.rotation
    u = R.apply_T(zeta)
    rmax = 1.0 if isinstance(R, RotationBlocks) else float(np.max(np.abs(R.matrix)))
    # a step of h in one coordinate of zeta moves each u_k by at most h * rmax
    du = 10.0 * h * rmax
    q = bound.qbar
    if bound.gamma_feat > 0:
        au = np.abs(u)
        if q == 1.0 and np.any(au <= du):
            raise KinkProximityError("a component of R^T zeta is near zero")
        if np.isinf(q):
            top = np.sort(au)[::-1]
            if top[0] <= du or (len(top) > 1 and top[0] - top[1] <= 2 * du):
                raise KinkProximityError("the max-norm argmax is not unique within tolerance")
        if np.linalg.norm(u) <= du * np.sqrt(len(u)):
            raise KinkProximityError("R^T zeta is near the origin")
    arg = 1.0 - y * (zeta @ phi + bias) + bound.gamma_feat * lp_norm(u, q)
    slope = np.abs(phi).max(initial=0.0) + 1.0 + bound.gamma_feat * rmax * len(zeta)
    if abs(arg) <= 10.0 * h * slope:
        raise KinkProximityError("the hinge argument is near zero")


def grad_check(zeta, bias, phi, y, bound, h=1e-6):
    """Max relative error between the subgradient and central differences, coordinatewise."""
    zeta = np.asarray(zeta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    _kink_margin(zeta, bias, phi, y, bound, h)
    gz, gb = robust_hinge_subgrad(zeta, bias, phi, y, bound)
    g = np.append(gz, gb)
    point = np.append(zeta, bias)
    fd = np.empty_like(point)
    for k in range(point.size):
        e = np.zeros_like(point)
        e[k] = h
        hi, lo = point + e, point - e
        fd[k] = (robust_hinge(hi[:-1], hi[-1], phi, y, bound)
                 - robust_hinge(lo[:-1], lo[-1], phi, y, bound)) / (2.0 * h)
    scale = max(np.abs(g).max(), np.abs(fd).max())
    if scale == 0.0:
        return 0.0
    return float(np.abs(fd - g).max() / scale)


@dataclass(frozen=True)
class KernelErrorStats:
    max: float
    mean: float
    pairs: int

    def to_dict(self):
        return asdict(self)


def kernel_approx_error(fmap, points, sigma=None):
    """|phi(x)^T phi(y) - k(x, y)| over all unordered pairs (diagonal included)."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    F = fmap.transform(P)
    err = np.abs(F @ F.T - gaussian_kernel_matrix(P, P, fmap.sigma if sigma is None else sigma))
    vals = err[np.triu_indices(P.shape[0])]
    return KernelErrorStats(float(vals.max()), float(vals.mean()), int(vals.size))


def standard_error(classifier, dataset):
    return float(np.mean(classifier.predict(dataset.samples) != dataset.labels))


def robust_error(classifier, dataset, unc, trials=100, seed=0):
    """Fraction of samples whose predicted side flips at the nominal point or any sampled perturbation.

    Half of the ``trials`` perturbations per sample lie on the set boundary.
    """
    rng = np.random.default_rng(seed)
    wrong = 0
    for i, (x, y) in enumerate(zip(dataset.samples, dataset.labels)):
        u = model_for(unc, i)
        pts = x + np.vstack([np.zeros((1, dataset.n)), sample_mixed(u, trials, rng)])
        if np.any(classifier.predict(pts) != y):
            wrong += 1
    return wrong / dataset.L
