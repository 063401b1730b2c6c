"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line; run with ``pytest -m acceptance -s``
(the lines are also shown without ``-s``).
"""

import itertools
import time

import numpy as np
import pytest

from rosvm import _accel
from rosvm.core import Dataset, UncertaintyModel, sample_mixed
from rosvm.nystrom import nystrom_bound, nystrom_fit, select_landmarks
from rosvm.objective import (
    IdentityMap,
    RobustClassifier,
    full_objective,
    linear_bound,
    linear_robust_loss,
    make_linear_problem,
    plain_hinge,
    robust_hinge,
)
from rosvm.errors import KinkProximityError
from rosvm.pipeline import build_problem
from rosvm.rff import rff_bound, rff_dual_norms, rff_gamma, rff_sample
from rosvm.solver import SolverConfig, train
from rosvm.verify import (
    bandwidth_cut_check,
    grad_check,
    kernel_approx_error,
    standard_error,
    verify_bound_mc,
)

pytestmark = pytest.mark.acceptance

GAMMAS = (0.0, 0.1, 0.5, 2.0, 10.0)
EXPONENTS = (1.0, 2.0, np.inf)
TRIALS = 10_000


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})")
        return ok
    return emit


def _sigma_half(n, seed):
    # a non-diagonal, well-conditioned shape matrix
    rng = np.random.default_rng(seed)
    return np.eye(n) + 0.3 * rng.standard_normal((n, n))


def test_rff_bound_validity(report):
    t0 = time.perf_counter()
    n = 3
    configs = violations = 0
    worst = 0.0
    for pbar, p, gamma, D, seed in itertools.product(EXPONENTS, EXPONENTS, GAMMAS, (8, 64), range(3)):
        rmap = rff_sample(n, D, 1.0, seed=seed)
        unc = UncertaintyModel(_sigma_half(n, 100 + seed), gamma, p)
        x = np.random.default_rng(200 + seed).standard_normal(n)
        rep = verify_bound_mc(rmap, x, unc, rff_bound(rmap, x, unc, pbar), TRIALS, seed=seed)
        configs += 1
        violations += rep.violations
        worst = max(worst, rep.max_ratio)
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and configs == 270 and elapsed < 120
    report(1, "RFF bound validity", ok,
           f"{configs} configs x {TRIALS} trials, violations={violations}, max ratio={worst:.4f}, {elapsed:.1f}s")
    assert ok


def test_nystrom_bound_validity(report):
    t0 = time.perf_counter()
    n = 3
    configs = violations = 0
    worst = 0.0
    ranks = []
    for gamma, m, truncated, seed in itertools.product(GAMMAS, (5, 50), (False, True), range(3)):
        pool = np.random.default_rng(300 + seed).normal(0, 1.5, (200, n))
        lm = select_landmarks(pool, m, seed)
        full = nystrom_fit(lm, 1.0, rank_tol=0.0)
        nmap = nystrom_fit(lm, 1.0, rank_tol=full.eigvals[full.rank // 2]) if truncated else full
        ranks.append((m, truncated, nmap.rank))
        unc = UncertaintyModel(_sigma_half(n, 400 + seed), gamma, 2.0)
        x = pool[-1]
        rep = verify_bound_mc(nmap, x, unc, nystrom_bound(nmap, x, unc), TRIALS, seed=seed)
        configs += 1
        violations += rep.violations
        worst = max(worst, rep.max_ratio)
    elapsed = time.perf_counter() - t0
    full_ok = all(r == m for m, t, r in ranks if not t)
    trunc_ok = all(r < m for m, t, r in ranks if t)
    ok = violations == 0 and full_ok and trunc_ok and elapsed < 120
    report(2, "Nystrom bound validity", ok,
           f"{configs} configs x {TRIALS} trials, violations={violations}, max ratio={worst:.4f}, {elapsed:.1f}s")
    assert ok


def test_degenerate_collapse(report):
    rng = np.random.default_rng(3)
    n = 3
    gammas = []
    hinge_gap = 0.0
    rmap = rff_sample(n, 32, 1.0, seed=0)
    nmap = nystrom_fit(rng.standard_normal((10, n)), 1.0)
    for k in range(1000):
        p = EXPONENTS[k % 3]
        unc = UncertaintyModel(_sigma_half(n, k), 0.0, p)
        x = rng.standard_normal(n) * 2
        y = rng.choice([-1.0, 1.0])
        b = rng.standard_normal()
        rb = rff_bound(rmap, x, unc, EXPONENTS[(k // 3) % 3])
        nb = nystrom_bound(nmap, x, UncertaintyModel(_sigma_half(n, k), 0.0, 2.0))
        gammas += [rb.gamma_feat, nb.gamma_feat]
        for fmap, bd in ((rmap, rb), (nmap, nb), (IdentityMap(n), linear_bound(unc))):
            zeta = rng.standard_normal(fmap.dim)
            phi = fmap.transform(x)
            hinge_gap = max(hinge_gap, abs(robust_hinge(zeta, b, phi, y, bd) - plain_hinge(zeta, b, phi, y)))
        w = rng.standard_normal(n)
        hinge_gap = max(hinge_gap, abs(linear_robust_loss(w, b, x, y, unc) - plain_hinge(w, b, x, y)))
    max_gamma = max(abs(g) for g in gammas)
    ok = max_gamma <= 1e-14 and hinge_gap <= 1e-14
    report(3, "gamma = 0 collapse", ok, f"max |Gamma|={max_gamma:.1e}, max loss gap={hinge_gap:.1e}")
    assert ok


def test_unit_norm_and_saturation(report):
    rng = np.random.default_rng(4)
    norm_dev = 0.0
    for D, seed in itertools.product((2, 8, 64, 512), range(5)):
        rmap = rff_sample(4, D, rng.uniform(0.1, 5), seed=seed)
        X = rng.standard_normal((2000, 4)) * 10.0 ** rng.uniform(-3, 3, (2000, 1))
        norm_dev = max(norm_dev, np.abs(np.linalg.norm(rmap.transform(X), axis=1) - 1).max())
    unc = UncertaintyModel.isotropic(4, 1e6)
    sat = {D: rff_gamma(rff_dual_norms(rff_sample(4, D, 1.0, seed=D), unc), unc.gamma, D, 2.0)
           for D in range(2, 4002, 2)}
    off = [D for D, g in sat.items() if g != 2.0]
    ok = norm_dev <= 1e-12 and not off
    report(4, "RFF unit norm and saturation", ok,
           f"max | ||phi|| - 1 |={norm_dev:.1e}, saturated Gamma != 2 for {len(off)} of {len(sat)} D values")
    assert ok


def test_kernel_approximation(report):
    P = np.random.default_rng(5).standard_normal((20, 3))
    means = [np.mean([kernel_approx_error(rff_sample(3, D, 1.5, seed=s), P).mean for s in range(20)])
             for D in (16, 64, 256)]
    lm = np.random.default_rng(6).normal(0, 1.5, (30, 3))
    nmap = nystrom_fit(lm, 1.0, rank_tol=0.0)
    nerr = kernel_approx_error(nmap, lm).max
    ok = means[0] >= means[1] >= means[2] and nerr <= 1e-8 and nmap.rank == 30
    report(5, "kernel approximation", ok,
           "RFF mean error D=16/64/256: " + "/".join(f"{m:.4f}" for m in means) + f", Nystrom landmark error={nerr:.1e}")
    assert ok


def test_dual_norm_worst_case(report):
    rng = np.random.default_rng(7)
    total = 10**6
    violations = 0
    gap2 = None
    for p in EXPONENTS:
        n = 2
        unc = UncertaintyModel(_sigma_half(n, 8), 0.5, p)
        w, x, y = rng.standard_normal(n), rng.standard_normal(n), 1.0
        b = 0.5 - w @ x  # hinge active over the whole set
        closed = linear_robust_loss(w, b, x, y, unc)
        dx = sample_mixed(unc, total, np.random.default_rng(int(p) if np.isfinite(p) else 9))
        sampled = np.maximum(0.0, 1 - y * ((x + dx) @ w + b))
        violations += int(np.count_nonzero(sampled > closed + 1e-12))
        if p == 2.0:
            gap2 = closed - sampled.max()
    ok = violations == 0 and 0 <= gap2 <= 1e-3
    report(6, "dual-norm worst case", ok, f"3 x {total} samples, violations={violations}, n=2 p=2 gap={gap2:.2e}")
    assert ok


def test_gradient_correctness(report):
    rng = np.random.default_rng(8)
    worst = {}
    for pbar in (np.inf, 2.0, 1.0):  # qbar = 1, 2, inf
        errs = []
        rmap = rff_sample(3, 16, 1.0, seed=int(rng.integers(1000)))
        while len(errs) < 100:
            x = rng.standard_normal(3)
            bd = rff_bound(rmap, x, UncertaintyModel.isotropic(3, rng.uniform(0.05, 1.0)), pbar)
            zeta, phi = rng.standard_normal(16), rmap.transform(x)
            b = float(rng.standard_normal())
            try:
                errs.append(grad_check(zeta, b, phi, rng.choice([-1.0, 1.0]), bd))
            except KinkProximityError:
                continue
        worst[bd.qbar] = max(errs)
    ok = max(worst.values()) <= 1e-4
    report(7, "gradient correctness", ok,
           ", ".join(f"qbar={'inf' if np.isinf(q) else int(q)}: {e:.1e}" for q, e in sorted(worst.items())))
    assert ok


def _separable(rng, L=100, margin=0.2):
    X = []
    while len(X) < L:
        x = rng.uniform(-2, 2, 2)
        if abs(x[0] - 0.7 * x[1] + 0.3) > margin:
            X.append(x)
    X = np.array(X)
    return Dataset(X, np.where(X[:, 0] - 0.7 * X[:, 1] + 0.3 > 0, 1, -1))


def test_solver_sanity(report):
    rng = np.random.default_rng(9)
    ds = _separable(rng)
    lam = 0.01
    pr = make_linear_problem(ds, UncertaintyModel.isotropic(2, 0.0), lam)
    cfg = SolverConfig(method="proximal", schedule="inverse", epochs=50, lam=lam, seed=1)
    clf, _ = train(pr, cfg)
    acc = 1.0 - standard_error(clf, ds)
    clf2, _ = train(pr, cfg)
    same = clf.zeta.tobytes() == clf2.zeta.tobytes() and clf.bias == clf2.bias

    small = Dataset(ds.samples[:60], ds.labels[:60])
    unc = UncertaintyModel.isotropic(2, 0.05)
    maps = {"rff": rff_sample(2, 32, 1.0, seed=2), "nystrom": nystrom_fit(small.samples[:15], 1.0),
            "linear": IdentityMap(2)}
    grid = [(be, me, sc, kind, pbar) for be in ("numba", "numpy") for me in ("subgradient", "proximal")
            for sc in ("constant", "inverse")
            for kind, pbar in (("rff", 1.0), ("rff", 2.0), ("rff", np.inf), ("nystrom", 2.0), ("linear", 2.0))]
    failed = []
    for be, me, sc, kind, pbar in grid:
        prev = _accel.set_backend(be)
        try:
            prob = build_problem(small, unc, maps[kind], pbar, 0.5)
            c, _ = train(prob, SolverConfig(method=me, schedule=sc, epochs=10, lam=0.5, seed=3))
            if not full_objective(prob, c) < small.L:
                failed.append((be, me, sc, kind, pbar))
        finally:
            _accel.set_backend(prev)
    ok = acc == 1.0 and same and not failed
    report(8, "solver sanity", ok,
           f"accuracy={acc:.3f}, bitwise repeat={same}, objective decreased on {len(grid) - len(failed)}/{len(grid)}")
    assert ok


def test_sigma_min_conditional(report):
    s, gamma, theta = np.array([0.5, 1.0, 2.0]), 0.4, 0.6
    reps = [bandwidth_cut_check(gamma, s, theta, 10**5, frequencies=f, p=p, seed=k)
            for k, (p, f) in enumerate([(2.0, 1), (1.0, 1), (2.0, 8)])]
    counter = sum(r.counterexamples for r in reps)
    ok = counter == 0 and all(r.max_angle <= theta for r in reps)
    report(9, "bandwidth lower cut (conditional)", ok,
           f"sigma_min={reps[0].sigma:.4f}, 3 x 10^5 draws, counterexamples={counter}, "
           f"joint fraction 1 row={reps[0].joint_fraction:.4f}, 8 rows={reps[2].joint_fraction:.4f}")
    assert ok


def _ring(rng, L=200):
    half = L // 2
    r_in = 0.5 * np.sqrt(rng.uniform(0, 1, half))
    r_out = rng.uniform(1.0, 1.5, L - half)
    t = rng.uniform(0, 2 * np.pi, L)
    r = np.concatenate([r_in, r_out])
    X = np.column_stack([r * np.cos(t), r * np.sin(t)])
    return Dataset(X, np.concatenate([np.ones(half), -np.ones(L - half)]))


def test_toy_nonlinear_separation(report):
    rng = np.random.default_rng(11)
    ds = _ring(rng)
    lin, _ = train(make_linear_problem(ds, UncertaintyModel.isotropic(2, 0.0), 0.01),
                   SolverConfig(epochs=30, lam=0.01))
    lin_acc = 1.0 - standard_error(lin, ds)
    t0 = time.perf_counter()
    rmap = rff_sample(2, 64, 0.5, seed=12)
    pr = build_problem(ds, UncertaintyModel.isotropic(2, 0.02), rmap, 2.0, 0.01)
    clf, _ = train(pr, SolverConfig(method="proximal", epochs=30, lam=0.01, seed=13))
    acc = 1.0 - standard_error(clf, ds)
    elapsed = time.perf_counter() - t0
    ok = acc >= 0.95 and elapsed < 10
    report(10, "ring/center separation", ok,
           f"RFF D=64 accuracy={acc:.3f} (linear {lin_acc:.3f}), {elapsed:.2f}s")
    assert ok
