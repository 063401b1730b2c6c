"""Compiled inner loops.

Each public entry point here has a numpy counterpart elsewhere in the
package; :mod:`rosvm._accel` decides which one runs.
"""

import math

import numpy as np

from ._accel import njit

# Encoding of the per-sample matrix R handed to the SGD kernel.
R_ROTATION = 0  # trig[i, j] holds (cos, sin) of the block angles
R_DIAG = 1  # diag[fidx[i]] is the diagonal of R
R_DENSE = 2  # dense[fidx[i]] is R


@njit(cache=True)
def jacobi_eigh(A, tol=1e-15, max_sweeps=100):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors) unsorted; columns of the second
    array are the eigenvectors.
    """
    a = A.copy()
    n = a.shape[0]
    V = np.eye(n)
    frob2 = 0.0
    for i in range(n):
        for j in range(n):
            frob2 += a[i, j] * a[i, j]
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += 2.0 * a[p, q] * a[p, q]
        if off <= tol * tol * frob2:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return w, V


@njit(cache=True)
def _qnorm(u, q, qcode):
    # qcode: 1 -> l1, 2 -> l2, 3 -> linf, 0 -> general q
    if qcode == 1:
        s = 0.0
        for k in range(u.shape[0]):
            s += abs(u[k])
        return s
    if qcode == 2:
        s = 0.0
        for k in range(u.shape[0]):
            s += u[k] * u[k]
        return math.sqrt(s)
    if qcode == 3:
        s = 0.0
        for k in range(u.shape[0]):
            if abs(u[k]) > s:
                s = abs(u[k])
        return s
    s = 0.0
    for k in range(u.shape[0]):
        s += abs(u[k]) ** q
    return s ** (1.0 / q)


@njit(cache=True)
def _qnorm_subgrad(u, nrm, q, qcode, v):
    d = u.shape[0]
    for k in range(d):
        v[k] = 0.0
    if nrm == 0.0:
        return
    if qcode == 1:
        for k in range(d):
            if u[k] > 0.0:
                v[k] = 1.0
            elif u[k] < 0.0:
                v[k] = -1.0
    elif qcode == 2:
        for k in range(d):
            v[k] = u[k] / nrm
    elif qcode == 3:
        jstar = 0
        for k in range(d):
            if abs(u[k]) > abs(u[jstar]):
                jstar = k
        v[jstar] = 1.0 if u[jstar] > 0.0 else -1.0
    else:
        scale = nrm ** (q - 1.0)
        for k in range(d):
            mag = abs(u[k]) ** (q - 1.0) / scale
            if u[k] > 0.0:
                v[k] = mag
            elif u[k] < 0.0:
                v[k] = -mag


@njit(cache=True)
def _apply_RT(kind, i, zeta, trig, diag, dense, fidx, u):
    if kind == R_ROTATION:
        for j in range(trig.shape[1]):
            c = trig[i, j, 0]
            s = trig[i, j, 1]
            za = zeta[2 * j]
            zb = zeta[2 * j + 1]
            u[2 * j] = c * za - s * zb
            u[2 * j + 1] = s * za + c * zb
    elif kind == R_DIAG:
        f = fidx[i]
        for k in range(u.shape[0]):
            u[k] = diag[f, k] * zeta[k]
    else:
        f = fidx[i]
        d = u.shape[0]
        for k in range(d):
            acc = 0.0
            for j in range(zeta.shape[0]):
                acc += dense[f, j, k] * zeta[j]
            u[k] = acc


@njit(cache=True)
def _apply_R(kind, i, v, trig, diag, dense, fidx, g):
    if kind == R_ROTATION:
        for j in range(trig.shape[1]):
            c = trig[i, j, 0]
            s = trig[i, j, 1]
            va = v[2 * j]
            vb = v[2 * j + 1]
            g[2 * j] = c * va + s * vb
            g[2 * j + 1] = c * vb - s * va
    elif kind == R_DIAG:
        f = fidx[i]
        for k in range(g.shape[0]):
            g[k] = diag[f, k] * v[k]
    else:
        f = fidx[i]
        for j in range(g.shape[0]):
            acc = 0.0
            for k in range(v.shape[0]):
                acc += dense[f, j, k] * v[k]
            g[j] = acc


@njit(cache=True)
def _hinge_arg(i, zeta, bias, phi, y, gam, q, qcode, kind, trig, diag, dense, fidx, u):
    _apply_RT(kind, i, zeta, trig, diag, dense, fidx, u)
    nrm = _qnorm(u, q, qcode)
    score = bias
    for k in range(zeta.shape[0]):
        score += zeta[k] * phi[i, k]
    return 1.0 - y[i] * score + gam[i] * nrm, nrm


@njit(cache=True)
def objective(zeta, bias, phi, y, gam, q, qcode, kind, trig, diag, dense, fidx, lam, udim):
    u = np.empty(udim)
    total = 0.0
    for i in range(phi.shape[0]):
        arg, _ = _hinge_arg(i, zeta, bias, phi, y, gam, q, qcode, kind, trig, diag, dense, fidx, u)
        if arg > 0.0:
            total += arg
    sq = 0.0
    for k in range(zeta.shape[0]):
        sq += zeta[k] * zeta[k]
    return 0.5 * lam * sq + total


@njit(cache=True)
def sgd_epoch(zeta, bias, phi, y, gam, q, qcode, kind, trig, diag, dense, fidx, udim,
              lam, eta0, schedule, method, idx, t0, trace_every, avg, avg_from, trace):
    """Run ``len(idx)`` stochastic updates in place on ``zeta``.

    ``schedule``: 0 constant, 1 inverse-scaled. ``method``: 0 subgradient,
    1 proximal. Iterates with update index >= ``avg_from`` are summed into
    ``avg[:-1]`` (zeta) and ``avg[-1]`` (bias). Objective samples go to
    ``trace``. Returns (bias, status, n_traced); status 1 flags a
    non-finite loss.
    """
    L = phi.shape[0]
    D = zeta.shape[0]
    u = np.empty(udim)
    v = np.empty(udim)
    g = np.empty(D)
    n_traced = 0
    for k in range(idx.shape[0]):
        l = idx[k]
        t = t0 + k + 1
        if schedule == 0:
            eta = eta0
        else:
            eta = eta0 / (1.0 + lam * eta0 * t)
        arg, nrm = _hinge_arg(l, zeta, bias, phi, y, gam, q, qcode, kind, trig, diag, dense, fidx, u)
        if not math.isfinite(arg):
            return bias, 1, n_traced
        active = arg >= 0.0
        if active:
            _qnorm_subgrad(u, nrm, q, qcode, v)
            _apply_R(kind, l, v, trig, diag, dense, fidx, g)
            gl = gam[l]
            yl = y[l]
            for j in range(D):
                g[j] = -yl * phi[l, j] + gl * g[j]
            gb = -yl
        else:
            for j in range(D):
                g[j] = 0.0
            gb = 0.0
        if method == 0:
            for j in range(D):
                zeta[j] -= eta * (lam * zeta[j] + L * g[j])
        else:
            shrink = 1.0 + eta * lam
            for j in range(D):
                zeta[j] = (zeta[j] - eta * L * g[j]) / shrink
        bias -= eta * L * gb
        if t >= avg_from:
            for j in range(D):
                avg[j] += zeta[j]
            avg[D] += bias
        if trace_every > 0 and t % trace_every == 0:
            trace[n_traced] = objective(zeta, bias, phi, y, gam, q, qcode, kind, trig, diag,
                                        dense, fidx, lam, udim)
            if not math.isfinite(trace[n_traced]):
                return bias, 1, n_traced
            n_traced += 1
    return bias, 0, n_traced
