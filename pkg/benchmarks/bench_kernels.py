"""Compare the numba kernels with the pure-numpy path.

    python benchmarks/bench_kernels.py [--samples 2000] [--dim 128] [--repeat 3]

Times one training run (stochastic updates plus traced objective
evaluations) on both backends, and the compiled Jacobi eigensolver
against LAPACK. The
first numba call compiles, so a warm-up run precedes every measurement.
"""

import argparse
import time

import numpy as np

from rosvm import _accel
from rosvm.core import Dataset, UncertaintyModel, gaussian_kernel_matrix
from rosvm.nystrom import symmetric_eigh
from rosvm.pipeline import build_problem
from rosvm.rff import rff_sample
from rosvm.solver import SolverConfig, train


def best_of(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--dim", type=int, default=128, help="RFF feature dimension D")
    ap.add_argument("--landmarks", type=int, default=150)
    ap.add_argument("--epochs", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if not _accel.HAVE_NUMBA:
        print("numba is not installed; only the numpy path is available")
        return 1
    rng = np.random.default_rng(0)
    X = rng.standard_normal((args.samples, 4))
    ds = Dataset(X, np.where(np.linalg.norm(X, axis=1) > 2, 1, -1))
    fmap = rff_sample(4, args.dim, 1.0, seed=1)
    unc = UncertaintyModel.isotropic(4, 0.1)
    K = gaussian_kernel_matrix(X[:args.landmarks], X[:args.landmarks], 1.5)
    cfg = SolverConfig(epochs=args.epochs, lam=0.1, trace_every=args.samples // 4)

    rows = []
    for pbar in (1.0, 2.0, np.inf):
        problem = build_problem(ds, unc, fmap, pbar, 0.1)
        label = f"train pbar={'inf' if np.isinf(pbar) else int(pbar)}"
        rows.append((label, {be: _timed(be, lambda: train(problem, cfg), args.repeat) for be in ("numba", "numpy")}))
    # the eigensolver compares the compiled Jacobi kernel with LAPACK
    rows.append((f"eigh m={args.landmarks}",
                 {"numba": best_of(lambda: symmetric_eigh(K, "jacobi"), args.repeat),
                  "numpy": best_of(lambda: symmetric_eigh(K, "lapack"), args.repeat)}))

    print(f"{'case':<18}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for label, t in rows:
        print(f"{label:<18}{t['numba']:>12.4f}{t['numpy']:>12.4f}{t['numpy'] / t['numba']:>10.1f}")
    return 0


def _timed(backend, fn, repeat):
    prev = _accel.set_backend(backend)
    try:
        return best_of(fn, repeat)
    finally:
        _accel.set_backend(prev)


if __name__ == "__main__":
    raise SystemExit(main())
