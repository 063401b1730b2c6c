"""Command-line entry point: ``rosvm {train,predict,verify-bounds,kernel-error,robust-error}``.

Every subcommand reads the JSON config given by ``--config`` (optional) and
accepts ``--section.field value`` overrides for any config field.

Exit codes: 0 success, 1 usage error, 2 data error, 3 diverged training.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .config import ConfigError, load_config, validate
from .core import derive_seed
from .data import load_dataset
from .errors import DataFormatError, DivergedTrainingError, ModelFileError, UnsupportedNormError
from .model_io import load_model, save_model, write_trace_csv
from .objective import full_objective
from .pipeline import build_feature_map, build_problem, build_uncertainty, feature_bounds, solver_config
from .solver import train
from .verify import kernel_approx_error, robust_error, standard_error, verify_bound_mc

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt_exp(p):
    return "inf" if np.isinf(p) else f"{p:g}"


def _jsonable(obj):
    if isinstance(obj, float) and np.isinf(obj):
        return "inf"
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(lines, payload, cfg):
    for line in lines:
        print(line)
    text = json.dumps(_jsonable(payload), indent=2)
    print(text)
    if cfg["output"]["report"]:
        with open(cfg["output"]["report"], "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _load_data(cfg, required=True):
    d = cfg["data"]
    if not d["path"]:
        if required:
            raise UsageError("data.path is required")
        return None
    return load_dataset(d["path"], d["format"], label_column=d["label_column"], header=d["header"],
                        zero_one=d["zero_one"])


def cmd_train(cfg, args):
    ds = _load_data(cfg)
    unc = build_uncertainty(cfg["uncertainty"], ds.n)
    fmap = build_feature_map(cfg["features"], ds.samples, cfg["seed"])
    scfg = solver_config(cfg["solver"], cfg["seed"])
    problem = build_problem(ds, unc, fmap, cfg["pbar"], scfg.lam)
    clf, trace = train(problem, scfg)
    meta = {"lambda": scfg.lam, "method": scfg.method, "epochs": scfg.epochs, "seed": cfg["seed"],
            "schedule": scfg.schedule, "pbar": _fmt_exp(cfg["pbar"]),
            "uncertainty": {"gamma": unc.gamma, "p": _fmt_exp(unc.p)}}
    save_model(cfg["output"]["model"], clf, meta)
    if cfg["output"]["trace"]:
        write_trace_csv(cfg["output"]["trace"], trace)
    gammas = np.array([b.gamma_feat for b in problem.bounds])
    result = {
        "samples": ds.L, "features": fmap.dim, "updates": trace.total_updates,
        "objective": full_objective(problem, clf), "initial_objective": float(ds.L),
        "train_accuracy": 1.0 - standard_error(clf, ds),
        "feature_gamma_mean": float(gammas.mean()), "model": cfg["output"]["model"],
    }
    lines = [f"{k}: {v}" for k, v in result.items()]
    _emit(lines, result, cfg)
    return EXIT_OK


def _model_arg(args):
    if not args.model:
        raise UsageError("--model is required")
    return load_model(args.model)


def cmd_predict(cfg, args):
    mf = _model_arg(args)
    ds = _load_data(cfg)
    pred = mf.classifier.predict(ds.samples)
    acc = float(np.mean(pred == ds.labels))
    if cfg["output"]["predictions"]:
        np.savetxt(cfg["output"]["predictions"], pred, fmt="%+d")
    _emit([f"samples: {ds.L}", f"accuracy: {acc}"], {"samples": ds.L, "accuracy": acc}, cfg)
    return EXIT_OK


def _verify_points(cfg, ds):
    k = int(cfg["verify"]["points"])
    if ds is not None:
        return ds.samples[:k]
    rng = np.random.default_rng(derive_seed(cfg["seed"], "verify"))
    return rng.standard_normal((k, int(cfg["verify"]["n"])))


def cmd_verify_bounds(cfg, args):
    ds = _load_data(cfg, required=False)
    X = _verify_points(cfg, ds)
    fmap = build_feature_map(cfg["features"], X if ds is None else ds.samples, cfg["seed"])
    pbars = cfg["verify"]["pbars"] if cfg["features"]["kind"] == "rff" else [cfg["pbar"]]
    trials = int(cfg["verify"]["trials"])
    rows, lines = [], []
    total_viol = 0
    for pbar in pbars:
        for gamma in cfg["verify"]["gammas"]:
            unc = build_uncertainty(dict(cfg["uncertainty"], gamma=float(gamma)), X.shape[1])
            for i, x in enumerate(X):
                bound = feature_bounds(fmap, x[None, :], unc, pbar)[0]
                rep = verify_bound_mc(fmap, x, unc, bound, trials, seed=derive_seed(cfg["seed"], "verify") + i)
                total_viol += rep.violations
                rows.append(dict(rep.to_dict(), pbar=_fmt_exp(pbar), gamma=float(gamma), point=i))
                lines.append(f"pbar={_fmt_exp(pbar)} gamma={gamma:g} point={i} Gamma={rep.gamma_feat:.6g} "
                             f"max_ratio={rep.max_ratio:.6g} violations={rep.violations}")
    lines.append(f"total violations: {total_viol}")
    _emit(lines, {"map": cfg["features"]["kind"], "reports": rows, "violations": total_viol}, cfg)
    return EXIT_OK if total_viol == 0 else EXIT_DATA


def cmd_kernel_error(cfg, args):
    ds = _load_data(cfg, required=False)
    X = _verify_points(cfg, ds)
    fmap = build_feature_map(cfg["features"], X if ds is None else ds.samples, cfg["seed"])
    stats = kernel_approx_error(fmap, X)
    payload = dict(stats.to_dict(), map=cfg["features"]["kind"], dim=fmap.dim)
    _emit([f"{k}: {v}" for k, v in payload.items()], payload, cfg)
    return EXIT_OK


def cmd_robust_error(cfg, args):
    mf = _model_arg(args)
    ds = _load_data(cfg)
    unc = build_uncertainty(cfg["uncertainty"], ds.n)
    trials = int(cfg["verify"]["trials"])
    rerr = robust_error(mf.classifier, ds, unc, trials, seed=derive_seed(cfg["seed"], "robust_error"))
    payload = {"samples": ds.L, "trials": trials, "gamma": unc.gamma, "p": _fmt_exp(unc.p),
               "standard_error": standard_error(mf.classifier, ds), "robust_error": rerr}
    _emit([f"{k}: {v}" for k, v in payload.items()], payload, cfg)
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "verify-bounds": cmd_verify_bounds,
    "kernel-error": cmd_kernel_error,
    "robust-error": cmd_robust_error,
}


def _split_overrides(extra):
    out = []
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--") or len(tok) < 3:
            raise UsageError(f"unexpected argument {tok!r}")
        name, eq, val = tok[2:].partition("=")
        if not eq:
            try:
                val = next(it)
            except StopIteration:
                raise UsageError(f"missing value for {tok}") from None
        out.append((name, val))
    return out


def build_parser():
    parser = _Parser(prog="rosvm", description="Robust nonlinear SVMs with bounded feature uncertainty.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=COMMANDS[name].__name__.replace("cmd_", "").replace("_", " "))
        sp.add_argument("--config", help="JSON run configuration")
        if name in ("predict", "robust-error"):
            sp.add_argument("--model", help="model file written by train")
    return parser


def main(argv=None):
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = validate(load_config(args.config, _split_overrides(extra)))
        return COMMANDS[args.command](cfg, args)
    except (UsageError, ConfigError, UnsupportedNormError) as exc:
        print(f"rosvm: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, ModelFileError, OSError) as exc:
        print(f"rosvm: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DivergedTrainingError as exc:
        print(f"rosvm: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
