"""``fairsvm`` command line: train, sweep, roc, synth.

Datasets come from ``--data`` plus an optional ``--recipe`` (a shipped name
such as ``wine`` or a path to a recipe file). Without a recipe the file must
have ``y`` and ``z`` columns coded -1/+1, as written by ``fairsvm synth``.

Exit status is 0 on success, 2 for bad input (unreadable or degenerate data,
invalid options) and 1 when training fails.
"""

import argparse
import os
import shlex
import sys

from .ccp import CcpConfig
from .data import (
    SyntheticConfig,
    apply_standardization,
    load_csv,
    load_recipe,
    split,
    standardize,
    synthesize,
    write_csv,
)
from .exceptions import FairSVMError, InputError
from .kernel import Kernel, kernel_decision_values, train_fair_ksvm, train_ksvm
from .linear import decision_values, train_lsvm, train_ssvm, train_zsvm
from .metrics import fairness_report
from .persistence import load_model, save_model
from .sweep import DEFAULT_D_GRID, DEFAULT_LAMBDA_GRID, DEFAULT_MU_GRID, METHODS, SweepSpec, run_sweep, write_records

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_RUNTIME, EXIT_INPUT = 0, 1, 2


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _add_data_args(p, required=True):
    p.add_argument("--data", required=required, help="data file (or directory, for stacked recipes)")
    p.add_argument("--recipe", help="recipe name (wine, german) or recipe file")


def _add_kernel_args(p):
    p.add_argument("--kernel", default="rbf", choices=("rbf", "linear", "poly"))
    p.add_argument("--gamma", type=float, default=None, help="rbf width (default: median heuristic)")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--coef0", type=float, default=1.0)


def _add_ccp_args(p):
    p.add_argument("--max-ccp-iters", type=int, default=50)
    p.add_argument("--ccp-tol", type=float, default=1e-6)


def build_parser():
    parser = _ArgumentParser(prog="fairsvm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    t = sub.add_parser("train", help="train one model, write model and report files")
    _add_data_args(t)
    t.add_argument("--method", default="ssvm", choices=METHODS)
    _add_kernel_args(t)
    t.add_argument("--lambda", dest="lam", type=float, default=1.0)
    t.add_argument("--d", type=float, default=0.0)
    t.add_argument("--mu", type=float, default=1.0)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--train-fraction", type=float, default=0.7)
    t.add_argument("--out", required=True, help="output directory (model.json, report.txt)")
    _add_ccp_args(t)

    s = sub.add_parser("sweep", help="cross-validated (method, d, mu) sweep")
    _add_data_args(s)
    s.add_argument("--method", type=lambda v: tuple(m.strip() for m in v.split(",") if m.strip()),
                   default=("lsvm", "zsvm", "ssvm"), help="comma-separated methods")
    _add_kernel_args(s)
    s.add_argument("--lambda", dest="lam", type=_float_list, default=DEFAULT_LAMBDA_GRID,
                   help="lambda grid searched on the plain linear SVM")
    s.add_argument("--d", type=_float_list, default=DEFAULT_D_GRID)
    s.add_argument("--mu", type=_float_list, default=DEFAULT_MU_GRID)
    s.add_argument("--folds", type=int, default=5)
    s.add_argument("--rounds", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--train-fraction", type=float, default=0.7)
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    s.add_argument("--out", required=True, help="output table")
    _add_ccp_args(s)

    r = sub.add_parser("roc", help="ROC point files of a trained model on a dataset")
    _add_data_args(r)
    r.add_argument("--model", required=True, help="model file written by train")
    r.add_argument("--out", required=True, help="output directory")

    g = sub.add_parser("synth", help="write a synthetic dataset")
    g.add_argument("--n", type=int, default=200)
    g.add_argument("--p", type=int, default=2)
    g.add_argument("--alignment", type=float, default=0.85)
    g.add_argument("--skew", type=float, default=3.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output CSV")
    return parser


def _load(args):
    if args.recipe:
        return load_recipe(args.recipe).load(args.data)
    return load_csv(args.data, "y", "z", "== 1", "== 1")


def _train(method, ds, args):
    kernel = Kernel(args.kernel, args.gamma, args.degree, args.coef0)
    ccp = CcpConfig(max_outer_iterations=args.max_ccp_iters, objective_change_tolerance=args.ccp_tol,
                    mu=args.mu)
    X, y, z = ds.X, ds.y, ds.z
    if method == "lsvm":
        return train_lsvm(X, y, args.lam)
    if method == "zsvm":
        return train_zsvm(X, y, z, args.lam, args.d)
    if method == "ssvm":
        return train_ssvm(X, y, z, args.lam, args.d, ccp)
    if method == "ksvm":
        return train_ksvm(X, y, kernel, args.lam)
    return train_fair_ksvm(X, y, z, kernel, args.lam, args.d, ccp)


def _scores(model, X):
    if hasattr(model, "alpha"):
        return kernel_decision_values(model, X)
    return decision_values(model, X)


def _report_lines(prefix, report):
    return [f"{prefix}{k}={v:.10g}" for k, v in report.metrics().items()]


def cmd_train(args, invocation):
    ds = _load(args).check_usable()
    if not 0 < args.train_fraction < 1:
        raise InputError("--train-fraction must lie strictly between 0 and 1")
    train, test = split(ds, args.train_fraction, args.seed)
    train = standardize(train)
    test = apply_standardization(test, train.standardization)
    model = _train(args.method, train, args)

    os.makedirs(args.out, exist_ok=True)
    save_model(os.path.join(args.out, "model.json"), model, ds.columns, train.standardization)
    test_report = fairness_report(_scores(model, test.X), test.y, test.z)
    train_report = fairness_report(_scores(model, train.X), train.y, train.z)
    lines = [f"# {invocation}",
             f"# method={model.method} iterations={model.iterations} status={model.solver_status}"]
    lines += _report_lines("", test_report) + _report_lines("train_", train_report)
    with open(os.path.join(args.out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    for line in lines[2:]:
        print(line)


def cmd_sweep(args, invocation):
    ds = _load(args)
    spec = SweepSpec(
        methods=args.method, d_grid=args.d, mu_grid=args.mu, lambda_grid=args.lam, folds=args.folds,
        rounds=args.rounds, train_fraction=args.train_fraction, base_seed=args.seed,
        kernel=Kernel(args.kernel, args.gamma, args.degree, args.coef0),
        max_ccp_iters=args.max_ccp_iters, ccp_tol=args.ccp_tol,
    )
    if args.jobs < 1:
        raise InputError("--jobs must be at least 1")
    records = run_sweep(ds, spec, jobs=args.jobs)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        write_records(records, fh, comment=invocation)
    failed = sum(r.kind == "cell" and r.status != "ok" for r in records)
    print(f"wrote {len(records)} rows to {args.out} ({failed} failed cells)")


def _write_points(path, curve, invocation):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {invocation}\nfpr,tpr\n")
        for f, t in curve.points():
            fh.write(f"{f:.10g},{t:.10g}\n")


def cmd_roc(args, invocation):
    model, columns, std = load_model(args.model)
    ds = _load(args)
    if columns and tuple(columns) != tuple(ds.columns):
        raise InputError("dataset columns differ from the ones the model was trained on")
    if std is not None:
        ds = apply_standardization(ds, std)
    report = fairness_report(_scores(model, ds.X), ds.y, ds.z)
    os.makedirs(args.out, exist_ok=True)
    _write_points(os.path.join(args.out, "roc_y.csv"), report.roc_y, invocation)
    _write_points(os.path.join(args.out, "roc_z.csv"), report.roc_z, invocation)
    _write_points(os.path.join(args.out, "roc_z_given_y_pos.csv"), report.roc_z_given_y_pos, invocation)
    for line in _report_lines("", report):
        print(line)


def cmd_synth(args, invocation):
    ds = synthesize(SyntheticConfig(n=args.n, p=args.p, alignment=args.alignment, skew=args.skew,
                                    seed=args.seed))
    write_csv(ds, args.out)
    print(f"corr_yz={ds.meta['corr_yz']:.10g}")


COMMANDS = {"train": cmd_train, "sweep": cmd_sweep, "roc": cmd_roc, "synth": cmd_synth}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    invocation = shlex.join(["fairsvm", *argv])
    try:
        COMMANDS[args.command](args, invocation)
    except InputError as exc:
        print(f"fairsvm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FairSVMError, OSError) as exc:
        print(f"fairsvm: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
