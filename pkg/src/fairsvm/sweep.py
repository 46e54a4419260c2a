"""Cross-validated (d, mu) sweeps producing one record per trained cell.

Each round draws a stratified train/test split (seed ``base_seed + round``),
standardizes on the training part, picks ``lam`` for the plain linear SVM by
k-fold cross-validated AUC, and then trains every (method, d, mu) cell with
that ``lam`` and scores it on the test part. Kernel methods get the box bound
``1 / (2 lam)`` and penalty ``mu / (2 lam)``, which is the rescaling that maps
the linear primal onto the kernel dual.

Cells are independent, so they may run in worker processes. Records are
sorted canonically before they are returned, so output never depends on
scheduling.
"""

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields

import numpy as np

from .ccp import CcpConfig
from .data import apply_standardization, kfold, split, standardize
from .exceptions import FairSVMError, InputError
from .kernel import Kernel, kernel_decision_values, train_fair_ksvm, train_ksvm
from .linear import decision_values, train_lsvm, train_ssvm, train_zsvm
from .metrics import auc, dp_delta, eo_delta, roc

__all__ = [
    "METHODS",
    "DEFAULT_D_GRID",
    "DEFAULT_MU_GRID",
    "DEFAULT_LAMBDA_GRID",
    "SweepSpec",
    "SweepRecord",
    "select_lambda",
    "run_sweep",
    "summarize",
    "write_records",
    "read_records",
]

METHODS = ("lsvm", "zsvm", "ssvm", "ksvm", "fair-ksvm")
DEFAULT_D_GRID = (0.0, 0.001, 0.002, 0.005, 0.01, 0.025, 0.05, 0.1)
DEFAULT_MU_GRID = (0.0, 1.0, 10.0)
DEFAULT_LAMBDA_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)

# which hyperparameters each method actually reads; others are ignored so the
# trained model can be shared across cells
_USES = {"lsvm": (), "zsvm": ("d",), "ssvm": ("d", "mu"), "ksvm": (), "fair-ksvm": ("d", "mu")}


def _grid(values, name):
    values = tuple(float(v) for v in values)
    if not values:
        raise InputError(f"{name} grid is empty")
    if any(not (math.isfinite(v) and v >= 0) for v in values):
        raise InputError(f"{name} grid values must be finite and nonnegative")
    return values


@dataclass(frozen=True)
class SweepSpec:
    methods: tuple = ("lsvm", "zsvm", "ssvm")
    d_grid: tuple = DEFAULT_D_GRID
    mu_grid: tuple = DEFAULT_MU_GRID
    lambda_grid: tuple = DEFAULT_LAMBDA_GRID
    folds: int = 5
    rounds: int = 5
    train_fraction: float = 0.7
    base_seed: int = 0
    kernel: Kernel = Kernel("rbf")
    max_ccp_iters: int = 50
    ccp_tol: float = 1e-6

    def __post_init__(self):
        methods = tuple(self.methods)
        if not methods:
            raise InputError("no methods given")
        bad = [m for m in methods if m not in METHODS]
        if bad:
            raise InputError(f"unknown method(s) {', '.join(bad)}; choose from {', '.join(METHODS)}")
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "d_grid", _grid(self.d_grid, "d"))
        object.__setattr__(self, "mu_grid", _grid(self.mu_grid, "mu"))
        lam = _grid(self.lambda_grid, "lambda")
        if any(v <= 0 for v in lam):
            raise InputError("lambda grid values must be positive")
        object.__setattr__(self, "lambda_grid", lam)
        if self.folds < 2:
            raise InputError("folds must be at least 2")
        if self.rounds < 1:
            raise InputError("rounds must be at least 1")
        if not 0 < self.train_fraction < 1:
            raise InputError("train fraction must lie strictly between 0 and 1")


@dataclass(frozen=True)
class SweepRecord:
    """One trained cell (``kind == "cell"``) or a per-(method, d, mu) mean (``"mean"``).

    Summary rows carry ``round = fold = -1``. Failed cells have NaN metrics
    and the error message in ``status``.
    """

    kind: str
    method: str
    d: float
    mu: float
    round: int
    fold: int
    lam: float
    auc_y: float
    dp_delta: float
    eo_delta: float
    iterations: float
    wall_time: float
    status: str

    def sort_key(self):
        return (self.kind != "cell", self.method, self.d, self.mu, self.round, self.fold)


def _scores_and_model(method, train, lam, d, mu, spec):
    ccp = CcpConfig(max_outer_iterations=spec.max_ccp_iters, objective_change_tolerance=spec.ccp_tol,
                    mu=mu if method == "ssvm" else mu / (2.0 * lam))
    X, y, z = train.X, train.y, train.z
    if method == "lsvm":
        model = train_lsvm(X, y, lam)
    elif method == "zsvm":
        model = train_zsvm(X, y, z, lam, d)
    elif method == "ssvm":
        model = train_ssvm(X, y, z, lam, d, ccp)
    elif method == "ksvm":
        return train_ksvm(X, y, spec.kernel, 1.0 / (2.0 * lam)), kernel_decision_values
    else:
        return train_fair_ksvm(X, y, z, spec.kernel, 1.0 / (2.0 * lam), d, ccp), kernel_decision_values
    return model, decision_values


def select_lambda(train, grid, folds, seed):
    """``lam`` from ``grid`` with the best mean k-fold AUC of the plain linear SVM.

    Ties go to the earlier grid entry.
    """
    best, best_auc = None, -np.inf
    held_out = kfold(train, folds, seed)
    everything = np.arange(train.n)
    for lam in grid:
        aucs = []
        for val_idx in held_out:
            fit = train.subset(np.setdiff1d(everything, val_idx))
            val = train.subset(val_idx)
            model = train_lsvm(fit.X, fit.y, lam)
            aucs.append(auc(roc(decision_values(model, val.X), val.y)))
        mean_auc = float(np.mean(aucs))
        if mean_auc > best_auc:
            best, best_auc = lam, mean_auc
    return best


def _round_data(ds, spec, rnd):
    seed = spec.base_seed + rnd
    train, test = split(ds, spec.train_fraction, seed)
    train = standardize(train)
    test = apply_standardization(test, train.standardization)
    return train, test, seed


def _run_task(args):
    ds, spec, rnd, lam, method, d, mu = args
    train, test, _ = _round_data(ds, spec, rnd)
    start = time.perf_counter()
    try:
        model, score = _scores_and_model(method, train, lam, d, mu, spec)
        s = score(model, test.X)
        metrics = (auc(roc(s, test.y)), dp_delta(s, test.z), eo_delta(s, test.z, test.y))
        iterations, status = model.iterations, "ok"
    except FairSVMError as exc:
        metrics, iterations, status = (math.nan,) * 3, 0, f"failed: {exc}"
    return metrics, iterations, time.perf_counter() - start, status


def run_sweep(ds, spec, jobs=1):
    """Train and score every (round, method, d, mu) cell; returns sorted records plus means."""
    ds.check_usable()
    lams = []
    for rnd in range(spec.rounds):
        train, _, seed = _round_data(ds, spec, rnd)
        lams.append(select_lambda(train, spec.lambda_grid, spec.folds, seed))

    tasks, cells = {}, []
    for rnd in range(spec.rounds):
        for method in spec.methods:
            for d in spec.d_grid:
                for mu in spec.mu_grid:
                    key = (rnd, method,
                           d if "d" in _USES[method] else None,
                           mu if "mu" in _USES[method] else None)
                    tasks.setdefault(key, (ds, spec, rnd, lams[rnd], method, d, mu))
                    cells.append((rnd, method, d, mu, key))

    keys = list(tasks)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = dict(zip(keys, pool.map(_run_task, [tasks[k] for k in keys])))
    else:
        outcomes = {k: _run_task(tasks[k]) for k in keys}

    records = []
    for rnd, method, d, mu, key in cells:
        (a, dp, eo), iterations, wall, status = outcomes[key]
        records.append(SweepRecord("cell", method, d, mu, rnd, 0, lams[rnd], a, dp, eo,
                                   float(iterations), wall, status))
    records.sort(key=SweepRecord.sort_key)
    return records + summarize(records)


def summarize(records):
    """Mean over rounds of each (method, d, mu), successful cells only."""
    groups = {}
    for r in records:
        if r.kind == "cell":
            groups.setdefault((r.method, r.d, r.mu), []).append(r)
    out = []
    for (method, d, mu), rows in sorted(groups.items()):
        ok = [r for r in rows if r.status == "ok"]

        def mean(attr):
            return float(np.mean([getattr(r, attr) for r in ok])) if ok else math.nan

        status = "ok" if len(ok) == len(rows) else f"failed cells: {len(rows) - len(ok)}/{len(rows)}"
        out.append(SweepRecord("mean", method, d, mu, -1, -1, mean("lam"), mean("auc_y"),
                               mean("dp_delta"), mean("eo_delta"), mean("iterations"),
                               mean("wall_time"), status))
    return out


_FIELDS = [f.name for f in fields(SweepRecord)]


def _fmt(v):
    if isinstance(v, float):
        return "%.10g" % v
    return str(v)


def write_records(records, fh, comment=None):
    """Comma-separated table with a header; ``comment`` becomes a leading ``#`` line."""
    if comment is not None:
        fh.write(f"# {comment}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(_FIELDS)
    for r in records:
        writer.writerow([_fmt(v) for v in astuple(r)])


def read_records(fh):
    """Inverse of :func:`write_records`."""
    lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    if header != _FIELDS:
        raise InputError(f"unexpected sweep header {header}")
    types = [f.type for f in fields(SweepRecord)]
    out = []
    for row in reader:
        values = []
        for t, cell in zip(types, row):
            values.append(int(cell) if t is int else float(cell) if t is float else cell)
        out.append(SweepRecord(*values))
    return out
