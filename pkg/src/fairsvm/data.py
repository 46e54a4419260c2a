"""Datasets: CSV ingestion with recipes, a synthetic generator, standardization,
and stratified train/test and k-fold index generation.

Randomness comes from NumPy's ``PCG64`` bit generator
(``numpy.random.default_rng(seed)``); every function that shuffles or samples
takes an explicit seed.
"""

import csv
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import DegenerateGroupError, DegenerateLabelError, InputError, LoadError

__all__ = [
    "Dataset",
    "SyntheticConfig",
    "Recipe",
    "parse_rule",
    "load_csv",
    "load_recipe",
    "synthesize",
    "standardize",
    "apply_standardization",
    "split",
    "kfold",
    "write_csv",
]

MISSING = {"", "na", "nan", "?", "null", "none"}


@dataclass(frozen=True)
class Dataset:
    """Predictors with labels and protected attribute, both coded as -1/+1."""

    X: np.ndarray
    y: np.ndarray
    z: np.ndarray
    columns: tuple = ()
    standardization: tuple = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise InputError("X must be 2-dimensional")
        n = X.shape[0]
        for name in ("y", "z"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (n,):
                raise InputError(f"{name} must have one entry per row")
            if not np.all((v == 1) | (v == -1)):
                raise InputError(f"{name} must be coded as -1/+1")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "X", X)
        if not np.all(np.isfinite(X)):
            raise InputError("X contains missing or non-finite values")
        if not self.columns:
            object.__setattr__(self, "columns", tuple(f"x{j}" for j in range(X.shape[1])))
        elif len(self.columns) != X.shape[1]:
            raise InputError("column names do not match the number of predictors")

    @property
    def n(self):
        return int(self.X.shape[0])

    @property
    def p(self):
        return int(self.X.shape[1])

    def subset(self, idx):
        idx = np.asarray(idx)
        return replace(self, X=self.X[idx], y=self.y[idx], z=self.z[idx])

    def check_usable(self):
        """Dataset invariants needed for training: >= 4 rows, both labels and groups."""
        if self.n < 4:
            raise InputError(f"dataset needs at least 4 rows, has {self.n}")
        if not (np.any(self.y > 0) and np.any(self.y < 0)):
            raise DegenerateLabelError("dataset contains a single label value")
        if not (np.any(self.z > 0) and np.any(self.z < 0)):
            raise DegenerateGroupError("dataset contains a single protected group")
        return self


# ---------------------------------------------------------------- CSV loading


def parse_rule(rule):
    """Turn a rule string into a predicate on raw cell text.

    Supported forms: ``>= 6``, ``> 6``, ``<= 6``, ``< 6``, ``== white``,
    ``!= white``, ``in a,b,c``. Comparisons with numeric right-hand sides are
    numeric; everything else compares stripped strings.
    """
    if callable(rule):
        return rule
    text = str(rule).strip()
    for op in (">=", "<=", "==", "!=", ">", "<"):
        if text.startswith(op):
            rhs = text[len(op):].strip()
            break
    else:
        if text.startswith("in "):
            values = {v.strip() for v in text[3:].split(",")}
            return lambda cell: cell.strip() in values
        raise InputError(f"cannot parse rule {rule!r}")
    try:
        num = float(rhs)
    except ValueError:
        num = None
    if num is None:
        if op == "==":
            return lambda cell: cell.strip() == rhs
        if op == "!=":
            return lambda cell: cell.strip() != rhs
        raise InputError(f"ordering rule {rule!r} needs a numeric right-hand side")
    compare = {
        ">=": lambda a: a >= num, ">": lambda a: a > num, "<=": lambda a: a <= num,
        "<": lambda a: a < num, "==": lambda a: a == num, "!=": lambda a: a != num,
    }[op]

    def predicate(cell):
        try:
            return compare(float(cell))
        except ValueError as exc:
            raise LoadError(f"rule {rule!r} expects numbers, got {cell!r}") from exc

    return predicate


def _sniff_delimiter(first_line):
    if first_line.count(";") > first_line.count(","):
        return ";"
    return ","


def _read_table(path, delimiter=None, header=True, columns=None):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise LoadError(f"{path} is empty")
    if delimiter == "whitespace":
        rows = [ln.split() for ln in lines]
    else:
        delim = delimiter or _sniff_delimiter(lines[0])
        rows = list(csv.reader(lines, delimiter=delim))
    if header:
        names = [c.strip().strip('"') for c in rows[0]]
        rows = rows[1:]
    else:
        if not columns:
            raise LoadError("headerless files need explicit column names")
        names = list(columns)
    for i, row in enumerate(rows):
        if len(row) != len(names):
            raise LoadError(f"{path}: row {i + 1} has {len(row)} fields, expected {len(names)}")
    return names, [[c.strip().strip('"') for c in row] for row in rows]


def _is_numeric(values):
    try:
        for v in values:
            float(v)
    except ValueError:
        return False
    return True


def _table_to_dataset(names, rows, label_column, protected_column, label_rule, group_rule,
                      drop_columns=(), include_protected=False, source=""):
    for col in (label_column, protected_column, *drop_columns):
        if col not in names:
            raise LoadError(f"unknown column {col!r}; available: {', '.join(names)}")
    if not rows:
        raise LoadError(f"{source or 'table'} has no data rows")
    for i, row in enumerate(rows):
        for name, cell in zip(names, row):
            if cell.lower() in MISSING:
                raise LoadError(f"missing value in column {name!r} at data row {i + 1}")
    col_index = {c: j for j, c in enumerate(names)}
    label_pred = parse_rule(label_rule)
    group_pred = parse_rule(group_rule)
    y = np.array([1.0 if label_pred(r[col_index[label_column]]) else -1.0 for r in rows])
    z = np.array([1.0 if group_pred(r[col_index[protected_column]]) else -1.0 for r in rows])

    skip = {label_column, *drop_columns}
    if not include_protected:
        skip.add(protected_column)
    blocks, out_names = [], []
    for name in names:
        if name in skip:
            continue
        values = [r[col_index[name]] for r in rows]
        if _is_numeric(values):
            blocks.append(np.array(values, dtype=float)[:, None])
            out_names.append(name)
        else:
            levels = sorted(set(values))
            blocks.append(np.array([[v == lv for lv in levels] for v in values], dtype=float))
            out_names.extend(f"{name}={lv}" for lv in levels)
    X = np.hstack(blocks) if blocks else np.zeros((len(rows), 0))
    return Dataset(X, y, z, tuple(out_names), meta={"source": source})


def load_csv(path, label_column, protected_column, positive_label_rule, positive_group_rule,
             drop_columns=(), include_protected=False, delimiter=None, header=True, columns=None):
    """Load a delimited text file into a :class:`Dataset`.

    Comma or semicolon delimiters are detected from the header line. Numeric
    columns are used as-is; any other predictor column is expanded into one
    0/1 indicator per distinct value (no reference level dropped), named
    ``column=value``. Labels and protected groups are set to +1 where the
    corresponding rule holds and -1 elsewhere. Row order is preserved.
    """
    names, rows = _read_table(path, delimiter, header, columns)
    return _table_to_dataset(names, rows, label_column, protected_column, positive_label_rule,
                             positive_group_rule, tuple(drop_columns), include_protected,
                             source=os.fspath(path))


@dataclass(frozen=True)
class Recipe:
    """How to turn a raw data file (or a directory of files) into a Dataset.

    Recipe files are ``key = value`` lines; ``#`` starts a comment. Keys:

    ``label_column``, ``label_rule``, ``protected_column``, ``group_rule``
        Required.
    ``drop_columns``
        Comma-separated columns to ignore.
    ``include_protected``
        ``true`` keeps the protected column among the predictors.
    ``delimiter``
        ``,``, ``;`` or ``whitespace``; detected when absent.
    ``header`` / ``columns``
        ``header = false`` with a comma-separated ``columns`` list for
        headerless files.
    ``stack.<value> = <file>``
        When the data path is a directory, these files are stacked in the
        order given and a column named ``protected_column`` is added holding
        ``<value>`` for each file's rows.
    """

    name: str
    label_column: str
    label_rule: str
    protected_column: str
    group_rule: str
    drop_columns: tuple = ()
    include_protected: bool = False
    delimiter: str = None
    header: bool = True
    columns: tuple = None
    stack: tuple = ()

    def load(self, path):
        if os.path.isdir(path):
            if not self.stack:
                raise LoadError(f"{path} is a directory but recipe {self.name!r} defines no stack.* files")
            names, rows = None, []
            for value, fname in self.stack:
                part_names, part_rows = _read_table(os.path.join(path, fname), self.delimiter,
                                                    self.header, self.columns)
                if names is None:
                    names = part_names
                elif part_names != names:
                    raise LoadError(f"{fname} has different columns from the first stacked file")
                rows.extend(r + [value] for r in part_rows)
            names = names + [self.protected_column]
        else:
            names, rows = _read_table(path, self.delimiter, self.header, self.columns)
        return _table_to_dataset(names, rows, self.label_column, self.protected_column,
                                 self.label_rule, self.group_rule, self.drop_columns,
                                 self.include_protected, source=os.fspath(path))


_BUILTIN_RECIPES = os.path.join(os.path.dirname(__file__), "recipes")


def load_recipe(path_or_name):
    """Parse a recipe file; bare names resolve to the recipes shipped with the package."""
    path = os.fspath(path_or_name)
    if not os.path.exists(path):
        candidate = os.path.join(_BUILTIN_RECIPES, f"{path}.recipe")
        if os.path.exists(candidate):
            path = candidate
        else:
            raise LoadError(f"recipe {path_or_name!r} not found")
    values, stack = {}, []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise LoadError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key.startswith("stack."):
                stack.append((key[len("stack."):], value))
            else:
                values[key] = value
    missing = [k for k in ("label_column", "label_rule", "protected_column", "group_rule") if k not in values]
    if missing:
        raise LoadError(f"recipe {path} lacks {', '.join(missing)}")

    def listing(key):
        return tuple(v.strip() for v in values.get(key, "").split(",") if v.strip())

    def flag(key, default):
        return values.get(key, str(default)).lower() in ("1", "true", "yes")

    return Recipe(
        name=values.get("name", os.path.splitext(os.path.basename(path))[0]),
        label_column=values["label_column"],
        label_rule=values["label_rule"],
        protected_column=values["protected_column"],
        group_rule=values["group_rule"],
        drop_columns=listing("drop_columns"),
        include_protected=flag("include_protected", False),
        delimiter=values.get("delimiter") or None,
        header=flag("header", True),
        columns=listing("columns") or None,
        stack=tuple(stack),
    )


def write_csv(ds, path, label_column="y", protected_column="z"):
    """Write a dataset as comma-separated text with -1/+1 label columns."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*ds.columns, label_column, protected_column])
        for row, yi, zi in zip(ds.X, ds.y, ds.z):
            writer.writerow([repr(float(v)) for v in row] + [int(yi), int(zi)])


# ------------------------------------------------------------------ synthetic


@dataclass(frozen=True)
class SyntheticConfig:
    """Settings for :func:`synthesize`.

    ``alignment`` is the inner product of the unit-norm logit directions for
    ``y`` and ``z``. ``skew`` multiplies the largest eigenvalue of the
    positive group's predictor covariance. ``logit_scale`` sharpens both logit
    models; ``None`` makes them deterministic (labels are the signs of the
    linear predictors).
    """

    n: int = 200
    p: int = 2
    alignment: float = 0.85
    skew: float = 3.0
    logit_scale: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 10:
            raise InputError("synthetic datasets need n >= 10")
        if self.p < 1:
            raise InputError("p must be positive")
        if not -1.0 <= self.alignment <= 1.0:
            raise InputError("alignment must lie in [-1, 1]")
        if self.p == 1 and abs(self.alignment) != 1.0:
            raise InputError("with p = 1 the alignment can only be -1 or +1")
        if not self.skew > 0:
            raise InputError("skew must be positive")
        if self.logit_scale is not None and not self.logit_scale > 0:
            raise InputError("logit_scale must be positive or None")


def _draw_signs(rng, linear, scale):
    if scale is None:
        return np.where(linear >= 0, 1.0, -1.0)
    prob = 1.0 / (1.0 + np.exp(-scale * linear))
    return np.where(rng.random(linear.shape[0]) < prob, 1.0, -1.0)


def synthesize(config=None):
    """Two-group Gaussian data with correlated label and protected attribute.

    Steps, all driven by ``default_rng(config.seed)``:

    1. draw a unit vector ``a`` and a unit vector orthogonal to it, and mix
       them into ``c = alignment*a + sqrt(1 - alignment^2)*a_perp``;
    2. draw ``X`` with independent standard normal entries;
    3. draw ``z`` from the logit model on ``X c`` and then ``y`` from the
       logit model on ``X a`` (same uniform stream, in that order);
    4. stretch the positive group about its mean along its top covariance
       eigenvector so that eigenvalue is multiplied by ``skew``.

    The achieved Pearson correlation of ``y`` and ``z`` is stored in
    ``meta["corr_yz"]``.
    """
    cfg = config or SyntheticConfig()
    rng = np.random.default_rng(cfg.seed)
    a = rng.standard_normal(cfg.p)
    a /= np.linalg.norm(a)
    if cfg.p > 1:
        r = rng.standard_normal(cfg.p)
        r -= (r @ a) * a
        r /= np.linalg.norm(r)
    else:
        r = np.zeros(1)
    c = cfg.alignment * a + np.sqrt(max(0.0, 1.0 - cfg.alignment ** 2)) * r
    X = rng.standard_normal((cfg.n, cfg.p))
    z = _draw_signs(rng, X @ c, cfg.logit_scale)
    y = _draw_signs(rng, X @ a, cfg.logit_scale)

    pos = z > 0
    if pos.sum() >= 2 and cfg.skew != 1.0:
        Xp = X[pos]
        mean = Xp.mean(axis=0)
        C = Xp - mean
        _, vecs = np.linalg.eigh(C.T @ C / C.shape[0])
        v = vecs[:, -1]
        X[pos] = mean + C + (np.sqrt(cfg.skew) - 1.0) * np.outer(C @ v, v)

    corr = float(np.corrcoef(y, z)[0, 1]) if y.std() > 0 and z.std() > 0 else float("nan")
    meta = {"source": "synthetic", "corr_yz": corr, "y_direction": a, "z_direction": c}
    return Dataset(X, y, z, meta=meta)


# ------------------------------------------------------- scaling & splitting


def standardize(ds):
    """Center each column and scale it to unit (population) standard deviation.

    Constant columns are centered only, so they become all zeros. The
    ``(mean, scale)`` pair is stored on the returned dataset for use with
    :func:`apply_standardization`.
    """
    mean = ds.X.mean(axis=0)
    scale = ds.X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return replace(ds, X=(ds.X - mean) / scale, standardization=(mean, scale))


def apply_standardization(ds, params):
    mean, scale = params
    if ds.p != len(mean):
        raise InputError("standardization parameters do not match the dataset width")
    return replace(ds, X=(ds.X - mean) / scale, standardization=(mean, scale))


def _strata(ds):
    return [np.flatnonzero((ds.y == yv) & (ds.z == zv)) for yv in (-1.0, 1.0) for zv in (-1.0, 1.0)]


def split(ds, train_fraction=0.7, seed=0):
    """Stratified (by label and group) train/test split.

    The training part gets ``round(train_fraction * n)`` rows, allocated to the
    four (y, z) strata by largest remainder. Raises DegenerateGroupError when
    either part would miss a label or a protected group.
    """
    if not 0.0 < train_fraction < 1.0:
        raise InputError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    strata = [s for s in _strata(ds) if s.size]
    n_train = int(round(train_fraction * ds.n))
    exact = np.array([train_fraction * s.size for s in strata])
    alloc = np.floor(exact).astype(int)
    remainder = n_train - alloc.sum()
    for j in np.argsort(-(exact - alloc), kind="stable")[:max(remainder, 0)]:
        alloc[j] += 1
    # keep both parts of a stratum nonempty where possible
    for j, s in enumerate(strata):
        if s.size >= 2:
            alloc[j] = min(max(alloc[j], 1), s.size - 1)
    train_idx, test_idx = [], []
    for j, s in enumerate(strata):
        perm = rng.permutation(s)
        train_idx.append(perm[: alloc[j]])
        test_idx.append(perm[alloc[j]:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    for part, idx in (("train", train_idx), ("test", test_idx)):
        yy, zz = ds.y[idx], ds.z[idx]
        if not (np.any(yy > 0) and np.any(yy < 0) and np.any(zz > 0) and np.any(zz < 0)):
            raise DegenerateGroupError(f"{part} part lacks a label or protected group; too few rows to stratify")
    return ds.subset(train_idx), ds.subset(test_idx)


def kfold(ds, k=5, seed=0):
    """Stratified k-fold: returns a list of ``k`` sorted held-out index arrays.

    Rows of each (y, z) stratum are shuffled and dealt round-robin, continuing
    the rotation across strata so fold sizes differ by at most one.
    """
    k = int(k)
    if k < 2:
        raise InputError("k must be at least 2")
    if k > ds.n:
        raise DegenerateGroupError(f"cannot make {k} folds from {ds.n} rows")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    offset = 0
    for s in _strata(ds):
        for i, idx in enumerate(rng.permutation(s)):
            folds[(offset + i) % k].append(idx)
        offset = (offset + s.size) % k
    return [np.sort(np.array(f, dtype=int)) for f in folds]
