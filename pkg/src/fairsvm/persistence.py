"""Model files: versioned JSON holding everything needed to score new rows.

Layout (``version`` 1)::

    {
      "format": "fairsvm-model", "version": 1,
      "kind": "linear" | "kernel", "method": ..., "lam": ..., "d": ..., "mu": ...,
      "iterations": ..., "objective": ..., "solver_status": ...,
      "columns": [...],
      "standardization": {"mean": [...], "scale": [...]} | null,
      # linear
      "w": [...], "b": ...,
      # kernel
      "kernel": {"variant", "gamma", "degree", "coef0"},
      "alpha": [...], "b": ..., "X": [[...]], "y": [...]
    }

Floats are written with ``repr`` precision, so a load reproduces the scores
bit for bit.
"""

import json

import numpy as np

from .exceptions import LoadError
from .kernel import Kernel, KernelModel
from .linear import LinearModel

__all__ = ["FORMAT", "VERSION", "save_model", "load_model"]

FORMAT = "fairsvm-model"
VERSION = 1


def _common(model):
    return {
        "method": model.method,
        "lam": model.lam,
        "d": model.d,
        "mu": model.mu,
        "iterations": model.iterations,
        "objective": model.objective,
        "solver_status": model.solver_status,
    }


def save_model(path, model, columns=(), standardization=None):
    doc = {"format": FORMAT, "version": VERSION}
    if isinstance(model, LinearModel):
        doc["kind"] = "linear"
    elif isinstance(model, KernelModel):
        doc["kind"] = "kernel"
    else:
        raise TypeError(f"cannot save {type(model).__name__}")
    doc.update(_common(model))
    doc["columns"] = list(columns)
    if standardization is not None:
        mean, scale = standardization
        doc["standardization"] = {"mean": np.asarray(mean).tolist(), "scale": np.asarray(scale).tolist()}
    else:
        doc["standardization"] = None
    if doc["kind"] == "linear":
        doc["w"] = model.w.tolist()
        doc["b"] = model.b
    else:
        doc["kernel"] = model.kernel.to_dict()
        doc["alpha"] = model.alpha.tolist()
        doc["b"] = model.b
        doc["X"] = model.X.tolist()
        doc["y"] = model.y.tolist()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path):
    """Returns ``(model, columns, standardization)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"cannot read model file {path}: {exc}") from exc
    if doc.get("format") != FORMAT:
        raise LoadError(f"{path} is not a fairsvm model file")
    if doc.get("version") != VERSION:
        raise LoadError(f"{path} has unsupported model version {doc.get('version')!r}")
    try:
        meta = {k: doc[k] for k in ("method", "lam", "d", "mu", "iterations", "objective", "solver_status")}
        if doc["kind"] == "linear":
            model = LinearModel(np.asarray(doc["w"], dtype=float), float(doc["b"]), **meta)
        elif doc["kind"] == "kernel":
            k = doc["kernel"]
            kernel = Kernel(k["variant"], k["gamma"], k["degree"], k["coef0"])
            model = KernelModel(np.asarray(doc["alpha"], dtype=float), float(doc["b"]),
                                np.asarray(doc["X"], dtype=float), np.asarray(doc["y"], dtype=float),
                                kernel, **meta)
        else:
            raise LoadError(f"{path}: unknown model kind {doc['kind']!r}")
        std = doc["standardization"]
        if std is not None:
            std = (np.asarray(std["mean"], dtype=float), np.asarray(std["scale"], dtype=float))
    except (KeyError, TypeError) as exc:
        raise LoadError(f"{path}: malformed model file ({exc})") from exc
    return model, tuple(doc.get("columns", ())), std
