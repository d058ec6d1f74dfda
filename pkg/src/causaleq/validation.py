"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

import numbers
from typing import Sequence

import numpy as np
from sklearn.utils.validation import check_array

from .graph import NAME_RE
from .statind import Dataset

__all__ = ["check_dataset", "check_threshold", "check_k_min", "check_names"]


def check_names(names: Sequence[str]) -> tuple[str, ...]:
    """Validate variable names against the graph grammar."""
    names = tuple(str(n) for n in names)
    for n in names:
        if not NAME_RE.fullmatch(n):
            raise ValueError(f"invalid variable name {n!r}; use letters, digits and _")
    if len(set(names)) != len(names):
        raise ValueError("duplicate variable names")
    return names


def check_k_min(k_min) -> int:
    if isinstance(k_min, bool) or not isinstance(k_min, numbers.Integral) or k_min < 1:
        raise ValueError(f"k_min must be a positive integer, got {k_min!r}")
    return int(k_min)


def check_threshold(epsilon) -> float:
    if isinstance(epsilon, bool) or not isinstance(epsilon, numbers.Real) or not epsilon >= 0:
        raise ValueError(f"epsilon must be a non-negative number, got {epsilon!r}")
    return float(epsilon)


def check_dataset(X, feature_names: Sequence[str] | None = None) -> Dataset:
    """Coerce ``X`` into a :class:`Dataset`.

    Parameters
    ----------
    X : Dataset, array-like of shape (n_samples, n_features), or data frame
        Entries are treated as category labels; their string form is used.
    feature_names : sequence of str, optional
        Column names.  Taken from ``X.columns`` when present, otherwise
        ``x0, x1, ...``.

    Returns
    -------
    Dataset
    """
    if isinstance(X, Dataset):
        if feature_names is not None and tuple(feature_names) != X.variables:
            raise ValueError("feature_names do not match the dataset's variables")
        return X
    if feature_names is None and hasattr(X, "columns"):
        feature_names = list(X.columns)
    arr = check_array(X, dtype=None, ensure_min_samples=1, ensure_min_features=1)
    if feature_names is None:
        feature_names = [f"x{k}" for k in range(arr.shape[1])]
    names = check_names(feature_names)
    if len(names) != arr.shape[1]:
        raise ValueError(f"got {len(names)} feature names for {arr.shape[1]} columns")
    rows = np.vectorize(str, otypes=[object])(arr).tolist()
    return Dataset(names, rows)
