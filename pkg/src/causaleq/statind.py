"""Categorical data, sample cross-entropy and a data-driven independence oracle.

The dependence measure is the empirical conditional mutual information in
bits, computed from integer cell counts so that exact product tables give an
exact zero.  Strata of the conditioning set with fewer than ``k_min`` rows are
dropped and the share of rows that survived is reported alongside the value.

Sampling uses numpy's ``default_rng(seed)`` (PCG64).  For every row block the
generator draws one uniform vector per node in topological order and maps it
through the inverse CDF of the node's conditional distribution.
"""

from __future__ import annotations

import csv
import io
import json
import math
import threading
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exceptions import (
    IncompleteCptError,
    OracleFailure,
    OverlapError,
    ParseError,
    UnknownVariableError,
)
from .graph import Dag
from .recovery import IndependenceOracle

__all__ = [
    "Dataset",
    "Cpt",
    "CrossEntropyResult",
    "cross_entropy",
    "reliable_independent",
    "DataOracle",
    "data_oracle",
    "forward_sample",
    "DEFAULT_EPSILON",
    "DEFAULT_K_MIN",
]

DEFAULT_EPSILON = 0.02
DEFAULT_K_MIN = 5
_SUM_TOL = 1e-9


class Dataset:
    """Immutable table of categorical samples.

    Parameters
    ----------
    variables : sequence of str
        Column names, in order.
    rows : sequence of sequence of str
        Complete assignments, one per sample.
    categories : mapping, optional
        Declared categories per variable.  Defaults to the values seen, in
        order of first appearance.

    Notes
    -----
    Values are stored as an ``(N, p)`` integer code matrix; ``categories[v][k]``
    is the label of code ``k`` in column ``v``.
    """

    def __init__(self, variables: Sequence[str], rows: Iterable[Sequence[str]],
                 categories: Mapping[str, Sequence[str]] | None = None):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variable names")
        rows = [tuple(r) for r in rows]
        if not rows:
            raise ValueError("a dataset needs at least one row")
        cats = {}
        for k, v in enumerate(variables):
            if categories is not None and v in categories:
                cats[v] = tuple(categories[v])
            else:
                seen = dict.fromkeys(r[k] for r in rows if len(r) == len(variables))
                cats[v] = tuple(seen)
        codes = np.empty((len(rows), len(variables)), dtype=np.int64)
        lookup = {v: {c: i for i, c in enumerate(cats[v])} for v in variables}
        for i, r in enumerate(rows):
            if len(r) != len(variables):
                raise ValueError(f"row {i + 1} has {len(r)} fields, expected {len(variables)}")
            for k, v in enumerate(variables):
                try:
                    codes[i, k] = lookup[v][r[k]]
                except KeyError:
                    raise ValueError(f"row {i + 1}: {r[k]!r} is not a category of {v!r}") from None
        codes.setflags(write=False)
        self._init(variables, cats, codes)

    def _init(self, variables, cats, codes):
        self.variables = variables
        self.categories = cats
        self.codes = codes
        self._col = {v: k for k, v in enumerate(variables)}

    @classmethod
    def from_codes(cls, variables, categories, codes) -> "Dataset":
        """Build directly from an integer code matrix without re-validating labels."""
        obj = cls.__new__(cls)
        codes = np.array(codes, dtype=np.int64, copy=True)
        if codes.ndim != 2 or codes.shape[0] < 1 or codes.shape[1] != len(variables):
            raise ValueError("codes must be an (N >= 1, p) matrix")
        codes.setflags(write=False)
        obj._init(tuple(variables), {v: tuple(categories[v]) for v in variables}, codes)
        return obj

    def __len__(self):
        return self.codes.shape[0]

    @property
    def n_rows(self) -> int:
        return self.codes.shape[0]

    def column(self, v: str) -> np.ndarray:
        return self.codes[:, self.column_index(v)]

    def column_index(self, v: str) -> int:
        try:
            return self._col[v]
        except KeyError:
            raise UnknownVariableError(f"unknown variable {v!r}") from None

    def rows(self) -> list[tuple[str, ...]]:
        cats = [self.categories[v] for v in self.variables]
        return [tuple(cats[k][c] for k, c in enumerate(r)) for r in self.codes.tolist()]

    # --- CSV -------------------------------------------------------------

    @classmethod
    def read_csv(cls, source) -> "Dataset":
        """Read a header row of names followed by one sample per row."""
        if hasattr(source, "read"):
            text = source.read()
        else:
            with open(source, newline="") as fh:
                text = fh.read()
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty CSV file", line=1) from None
        header = [h.strip() for h in header]
        rows = []
        for lineno, r in enumerate(reader, start=2):
            if not r or all(not f.strip() for f in r):
                continue
            if len(r) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(r)}", line=lineno)
            rows.append([f.strip() for f in r])
        if not rows:
            raise ParseError("CSV file has no data rows", line=2)
        return cls(header, rows)

    def to_csv(self, dest=None) -> str | None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.variables)
        w.writerows(self.rows())
        text = buf.getvalue()
        if dest is None:
            return text
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
        return None

    def __repr__(self):
        return f"Dataset(variables={list(self.variables)}, n_rows={self.n_rows})"


# --- conditional probability tables ------------------------------------------


@dataclass(frozen=True)
class _NodeTable:
    categories: tuple[str, ...]
    parents: tuple[str, ...]
    table: Mapping[tuple[str, ...], tuple[float, ...]]


class Cpt:
    """Conditional probability tables for every node of a dag.

    The JSON form is keyed by node name::

        {"b": {"categories": ["0", "1"], "parents": ["a"],
               "table": {"0": [0.8, 0.2], "1": [0.2, 0.8]}}}

    A table key joins the parent categories with commas in the order of
    ``parents``; the single configuration of a root is the empty string.
    Categories may therefore not contain commas.
    """

    def __init__(self, nodes: Mapping[str, Mapping]):
        out = {}
        for name, spec in nodes.items():
            cats = tuple(str(c) for c in spec["categories"])
            if not cats:
                raise ValueError(f"node {name!r} has no categories")
            if any("," in c for c in cats):
                raise ValueError(f"categories of {name!r} may not contain commas")
            if len(set(cats)) != len(cats):
                raise ValueError(f"duplicate categories for {name!r}")
            parents = tuple(spec.get("parents", ()))
            table = {}
            for key, probs in spec["table"].items():
                cfg = tuple(key.split(",")) if key != "" else ()
                if len(cfg) != len(parents):
                    raise ValueError(f"{name!r}: key {key!r} does not match parents {list(parents)}")
                probs = tuple(float(p) for p in probs)
                if len(probs) != len(cats):
                    raise ValueError(f"{name!r}[{key!r}]: expected {len(cats)} probabilities")
                if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > _SUM_TOL:
                    raise ValueError(f"{name!r}[{key!r}]: not a probability vector")
                table[cfg] = probs
            out[name] = _NodeTable(cats, parents, table)
        self.nodes = out

    def __getitem__(self, name):
        return self.nodes[name]

    def __contains__(self, name):
        return name in self.nodes

    @classmethod
    def loads(cls, text: str) -> "Cpt":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno) from None
        if not isinstance(data, dict):
            raise ParseError("CPT file must hold a JSON object", line=1)
        try:
            return cls(data)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad CPT entry: {exc}") from None

    @classmethod
    def load(cls, path) -> "Cpt":
        with open(path) as fh:
            return cls.loads(fh.read())

    def to_dict(self) -> dict:
        return {
            name: {
                "categories": list(t.categories),
                "parents": list(t.parents),
                "table": {",".join(cfg): list(p) for cfg, p in t.table.items()},
            }
            for name, t in self.nodes.items()
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def check_against(self, g: Dag) -> None:
        """Raise IncompleteCptError unless every node and parent row is covered."""
        for v in g.nodes:
            if v not in self.nodes:
                raise IncompleteCptError(f"no table for node {v!r}")
            t = self.nodes[v]
            if set(t.parents) != set(g.parents(v)) or len(t.parents) != len(g.parents(v)):
                raise IncompleteCptError(
                    f"table for {v!r} lists parents {list(t.parents)}, graph has {sorted(g.parents(v))}")
            configs = [()]
            for p in t.parents:
                configs = [c + (x,) for c in configs for x in self.nodes[p].categories]
            for cfg in configs:
                if cfg not in t.table:
                    raise IncompleteCptError(f"table for {v!r} misses parent configuration {','.join(cfg)!r}")


# --- cross entropy -------------------------------------------------------------


@dataclass(frozen=True)
class CrossEntropyResult:
    """Outcome of one sample cross-entropy query.

    Attributes
    ----------
    value : float
        Conditional mutual information estimate in bits, never negative.
    covered_mass : float
        Share of rows in strata of the conditioning set with at least
        ``k_min`` rows.
    query : tuple
        ``(a, b, S)`` with ``S`` a sorted tuple.
    """

    value: float
    covered_mass: float
    query: tuple


def _check_query(d, a, b, given):
    given = tuple(sorted(set(given)))
    for v in (a, b, *given):
        d.column_index(v)
    if a == b:
        raise ValueError("a and b must differ")
    if a in given or b in given:
        raise OverlapError("the conditioning set may not contain a or b")
    return given


def cross_entropy(d: Dataset, a: str, b: str, given: Iterable[str] = (),
                  k_min: int = DEFAULT_K_MIN) -> CrossEntropyResult:
    """Empirical conditional mutual information of ``a`` and ``b`` given ``given``.

    Parameters
    ----------
    d : Dataset
    a, b : str
        Distinct variables not in ``given``.
    given : iterable of str
    k_min : int
        Strata with fewer rows are left out of the sum.

    Returns
    -------
    CrossEntropyResult

    Examples
    --------
    >>> d = Dataset(["a", "b"], [("0", "0"), ("1", "1")])
    >>> cross_entropy(d, "a", "b", k_min=1).value
    1.0
    """
    given = _check_query(d, a, b, given)
    if k_min < 1:
        raise ValueError("k_min must be at least 1")
    n = d.n_rows
    ca, cb = d.column(a), d.column(b)
    na, nb = len(d.categories[a]), len(d.categories[b])
    if given:
        cols = [d.column(v) for v in given]
        dims = [len(d.categories[v]) for v in given]
        stratum = np.ravel_multi_index(cols, dims)
        _, stratum = np.unique(stratum, return_inverse=True)
        n_strata = int(stratum.max()) + 1
    else:
        stratum = np.zeros(n, dtype=np.int64)
        n_strata = 1
    flat = (stratum * na + ca) * nb + cb
    counts = np.bincount(flat, minlength=n_strata * na * nb).reshape(n_strata, na, nb)
    n_s = counts.sum(axis=(1, 2))
    keep = n_s >= k_min
    counts = counts[keep]
    n_s = n_s[keep]
    covered = int(n_s.sum())
    if covered == 0:
        return CrossEntropyResult(0.0, 0.0, (a, b, given))
    n_sa = counts.sum(axis=2, keepdims=True)
    n_sb = counts.sum(axis=1, keepdims=True)
    mask = counts > 0
    # n_sab * n_s / (n_sa * n_sb) in exact integer arithmetic where it matters
    num = counts * n_s[:, None, None]
    den = n_sa * n_sb
    ratio = np.where(mask, num, 1) / np.where(mask, den, 1)
    terms = np.where(mask & (num != den), counts * np.log2(np.where(mask, ratio, 1.0)), 0.0)
    value = float(terms.sum()) / n
    return CrossEntropyResult(max(value, 0.0), covered / n, (a, b, given))


def reliable_independent(d: Dataset, a: str, b: str, given: Iterable[str] = (),
                         k_min: int = DEFAULT_K_MIN, epsilon: float = DEFAULT_EPSILON) -> bool:
    """True iff the sample cross-entropy of ``a`` and ``b`` given ``given`` is at most ``epsilon``."""
    return cross_entropy(d, a, b, given, k_min).value <= epsilon


class DataOracle(IndependenceOracle):
    """Independence oracle answering from a dataset, memoized per query.

    Raises OracleFailure for a query whose conditioning set leaves no stratum
    with ``k_min`` rows, since no answer would be reliable.
    """

    def __init__(self, d: Dataset, k_min: int = DEFAULT_K_MIN, epsilon: float = DEFAULT_EPSILON):
        if k_min < 1:
            raise ValueError("k_min must be at least 1")
        if epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        self.data = d
        self.k_min = k_min
        self.epsilon = epsilon
        self._memo = {}
        self._lock = threading.Lock()

    @property
    def variables(self):
        return self.data.variables

    def result(self, a, given, b) -> CrossEntropyResult:
        key = (frozenset((a, b)), frozenset(given))
        with self._lock:
            hit = self._memo.get(key)
        if hit is None:
            lo, hi = sorted((a, b))
            hit = cross_entropy(self.data, lo, hi, given, self.k_min)
            with self._lock:
                hit = self._memo.setdefault(key, hit)
        return hit

    def _holds(self, a, given, b):
        r = self.result(a, given, b)
        if r.covered_mass == 0.0:
            raise OracleFailure(
                f"no stratum of {sorted(given)} has {self.k_min} rows; cannot test {a} vs {b}")
        return r.value <= self.epsilon


def data_oracle(d: Dataset, k_min: int = DEFAULT_K_MIN, epsilon: float = DEFAULT_EPSILON) -> DataOracle:
    return DataOracle(d, k_min, epsilon)


# --- forward sampling -----------------------------------------------------------


def forward_sample(g: Dag, cpt: Cpt, n: int, seed: int) -> Dataset:
    """Draw ``n`` rows from ``(g, cpt)`` and drop latent columns.

    Parameters
    ----------
    g : Dag
    cpt : Cpt
        Must cover every node of ``g`` and every parent configuration.
    n : int
        Number of rows, at least 1.
    seed : int
        Seed for ``numpy.random.default_rng``.

    Returns
    -------
    Dataset
        Columns are the observables of ``g`` in node order.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    cpt.check_against(g)
    rng = np.random.default_rng(seed)
    codes = {}
    for v in g.topological_order():
        t = cpt[v]
        u = rng.random(n)
        if t.parents:
            pcodes = [codes[p] for p in t.parents]
            dims = [len(cpt[p].categories) for p in t.parents]
            row = np.ravel_multi_index(pcodes, dims)
            cdf = np.empty((math.prod(dims), len(t.categories)))
            for idx in range(cdf.shape[0]):
                cfg = np.unravel_index(idx, dims)
                key = tuple(cpt[p].categories[k] for p, k in zip(t.parents, cfg))
                cdf[idx] = np.cumsum(t.table[key])
        else:
            row = np.zeros(n, dtype=np.int64)
            cdf = np.cumsum(t.table[()])[None, :]
        cdf[:, -1] = 1.0
        c = cdf[row]
        codes[v] = (u[:, None] >= c).sum(axis=1)
    obs = g.observables
    matrix = np.column_stack([codes[v] for v in obs]) if obs else np.empty((n, 0), dtype=np.int64)
    return Dataset.from_codes(obs, {v: cpt[v].categories for v in obs}, matrix)
