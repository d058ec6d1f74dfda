"""Genuine and potential causes by enumerating consistent models.

Candidate models range over the observables with, for every pair, no link,
a directed link either way, or a hidden common cause (a latent with exactly
those two children).  A candidate is kept when

1. every independence it implies over the observables holds in the oracle,
2. dropping any single link breaks (1), and
3. no other candidate passing (1) and (2) implies strictly more of the
   oracle's independencies.

Verdicts read the typed links of the kept models, so a model explaining the
dependence of ``c`` and ``e`` by a hidden common cause counts against
``c -> e`` even when its pattern draws the same arrowhead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Union

from .embedded import EmbeddedPattern, canonical_dag, embedded_pattern
from .exceptions import TooManyVariablesError, UnknownVariableError
from .graph import HybridGraph, Mark
from .recovery import IndependenceOracle
from .separation import d_connected_mask

__all__ = [
    "MAX_VARIABLES",
    "PatternSet",
    "CauseVerdict",
    "consistent_patterns",
    "cause_verdict",
    "genuine_cause",
    "potential_cause",
]

MAX_VARIABLES = 4

# link types of an ordered pair (u, v) with u before v
_NONE, _FWD, _BWD, _BI = range(4)


@dataclass(frozen=True)
class PatternSet:
    """Models consistent with an oracle and their distinct completed patterns.

    Attributes
    ----------
    variables : tuple of str
    models : tuple of HybridGraph
        Kept candidates, as typed links over the observables; ``<->`` stands
        for one hidden common cause.
    patterns : tuple of EmbeddedPattern
        Distinct completed patterns of ``models``.
    latent_budget : int
        Largest number of hidden common causes a candidate was allowed.
    """

    variables: tuple[str, ...]
    models: tuple[HybridGraph, ...]
    patterns: tuple[EmbeddedPattern, ...]
    latent_budget: int

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def __contains__(self, p):
        return any(p == q for q in self.patterns)


@dataclass(frozen=True)
class CauseVerdict:
    """Where ``cause -> effect`` appears among the consistent models.

    ``tier`` is ``"genuine"`` when every model has the arrow, ``"potential"``
    when some model has it, none has the reverse and not all have it, and
    ``"none"`` otherwise.
    """

    cause: str
    effect: str
    in_all: bool
    in_some: bool
    reverse_in_some: bool
    n_models: int
    n_patterns: int

    @property
    def tier(self) -> str:
        if self.in_all:
            return "genuine"
        if self.in_some and not self.reverse_in_some:
            return "potential"
        return "none"


def _triples(variables):
    out = []
    for a, b in itertools.combinations(range(len(variables)), 2):
        rest = [k for k in range(len(variables)) if k not in (a, b)]
        for size in range(len(rest) + 1):
            for s in itertools.combinations(rest, size):
                out.append((a, b, s))
    return out


def _oracle_relation(o, variables, triples):
    mask = 0
    for k, (a, b, s) in enumerate(triples):
        if o.holds(variables[a], [variables[i] for i in s], variables[b]):
            mask |= 1 << k
    return mask


def _typed_graph(variables, pairs, types):
    edges = []
    for (i, j), t in zip(pairs, types):
        u, v = variables[i], variables[j]
        if t == _FWD:
            edges.append((u, v, Mark.TAIL, Mark.ARROW))
        elif t == _BWD:
            edges.append((u, v, Mark.ARROW, Mark.TAIL))
        elif t == _BI:
            edges.append((u, v, Mark.ARROW, Mark.ARROW))
    return HybridGraph(variables, edges)


def _acyclic(n, pairs, types):
    pa = [0] * n
    for (i, j), t in zip(pairs, types):
        if t == _FWD:
            pa[j] |= 1 << i
        elif t == _BWD:
            pa[i] |= 1 << j
    done = 0
    while done != (1 << n) - 1:
        ready = [k for k in range(n) if not done >> k & 1 and not pa[k] & ~done]
        if not ready:
            return False
        for k in ready:
            done |= 1 << k
    return True


def _implied_relation(h, variables, triples):
    g, _ = canonical_dag(h)
    idx = [g.index(v) for v in variables]
    mask = 0
    cache = {}
    for k, (a, b, s) in enumerate(triples):
        z = 0
        for i in s:
            z |= 1 << idx[i]
        key = (a, z)
        reach = cache.get(key)
        if reach is None:
            reach = cache[key] = d_connected_mask(g, idx[a], z)
        if not reach >> idx[b] & 1:
            mask |= 1 << k
    return mask


def consistent_patterns(o: IndependenceOracle, n_max: int | None = None) -> PatternSet:
    """Enumerate the models and patterns consistent with ``o``.

    Parameters
    ----------
    o : IndependenceOracle
        At most four variables.
    n_max : int, optional
        Total node budget (observables plus hidden common causes).  Default
        allows one hidden cause per pair.

    Returns
    -------
    PatternSet

    Raises
    ------
    TooManyVariablesError
        If ``o`` has more than four variables.
    """
    variables = tuple(o.variables)
    n = len(variables)
    if n > MAX_VARIABLES:
        raise TooManyVariablesError(
            f"cause enumeration is limited to {MAX_VARIABLES} variables, got {n}")
    pairs = list(itertools.combinations(range(n), 2))
    budget = len(pairs) if n_max is None else max(0, min(len(pairs), n_max - n))
    triples = _triples(variables)
    target = _oracle_relation(o, variables, triples)

    imaps = {}
    for types in itertools.product(range(4), repeat=len(pairs)):
        if sum(t == _BI for t in types) > budget or not _acyclic(n, pairs, types):
            continue
        rel = _implied_relation(_typed_graph(variables, pairs, types), variables, triples)
        if rel & ~target == 0:
            imaps[types] = rel

    minimal = []
    for types, rel in imaps.items():
        reducible = False
        for k, t in enumerate(types):
            if t != _NONE and types[:k] + (_NONE,) + types[k + 1:] in imaps:
                reducible = True
                break
        if not reducible:
            minimal.append((types, rel))

    kept = [(types, rel) for types, rel in minimal
            if not any(other != rel and rel & other == rel for _, other in minimal)]

    models = []
    patterns = []
    for types, _ in sorted(kept):
        h = _typed_graph(variables, pairs, types)
        models.append(h)
        p = embedded_pattern(canonical_dag(h)[0])
        if not any(p == q for q in patterns):
            patterns.append(p)
    return PatternSet(variables, tuple(models), tuple(patterns), budget)


def _pattern_set(source) -> PatternSet:
    if isinstance(source, PatternSet):
        return source
    return consistent_patterns(source)


def cause_verdict(source: Union[IndependenceOracle, PatternSet], c: str, e: str) -> CauseVerdict:
    """Tally ``c -> e`` and ``e -> c`` over the consistent models of ``source``."""
    ps = _pattern_set(source)
    for v in (c, e):
        if v not in ps.variables:
            raise UnknownVariableError(f"unknown variable {v!r}")
    if c == e:
        raise ValueError("cause and effect must differ")

    def directed(h, u, v):
        return h.adjacent(u, v) and h.is_directed(u, v)

    forward = [directed(h, c, e) for h in ps.models]
    backward = [directed(h, e, c) for h in ps.models]
    return CauseVerdict(c, e, bool(forward) and all(forward), any(forward), any(backward),
                        len(ps.models), len(ps.patterns))


def genuine_cause(source: Union[IndependenceOracle, PatternSet], c: str, e: str) -> bool:
    """True iff every consistent model has the link ``c -> e``."""
    return cause_verdict(source, c, e).tier == "genuine"


def potential_cause(source: Union[IndependenceOracle, PatternSet], c: str, e: str,
                    inclusive: bool = False) -> bool:
    """True iff some consistent model has ``c -> e`` and none has ``e -> c``.

    By default genuine causes are excluded; ``inclusive=True`` counts them.
    """
    v = cause_verdict(source, c, e)
    if v.tier == "potential":
        return True
    return inclusive and v.tier == "genuine"

