"""Recovering patterns from independence information.

Step 1 links every pair that no conditioning set separates, step 2 puts
arrowheads at the middle of non-adjacent pairs whose separator stops working
once the common neighbour is added, and step 3 optionally completes the
result.  Arrowheads accumulate, so a link can end up bidirected when the
oracle comes from a model with hidden variables.
"""

from __future__ import annotations

import itertools
import threading
from abc import ABC, abstractmethod
from collections.abc import Mapping
from typing import Iterable

import networkx as nx

from .exceptions import BidirectedDetectedError, OverlapError, UnknownVariableError
from .graph import Dag, HybridGraph, Mark
from .patterns import COMPLETED, RUDIMENTARY, Pattern, orient_fixpoint
from .separation import d_connected_mask

__all__ = [
    "IndependenceOracle",
    "GraphicalOracle",
    "CountingOracle",
    "SeparatorTable",
    "graphical_oracle",
    "recover",
    "markov_net",
    "recover_latent_free",
]


class IndependenceOracle(ABC):
    """Answers ``holds(a, S, b)``: is ``a`` independent of ``b`` given ``S``?

    Implementations must be symmetric in ``a`` and ``b`` and deterministic.
    """

    @property
    @abstractmethod
    def variables(self) -> tuple[str, ...]:
        ...

    @abstractmethod
    def _holds(self, a: str, given: frozenset[str], b: str) -> bool:
        ...

    def holds(self, a: str, given: Iterable[str], b: str) -> bool:
        given = frozenset(given)
        known = set(self.variables)
        for v in (a, b, *given):
            if v not in known:
                raise UnknownVariableError(f"unknown variable {v!r}")
        if a == b:
            raise ValueError("a and b must differ")
        if a in given or b in given:
            raise OverlapError("the conditioning set may not contain a or b")
        return self._holds(a, given, b)


class GraphicalOracle(IndependenceOracle):
    """d-separation in a dag, queried over its observable nodes only."""

    def __init__(self, g: Dag):
        self.graph = g
        self._vars = g.observables
        self._cache = {}
        self._lock = threading.Lock()

    @property
    def variables(self):
        return self._vars

    def _holds(self, a, given, b):
        g = self.graph
        i, z = g.index(a), g.mask(given)
        key = (i, z)
        with self._lock:
            reach = self._cache.get(key)
        if reach is None:
            reach = d_connected_mask(g, i, z)
            with self._lock:
                self._cache[key] = reach
        return not reach >> g.index(b) & 1


def graphical_oracle(g: Dag) -> GraphicalOracle:
    return GraphicalOracle(g)


class CountingOracle(IndependenceOracle):
    """Wraps an oracle and counts the queries passed through it."""

    def __init__(self, inner: IndependenceOracle):
        self.inner = inner
        self.count = 0
        self._lock = threading.Lock()

    @property
    def variables(self):
        return self.inner.variables

    def _holds(self, a, given, b):
        with self._lock:
            self.count += 1
        return self.inner.holds(a, given, b)


class SeparatorTable(Mapping):
    """Separator found for each unordered pair, or None for linked pairs."""

    def __init__(self, entries=()):
        self._map = {frozenset(k): (None if v is None else frozenset(v)) for k, v in dict(entries).items()}

    def __getitem__(self, pair):
        return self._map[frozenset(pair)]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __repr__(self):
        items = ", ".join(f"{'-'.join(sorted(k))}: {None if v is None else sorted(v)}"
                          for k, v in self._map.items())
        return f"SeparatorTable({{{items}}})"


def _ordered_subsets(pool, order):
    pool = sorted(pool, key=order.__getitem__)
    for size in range(len(pool) + 1):
        yield from itertools.combinations(pool, size)


def _search_separator(o, a, b, candidates):
    for subset in candidates:
        if o.holds(a, subset, b):
            return frozenset(subset)
    return None


def _orient_colliders(o, variables, adj, seps):
    heads = set()
    for a, b in itertools.combinations(variables, 2):
        if b in adj[a]:
            continue
        sep = seps[frozenset((a, b))]
        for c in variables:
            if c in adj[a] and c in adj[b]:
                if not o.holds(a, sep | {c}, b):
                    heads.add((a, c))
                    heads.add((b, c))
    return heads


def _build(variables, adj, heads):
    edges = []
    for a, b in itertools.combinations(variables, 2):
        if b in adj[a]:
            edges.append((a, b,
                          Mark.ARROW if (b, a) in heads else Mark.TAIL,
                          Mark.ARROW if (a, b) in heads else Mark.TAIL))
    return HybridGraph(variables, edges)


def recover(o: IndependenceOracle, complete: bool = False,
            stats: dict | None = None) -> tuple[HybridGraph, SeparatorTable]:
    """Run the three-step recovery algorithm against ``o``.

    Separators are searched among subsets of the remaining variables by
    increasing size, then lexicographically in variable order; the first hit
    is stored and reused in step 2.  If ``stats`` is a dict it receives the
    number of oracle queries issued by each step.
    """
    counter = CountingOracle(o)
    o = counter
    variables = tuple(o.variables)
    order = {v: k for k, v in enumerate(variables)}
    adj = {v: set() for v in variables}
    seps = {}
    for a, b in itertools.combinations(variables, 2):
        rest = [v for v in variables if v not in (a, b)]
        sep = _search_separator(o, a, b, _ordered_subsets(rest, order))
        seps[frozenset((a, b))] = sep
        if sep is None:
            adj[a].add(b)
            adj[b].add(a)
    step1 = counter.count
    heads = _orient_colliders(o, variables, adj, seps)
    if stats is not None:
        stats.update(step1=step1, step2=counter.count - step1)
    h = _build(variables, adj, heads)
    if complete:
        h = orient_fixpoint(h, base_heads=heads)
    return h, SeparatorTable(seps)


def markov_net(o: IndependenceOracle) -> nx.Graph:
    """Undirected graph linking pairs dependent given all other variables."""
    variables = tuple(o.variables)
    net = nx.Graph()
    net.add_nodes_from(variables)
    for a, b in itertools.combinations(variables, 2):
        rest = [v for v in variables if v not in (a, b)]
        if not o.holds(a, rest, b):
            net.add_edge(a, b)
    return net


def _clique_candidates(cliques_of, a, b, order):
    seen = set()
    subsets = []
    for v in (a, b):
        for clique in cliques_of[v]:
            pool = [u for u in clique if u not in (a, b)]
            for size in range(len(pool) + 1):
                for s in itertools.combinations(pool, size):
                    key = frozenset(s)
                    if key not in seen:
                        seen.add(key)
                        subsets.append(key)
    subsets.sort(key=lambda s: (len(s), sorted(order[u] for u in s)))
    return [tuple(sorted(s, key=order.__getitem__)) for s in subsets]


def recover_latent_free(o: IndependenceOracle, complete: bool = False,
                        stats: dict | None = None) -> tuple[Pattern, SeparatorTable]:
    """Recovery for oracles promised to come from a dag without latents.

    Separator candidates are limited to subsets of Markov-network cliques
    that contain ``a`` or ``b``.  Raises BidirectedDetectedError when step 2
    places arrowheads at both ends of a link, which breaks the promise.
    """
    counter = CountingOracle(o)
    o = counter
    variables = tuple(o.variables)
    order = {v: k for k, v in enumerate(variables)}
    net = markov_net(o)
    n_markov = counter.count
    cliques_of = {v: [] for v in variables}
    for clique in nx.find_cliques(net):
        clique = sorted(clique, key=order.__getitem__)
        for v in clique:
            cliques_of[v].append(clique)
    for v in variables:
        cliques_of[v].sort(key=lambda c: [order[u] for u in c])
    adj = {v: set() for v in variables}
    seps = {}
    for a, b in itertools.combinations(variables, 2):
        sep = _search_separator(o, a, b, _clique_candidates(cliques_of, a, b, order))
        seps[frozenset((a, b))] = sep
        if sep is None:
            adj[a].add(b)
            adj[b].add(a)
    step1 = counter.count - n_markov
    heads = _orient_colliders(o, variables, adj, seps)
    if stats is not None:
        stats.update(markov=n_markov, step1=step1, step2=counter.count - n_markov - step1,
                     max_clique=max((len(c) for cs in cliques_of.values() for c in cs), default=0))
    for a, c in heads:
        if (c, a) in heads:
            raise BidirectedDetectedError(
                f"link {a} <-> {c} recovered; the oracle is not latent-free dag-isomorphic")
    h = _build(variables, adj, heads)
    stage = RUDIMENTARY
    if complete:
        h = orient_fixpoint(h, base_heads=heads)
        stage = COMPLETED
    return Pattern.from_hybrid(h, stage), SeparatorTable(seps)
