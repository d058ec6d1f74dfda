"""Immutable graph containers: directed acyclic graphs with latent flags and
hybrid graphs whose links carry an endpoint mark at each end.

Nodes are string labels.  Every graph keeps its nodes in insertion order and
all iteration follows that order, so downstream algorithms are reproducible.
Internally node sets are bitmasks over the insertion index.
"""

from __future__ import annotations

import enum
import re
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple

from .exceptions import (
    CycleError,
    DuplicateEdgeError,
    GraphError,
    ParseError,
    SelfLoopError,
    UnknownNodeError,
)

__all__ = [
    "Node",
    "Dag",
    "Mark",
    "HybridGraph",
    "skeleton",
    "iter_bits",
    "parse_graph",
    "format_graph",
]

NAME_RE = re.compile(r"^[A-Za-z0-9_]+$")


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _check_name(name):
    if not isinstance(name, str) or not NAME_RE.match(name):
        raise GraphError(f"invalid node name {name!r}; names must match [A-Za-z0-9_]+")


class Node(NamedTuple):
    name: str
    index: int
    latent: bool = False


class _NodeIndex:
    """Ordered label <-> index bookkeeping shared by both graph types."""

    def __init__(self, names):
        self._names = tuple(names)
        self._index = {}
        for i, name in enumerate(self._names):
            _check_name(name)
            if name in self._index:
                raise GraphError(f"duplicate node {name!r}")
            self._index[name] = i

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._names

    def __len__(self):
        return len(self._names)

    def __contains__(self, name):
        return name in self._index

    def __iter__(self):
        return iter(self._names)

    def index(self, name) -> int:
        try:
            return self._index[name]
        except (KeyError, TypeError):
            raise UnknownNodeError(f"unknown node {name!r}") from None

    def mask(self, names: Iterable[str]) -> int:
        m = 0
        for name in names:
            m |= 1 << self.index(name)
        return m

    def names_of(self, mask: int) -> tuple[str, ...]:
        return tuple(self._names[i] for i in iter_bits(mask))

    def ordered(self, names: Iterable[str]) -> tuple[str, ...]:
        """Return ``names`` sorted by insertion order."""
        return self.names_of(self.mask(names))


class Dag(_NodeIndex):
    """A directed acyclic graph whose nodes are flagged observable or latent.

    Parameters
    ----------
    nodes:
        Node labels in insertion order.  Labels mentioned only in ``edges`` or
        ``latent`` are appended in order of first appearance.
    edges:
        Pairs ``(parent, child)``.
    latent:
        Labels of the unobservable nodes.  Empty for a simple causal model.

    Examples
    --------
    >>> g = Dag(edges=[("a", "b"), ("b", "c")])
    >>> sorted(g.ancestors("c"))
    ['a', 'b']
    """

    def __init__(self, nodes: Iterable[str] = (), edges: Iterable[tuple[str, str]] = (),
                 latent: Iterable[str] = ()):
        names = list(nodes)
        seen = set(names)
        edges = [tuple(e) for e in edges]
        latent = list(latent)
        for e in edges:
            if len(e) != 2:
                raise GraphError(f"edge {e!r} is not a (parent, child) pair")
            for name in e:
                if name not in seen:
                    seen.add(name)
                    names.append(name)
        for name in latent:
            if name not in seen:
                seen.add(name)
                names.append(name)
        super().__init__(names)
        n = len(self._names)
        pa = [0] * n
        ch = [0] * n
        for p, c in edges:
            i, j = self.index(p), self.index(c)
            if i == j:
                raise SelfLoopError(f"self-loop on {p!r}")
            if pa[j] >> i & 1:
                raise DuplicateEdgeError(f"duplicate edge {p} -> {c}")
            pa[j] |= 1 << i
            ch[i] |= 1 << j
        self._pa = tuple(pa)
        self._ch = tuple(ch)
        self._latent = self.mask(latent)
        self._order = self._toposort()

    def _toposort(self):
        n = len(self._names)
        indeg = [bin(m).count("1") for m in self._pa]
        ready = [i for i in range(n) if indeg[i] == 0]
        order = []
        while ready:
            ready.sort()
            i = ready.pop(0)
            order.append(i)
            for j in iter_bits(self._ch[i]):
                indeg[j] -= 1
                if indeg[j] == 0:
                    ready.append(j)
        if len(order) < n:
            raise CycleError(self._names_on_cycle(set(range(n)) - set(order)))
        return tuple(order)

    def _names_on_cycle(self, remaining):
        # walk parents inside the unsorted remainder until a node repeats
        start = min(remaining)
        path = [start]
        pos = {start: 0}
        while True:
            nxt = next(i for i in iter_bits(self._pa[path[-1]]) if i in remaining)
            if nxt in pos:
                cyc = path[pos[nxt]:]
                cyc.reverse()
                return [self._names[i] for i in cyc + [cyc[0]]]
            pos[nxt] = len(path)
            path.append(nxt)

    # --- construction -------------------------------------------------

    def add_edge(self, parent: str, child: str) -> "Dag":
        """Return a new dag with ``parent -> child`` added.

        Raises CycleError, DuplicateEdgeError, SelfLoopError or UnknownNodeError.
        """
        i, j = self.index(parent), self.index(child)
        if i == j:
            raise SelfLoopError(f"self-loop on {parent!r}")
        if self._pa[j] >> i & 1:
            raise DuplicateEdgeError(f"duplicate edge {parent} -> {child}")
        if self._anc[i] >> j & 1:
            path = self._directed_path(j, i)
            raise CycleError([self._names[k] for k in path] + [child])
        return Dag(self._names, list(self.edges) + [(parent, child)], self.latents)

    def _directed_path(self, src, dst):
        prev = {src: None}
        stack = [src]
        while stack:
            u = stack.pop()
            if u == dst:
                break
            for v in iter_bits(self._ch[u]):
                if v not in prev:
                    prev[v] = u
                    stack.append(v)
        path = [dst]
        while prev[path[-1]] is not None:
            path.append(prev[path[-1]])
        return path[::-1]

    def with_latent(self, latent: Iterable[str]) -> "Dag":
        """Return the same structure with a different latent set."""
        return Dag(self._names, self.edges, latent)

    def subgraph_without_edge(self, parent: str, child: str) -> "Dag":
        edges = [e for e in self.edges if e != (parent, child)]
        if len(edges) == len(self.edges):
            raise GraphError(f"no edge {parent} -> {child}")
        return Dag(self._names, edges, self.latents)

    # --- basic structure ----------------------------------------------

    @cached_property
    def edges(self) -> tuple[tuple[str, str], ...]:
        """Directed edges, ordered by parent then child insertion index."""
        names = self._names
        return tuple((names[i], names[j]) for i in range(len(names)) for j in iter_bits(self._ch[i]))

    @property
    def latents(self) -> tuple[str, ...]:
        return self.names_of(self._latent)

    @property
    def observables(self) -> tuple[str, ...]:
        return self.names_of(self.observable_mask)

    @property
    def latent_mask(self) -> int:
        return self._latent

    @property
    def observable_mask(self) -> int:
        return ((1 << len(self._names)) - 1) & ~self._latent

    def is_latent(self, name: str) -> bool:
        return bool(self._latent >> self.index(name) & 1)

    def node(self, name: str) -> Node:
        i = self.index(name)
        return Node(name, i, bool(self._latent >> i & 1))

    def has_edge(self, parent: str, child: str) -> bool:
        return bool(self._pa[self.index(child)] >> self.index(parent) & 1)

    def adjacent(self, a: str, b: str) -> bool:
        i, j = self.index(a), self.index(b)
        return bool((self._pa[i] | self._ch[i]) >> j & 1)

    def parents(self, x: str) -> frozenset[str]:
        return frozenset(self.names_of(self._pa[self.index(x)]))

    def children(self, x: str) -> frozenset[str]:
        return frozenset(self.names_of(self._ch[self.index(x)]))

    def topological_order(self) -> tuple[str, ...]:
        """Topological order; ties broken by insertion index."""
        return tuple(self._names[i] for i in self._order)

    # --- closures -------------------------------------------------------

    @cached_property
    def _anc(self) -> tuple[int, ...]:
        anc = [0] * len(self._names)
        for i in self._order:
            m = self._pa[i]
            for p in iter_bits(self._pa[i]):
                m |= anc[p]
            anc[i] = m
        return tuple(anc)

    @cached_property
    def _desc(self) -> tuple[int, ...]:
        desc = [0] * len(self._names)
        for i in reversed(self._order):
            m = self._ch[i]
            for c in iter_bits(self._ch[i]):
                m |= desc[c]
            desc[i] = m
        return tuple(desc)

    def ancestor_mask(self, mask: int) -> int:
        """Union of strict ancestors of the nodes in ``mask``."""
        out = 0
        for i in iter_bits(mask):
            out |= self._anc[i]
        return out

    def ancestors(self, x: str) -> frozenset[str]:
        """All nodes with a directed path to ``x`` (``x`` excluded)."""
        return frozenset(self.names_of(self._anc[self.index(x)]))

    def descendants(self, x: str) -> frozenset[str]:
        return frozenset(self.names_of(self._desc[self.index(x)]))

    def pair_ancestor_set(self, a: str, b: str) -> frozenset[str]:
        """``ancestors(a) | ancestors(b)`` with ``a`` and ``b`` removed."""
        i, j = self._pair(a, b)
        return frozenset(self.names_of((self._anc[i] | self._anc[j]) & ~(1 << i | 1 << j)))

    def pair_parent_set(self, a: str, b: str) -> frozenset[str]:
        i, j = self._pair(a, b)
        return frozenset(self.names_of((self._pa[i] | self._pa[j]) & ~(1 << i | 1 << j)))

    def _pair(self, a, b):
        i, j = self.index(a), self.index(b)
        if i == j:
            raise GraphError("pair must consist of two distinct nodes")
        return i, j

    def skeleton(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset(e) for e in self.edges)

    # --- dunder -----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return (set(self._names) == set(other._names)
                and set(self.edges) == set(other.edges)
                and set(self.latents) == set(other.latents))

    def __hash__(self):
        return hash((frozenset(self._names), frozenset(self.edges), frozenset(self.latents)))

    def __repr__(self):
        parts = [f"{p}->{c}" for p, c in self.edges]
        lat = f", latent={list(self.latents)}" if self._latent else ""
        return f"Dag(nodes={list(self._names)}, edges=[{', '.join(parts)}]{lat})"


class Mark(enum.Enum):
    TAIL = "tail"
    ARROW = "arrow"


_TOKENS = {
    (Mark.TAIL, Mark.TAIL): "--",
    (Mark.TAIL, Mark.ARROW): "->",
    (Mark.ARROW, Mark.TAIL): "<-",
    (Mark.ARROW, Mark.ARROW): "<->",
}


class HybridGraph(_NodeIndex):
    """Graph whose links carry a mark at each endpoint.

    The four mark combinations encode ``a -- b``, ``a -> b``, ``a <- b`` and
    ``a <-> b``.  At most one link joins a pair of nodes.

    Parameters
    ----------
    nodes:
        Node labels in insertion order (labels used by ``edges`` are appended).
    edges:
        Tuples ``(u, v, mark_at_u, mark_at_v)``.
    """

    def __init__(self, nodes: Iterable[str] = (), edges: Iterable[tuple] = ()):
        names = list(nodes)
        seen = set(names)
        edges = list(edges)
        for e in edges:
            for name in e[:2]:
                if name not in seen:
                    seen.add(name)
                    names.append(name)
        super().__init__(names)
        marks = {}
        for u, v, mu, mv in edges:
            i, j = self.index(u), self.index(v)
            if i == j:
                raise SelfLoopError(f"self-loop on {u!r}")
            key = (i, j) if i < j else (j, i)
            if key in marks:
                raise DuplicateEdgeError(f"more than one link between {u} and {v}")
            mu, mv = Mark(mu), Mark(mv)
            marks[key] = (mu, mv) if i < j else (mv, mu)
        self._marks = marks
        adj = [0] * len(self._names)
        for i, j in marks:
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        self._adj = tuple(adj)

    @classmethod
    def from_links(cls, nodes=(), undirected=(), directed=(), bidirected=()):
        """Build from typed link lists; ``directed`` holds (tail, head) pairs."""
        edges = [(u, v, Mark.TAIL, Mark.TAIL) for u, v in undirected]
        edges += [(u, v, Mark.TAIL, Mark.ARROW) for u, v in directed]
        edges += [(u, v, Mark.ARROW, Mark.ARROW) for u, v in bidirected]
        return cls(nodes, edges)

    @classmethod
    def from_dag(cls, g: Dag) -> "HybridGraph":
        if g.latent_mask:
            raise GraphError("only latent-free dags convert directly to hybrid graphs")
        return cls(g.nodes, [(p, c, Mark.TAIL, Mark.ARROW) for p, c in g.edges])

    def _key(self, u, v):
        i, j = self.index(u), self.index(v)
        return (i, j, False) if i < j else (j, i, True)

    def adjacent(self, u: str, v: str) -> bool:
        return bool(self._adj[self.index(u)] >> self.index(v) & 1)

    def adjacency_mask(self, u: str) -> int:
        return self._adj[self.index(u)]

    def neighbors(self, u: str) -> tuple[str, ...]:
        return self.names_of(self._adj[self.index(u)])

    def endpoint(self, u: str, v: str) -> Mark:
        """The mark at ``v`` on the link ``u``-``v``."""
        i, j, swapped = self._key(u, v)
        try:
            m = self._marks[(i, j)]
        except KeyError:
            raise GraphError(f"{u} and {v} are not adjacent") from None
        return m[0] if swapped else m[1]

    def has_arrow_at(self, u: str, v: str) -> bool:
        """True for ``u -> v`` and ``u <-> v``."""
        return self.adjacent(u, v) and self.endpoint(u, v) is Mark.ARROW

    def is_directed(self, u: str, v: str) -> bool:
        """True exactly for the singly directed link ``u -> v``."""
        return (self.adjacent(u, v) and self.endpoint(u, v) is Mark.ARROW
                and self.endpoint(v, u) is Mark.TAIL)

    def is_undirected(self, u: str, v: str) -> bool:
        return (self.adjacent(u, v) and self.endpoint(u, v) is Mark.TAIL
                and self.endpoint(v, u) is Mark.TAIL)

    def is_bidirected(self, u: str, v: str) -> bool:
        return (self.adjacent(u, v) and self.endpoint(u, v) is Mark.ARROW
                and self.endpoint(v, u) is Mark.ARROW)

    def link(self, u: str, v: str) -> str | None:
        """Token for the link read from ``u`` to ``v`` (``'->'`` etc.), or None."""
        if not self.adjacent(u, v):
            return None
        return _TOKENS[(self.endpoint(v, u), self.endpoint(u, v))]

    def edges(self) -> list[tuple[str, str, Mark, Mark]]:
        """Links as ``(u, v, mark_at_u, mark_at_v)`` with ``u`` first in node order."""
        names = self._names
        return [(names[i], names[j], mu, mv) for (i, j), (mu, mv) in sorted(self._marks.items())]

    @property
    def num_edges(self) -> int:
        return len(self._marks)

    @property
    def has_bidirected(self) -> bool:
        return any(m == (Mark.ARROW, Mark.ARROW) for m in self._marks.values())

    @property
    def num_arrowheads(self) -> int:
        return sum((mu is Mark.ARROW) + (mv is Mark.ARROW) for mu, mv in self._marks.values())

    def arrowheads(self) -> frozenset[tuple[str, str]]:
        """Set of ``(u, v)`` such that the link ``u``-``v`` has an arrowhead at ``v``."""
        out = set()
        for u, v, mu, mv in self.edges():
            if mu is Mark.ARROW:
                out.add((v, u))
            if mv is Mark.ARROW:
                out.add((u, v))
        return frozenset(out)

    def with_arrowheads(self, heads: Iterable[tuple[str, str]]) -> "HybridGraph":
        """Return a copy with an arrowhead added at ``v`` for each ``(u, v)``."""
        marks = dict(self._marks)
        for u, v in heads:
            i, j, swapped = self._key(u, v)
            if (i, j) not in marks:
                raise GraphError(f"{u} and {v} are not adjacent")
            mi, mj = marks[(i, j)]
            if swapped:
                mi = Mark.ARROW
            else:
                mj = Mark.ARROW
            marks[(i, j)] = (mi, mj)
        return self._rebuild(marks)

    def _rebuild(self, marks):
        names = self._names
        return HybridGraph(names, [(names[i], names[j], mi, mj) for (i, j), (mi, mj) in marks.items()])

    def skeleton(self) -> frozenset[frozenset[str]]:
        names = self._names
        return frozenset(frozenset((names[i], names[j])) for i, j in self._marks)

    def undirected_copy(self) -> "HybridGraph":
        return HybridGraph(self._names, [(u, v, Mark.TAIL, Mark.TAIL) for u, v, _, _ in self.edges()])

    def as_hybrid(self) -> "HybridGraph":
        """Plain HybridGraph view, dropping any subclass metadata."""
        return HybridGraph(self._names, self.edges())

    def _canonical(self):
        out = set()
        for u, v, mu, mv in self.edges():
            if u > v:
                u, v, mu, mv = v, u, mv, mu
            out.add((u, v, mu, mv))
        return frozenset(out)

    def __eq__(self, other):
        if not isinstance(other, HybridGraph):
            return NotImplemented
        return set(self._names) == set(other._names) and self._canonical() == other._canonical()

    def __hash__(self):
        return hash((frozenset(self._names), self._canonical()))

    def __repr__(self):
        body = ", ".join(f"{v}->{u}" if (mu, mv) == (Mark.ARROW, Mark.TAIL) else f"{u}{_TOKENS[(mu, mv)]}{v}"
                         for u, v, mu, mv in self.edges())
        return f"{type(self).__name__}([{body}])"


def skeleton(g: Dag | HybridGraph) -> frozenset[frozenset[str]]:
    """Unordered adjacent pairs of ``g`` with all marks erased."""
    return g.skeleton()


# --- text edge-list format ------------------------------------------------

_LINE_RE = re.compile(r"^(\S+)\s*(<->|->|--)\s*(\S+)$")


def parse_graph(text: str, kind: str | None = None) -> Dag | HybridGraph:
    """Parse the edge-list text format.

    One item per line; ``#`` starts a comment.  A line is a bare node name, a
    ``latent NAME`` declaration, or a link ``a -> b``, ``a -- b`` or
    ``a <-> b``.  The graph kind is hybrid if any ``--`` or ``<->`` link
    appears, unless ``kind`` ("dag" or "hybrid") forces it.
    """
    if kind not in (None, "dag", "hybrid"):
        raise ValueError(f"unknown graph kind {kind!r}")
    nodes, latent, links = [], [], []
    seen = set()

    def declare(name, lineno):
        if not NAME_RE.match(name):
            raise ParseError(f"invalid node name {name!r}", lineno)
        if name not in seen:
            seen.add(name)
            nodes.append(name)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "latent":
            if len(words) != 2:
                raise ParseError(f"malformed latent declaration {line!r}", lineno)
            declare(words[1], lineno)
            latent.append((words[1], lineno))
            continue
        m = _LINE_RE.match(line)
        if m is None:
            if len(words) == 1:
                declare(words[0], lineno)
                continue
            raise ParseError(f"cannot parse {line!r}", lineno)
        u, tok, v = m.groups()
        declare(u, lineno)
        declare(v, lineno)
        links.append((u, tok, v, lineno))

    hybrid = any(tok != "->" for _, tok, _, _ in links)
    if kind == "dag" and hybrid:
        bad = next(ln for _, tok, _, ln in links if tok != "->")
        raise ParseError("undirected or bidirected link in a dag file", bad)
    if kind == "hybrid":
        hybrid = True

    if hybrid:
        if latent:
            raise ParseError("latent declarations are only valid in dag files", latent[0][1])
        kinds = {"->": (Mark.TAIL, Mark.ARROW), "--": (Mark.TAIL, Mark.TAIL),
                 "<->": (Mark.ARROW, Mark.ARROW)}
        pairs = {}
        for u, tok, v, lineno in links:
            if u == v:
                raise ParseError(f"self-loop on {u!r}", lineno)
            key = frozenset((u, v))
            if key in pairs:
                raise ParseError(f"second link between {u} and {v}", lineno)
            pairs[key] = (u, v) + kinds[tok]
        return HybridGraph(nodes, pairs.values())

    dag = Dag(nodes, latent=[name for name, _ in latent])
    for u, _, v, lineno in links:
        try:
            dag = dag.add_edge(u, v)
        except GraphError as exc:
            # re-raise with the offending line attached
            if isinstance(exc, CycleError):
                err = CycleError(exc.cycle)
                err.line = lineno
                err.args = (f"line {lineno}: {exc}",)
                raise err from None
            raise ParseError(str(exc), lineno) from None
    return dag


def format_graph(g: Dag | HybridGraph) -> str:
    """Render ``g`` in the edge-list format accepted by :func:`parse_graph`.

    Link lines are sorted by their text so that equal graphs render alike.
    """
    lines = []
    if isinstance(g, Dag):
        touched = set()
        for p, c in g.edges:
            touched.update((p, c))
        for name in g.latents:
            lines.append(f"latent {name}")
        for name in g.nodes:
            if name not in touched and not g.is_latent(name):
                lines.append(name)
        lines += sorted(f"{p} -> {c}" for p, c in g.edges)
    else:
        touched = set()
        for u, v, _, _ in g.edges():
            touched.update((u, v))
        lines += [name for name in g.nodes if name not in touched]
        links = []
        for u, v, mu, mv in g.edges():
            if (mu, mv) == (Mark.ARROW, Mark.TAIL):
                links.append(f"{v} -> {u}")
            elif (mu, mv) == (Mark.TAIL, Mark.ARROW):
                links.append(f"{u} -> {v}")
            else:
                u, v = sorted((u, v))
                links.append(f"{u} {_TOKENS[(mu, mv)]} {v}")
        lines += sorted(links)
    return "\n".join(lines) + ("\n" if lines else "")
