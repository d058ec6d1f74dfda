"""d-separation, separator search and inducing-path detection on dags.

Every query runs a reachability sweep over ``(node, direction)`` states in
time linear in the number of edges.  Inducing-path search reuses the same
traversal with the two inducing-path constraints applied at each interior
node.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from .exceptions import GraphError, NotObservableError, OverlapError
from .graph import Dag, iter_bits

__all__ = [
    "PathWitness",
    "d_separated",
    "d_connected_mask",
    "active_path",
    "separable",
    "separated_by_pair_ancestors",
    "separated_by_pair_parents",
    "find_inducing_path",
    "is_inducing_path",
    "separated_over_observables",
]


@dataclass(frozen=True)
class PathWitness:
    """A simple path ``nodes[0] ... nodes[-1]`` in a dag.

    ``forward[k]`` is True when the k-th step is the edge
    ``nodes[k] -> nodes[k+1]`` and False for ``nodes[k] <- nodes[k+1]``.
    """

    nodes: tuple[str, ...]
    forward: tuple[bool, ...]

    def __post_init__(self):
        if len(self.forward) != len(self.nodes) - 1:
            raise ValueError("forward must have one entry per step")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("path repeats a node")

    @property
    def into_start(self) -> bool:
        """The terminal edge at the first node carries an arrowhead into it."""
        return not self.forward[0]

    @property
    def into_end(self) -> bool:
        """The terminal edge at the last node carries an arrowhead into it."""
        return self.forward[-1]

    def colliders(self) -> tuple[str, ...]:
        return tuple(self.nodes[k] for k in range(1, len(self.nodes) - 1)
                     if self.forward[k - 1] and not self.forward[k])

    def __str__(self):
        out = [self.nodes[0]]
        for node, fwd in zip(self.nodes[1:], self.forward):
            out.append(" -> " if fwd else " <- ")
            out.append(node)
        return "".join(out)


def _query_masks(g: Dag, x, y, given):
    i, j = g.index(x), g.index(y)
    if i == j:
        raise GraphError("x and y must differ")
    z = g.mask(given)
    if z >> i & 1 or z >> j & 1:
        raise OverlapError("the conditioning set may not contain x or y")
    return i, j, z


def d_connected_mask(g: Dag, source: int, z: int) -> int:
    """Bitmask of nodes d-connected to node index ``source`` given mask ``z``.

    ``source`` itself is not included.  Colliders are active when they or one
    of their descendants lie in ``z``.
    """
    pa, ch = g._pa, g._ch
    active_colliders = z | g.ancestor_mask(z)
    # up: entered from a child (or the start); down: entered from a parent
    seen_up = seen_down = 0
    up, down = 1 << source, 0
    reach = 0
    while up or down:
        up &= ~seen_up
        down &= ~seen_down
        seen_up |= up
        seen_down |= down
        reach |= (up | down) & ~z
        nxt_up = nxt_down = 0
        for v in iter_bits(up & ~z):
            nxt_up |= pa[v]
            nxt_down |= ch[v]
        for v in iter_bits(down):
            if not z >> v & 1:
                nxt_down |= ch[v]
            if active_colliders >> v & 1:
                nxt_up |= pa[v]
        up, down = nxt_up, nxt_down
    return reach & ~(1 << source)


def d_separated(g: Dag, x: str, y: str, given: Iterable[str] = ()) -> bool:
    """True iff ``given`` d-separates ``x`` from ``y`` in ``g``.

    >>> chain = Dag(edges=[("a", "b"), ("b", "c")])
    >>> d_separated(chain, "a", "c", {"b"})
    True
    """
    i, j, z = _query_masks(g, x, y, given)
    return not d_connected_mask(g, i, z) >> j & 1


def active_path(g: Dag, x: str, y: str, given: Iterable[str] = ()) -> PathWitness | None:
    """Some simple path between ``x`` and ``y`` that is active given ``given``."""
    i, j, z = _query_masks(g, x, y, given)
    if not d_connected_mask(g, i, z) >> j & 1:
        return None
    active_colliders = z | g.ancestor_mask(z)
    pa, ch = g._pa, g._ch
    names = g.nodes

    def extend(path, fwd, visited):
        u = path[-1]
        if u == j:
            return path, fwd
        into_u = fwd[-1] if fwd else False
        for v in iter_bits((pa[u] | ch[u]) & ~visited):
            step_fwd = bool(ch[u] >> v & 1)
            if len(path) > 1:
                collider = into_u and not step_fwd
                if collider and not active_colliders >> u & 1:
                    continue
                if not collider and z >> u & 1:
                    continue
            found = extend(path + [v], fwd + [step_fwd], visited | 1 << v)
            if found:
                return found
        return None

    nodes, fwd = extend([i], [], 1 << i)
    return PathWitness(tuple(names[k] for k in nodes), tuple(fwd))


def _subsets(items, max_size=None):
    top = len(items) if max_size is None else min(max_size, len(items))
    for size in range(top + 1):
        yield from combinations(items, size)


def separable(g: Dag, a: str, b: str, candidates: Iterable[str] | None = None) -> frozenset[str] | None:
    """Smallest subset of ``candidates`` that d-separates ``a`` and ``b``.

    Subsets are tried by increasing size, then lexicographically in node
    order, so the first hit is returned.  ``candidates`` defaults to every
    other node.  Returns None when no subset separates; note that an empty
    separator is a valid (falsy) answer.
    """
    i, j = g.index(a), g.index(b)
    if i == j:
        raise GraphError("a and b must differ")
    if candidates is None:
        pool = [k for k in range(len(g)) if k not in (i, j)]
    else:
        cmask = g.mask(candidates)
        if cmask >> i & 1 or cmask >> j & 1:
            raise OverlapError("candidates may not contain a or b")
        pool = list(iter_bits(cmask))
    for subset in _subsets(pool):
        z = 0
        for k in subset:
            z |= 1 << k
        if not d_connected_mask(g, i, z) >> j & 1:
            return frozenset(g.names_of(z))
    return None


def separated_by_pair_ancestors(g: Dag, a: str, b: str) -> bool:
    return d_separated(g, a, b, g.pair_ancestor_set(a, b))


def separated_by_pair_parents(g: Dag, a: str, b: str) -> bool:
    return d_separated(g, a, b, g.pair_parent_set(a, b))


def _observable_pair(g, a, b):
    i, j = g.index(a), g.index(b)
    if i == j:
        raise GraphError("a and b must differ")
    for name, k in ((a, i), (b, j)):
        if g.latent_mask >> k & 1:
            raise NotObservableError(f"{name!r} is latent")
    return i, j


def separated_over_observables(g: Dag, a: str, b: str) -> bool:
    """Single test: does ``A_ab`` restricted to observables d-separate a and b?"""
    i, j = _observable_pair(g, a, b)
    z = (g._anc[i] | g._anc[j]) & g.observable_mask & ~(1 << i | 1 << j)
    return not d_connected_mask(g, i, z) >> j & 1


def is_inducing_path(g: Dag, path: PathWitness) -> bool:
    """Check both inducing-path conditions and that ``path`` is a real path."""
    idx = [g.index(v) for v in path.nodes]
    for (u, v), fwd in zip(zip(idx, idx[1:]), path.forward):
        if fwd and not g._ch[u] >> v & 1:
            return False
        if not fwd and not g._pa[u] >> v & 1:
            return False
    a, b = idx[0], idx[-1]
    ancestors = g._anc[a] | g._anc[b]
    for k in range(1, len(idx) - 1):
        collider = path.forward[k - 1] and not path.forward[k]
        if collider and not ancestors >> idx[k] & 1:
            return False
        if not collider and not g.latent_mask >> idx[k] & 1:
            return False
    return True


def find_inducing_path(g: Dag, a: str, b: str, *, into_b: bool | None = None) -> PathWitness | None:
    """Find an inducing path between observables ``a`` and ``b``.

    On the returned path every observable interior node is a collider and
    every collider is an ancestor of ``a`` or ``b``.  With ``into_b=True``
    only paths whose last edge points into ``b`` qualify.  Returns None when
    no such path exists.
    """
    if into_b not in (None, True):
        raise ValueError("into_b must be None or True")
    i, j = _observable_pair(g, a, b)
    pa, ch = g._pa, g._ch
    latent = g.latent_mask
    ancestors = g._anc[i] | g._anc[j]
    # state: (node, entered with an arrowhead at node)
    prev = {}
    frontier = []
    for v in iter_bits(pa[i] | ch[i]):
        state = (v, bool(ch[i] >> v & 1))
        if state not in prev:
            prev[state] = None
            frontier.append(state)
    goal = None
    while frontier:
        nxt = []
        for state in frontier:
            v, arrow_in = state
            if v == j:
                if into_b is None or arrow_in:
                    goal = state
                    break
                continue
            for w in iter_bits((pa[v] | ch[v]) & ~(1 << i)):
                arrow_at_v = bool(pa[v] >> w & 1)
                collider = arrow_in and arrow_at_v
                if collider:
                    if not ancestors >> v & 1:
                        continue
                elif not latent >> v & 1:
                    continue
                new = (w, bool(ch[v] >> w & 1))
                if new not in prev:
                    prev[new] = state
                    nxt.append(new)
        if goal is not None:
            break
        frontier = nxt
    if goal is None:
        return None
    walk = [goal]
    while prev[walk[-1]] is not None:
        walk.append(prev[walk[-1]])
    walk.reverse()
    nodes = [i] + [v for v, _ in walk]
    fwd = [arrow for _, arrow in walk]
    nodes, fwd = _shortcut(nodes, fwd)
    names = g.nodes
    return PathWitness(tuple(names[k] for k in nodes), tuple(fwd))


def _shortcut(nodes, fwd):
    # Splice out loops between the first and last visit of a node.  The
    # inducing conditions survive splicing, so the result is a simple path.
    while True:
        last = {}
        for pos, v in enumerate(nodes):
            last[v] = pos
        for pos, v in enumerate(nodes):
            if last[v] != pos:
                end = last[v]
                nodes = nodes[:pos] + nodes[end:]
                fwd = fwd[:pos] + fwd[end:]
                break
        else:
            return nodes, fwd
