"""Patterns of latent-free causal models.

Two dags are equivalent exactly when they share their links and their
uncoupled head-to-head nodes, so the partially directed graph that keeps only
those arrowheads (the rudimentary pattern) names the equivalence class.
Completion then directs every link whose orientation is forced.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

from .exceptions import (
    GraphError,
    InconsistentPatternError,
    NodeSetMismatchError,
    SizeBoundError,
)
from .graph import Dag, HybridGraph, Mark, iter_bits

__all__ = [
    "Vee",
    "Pattern",
    "uncoupled_colliders",
    "equivalent",
    "rudimentary_pattern",
    "complete_pattern",
    "orient_fixpoint",
    "enumerate_class",
]

RUDIMENTARY = "rudimentary"
COMPLETED = "completed"


class Vee(NamedTuple):
    """Uncoupled head-to-head node ``a -> collider <- b``; ``a`` precedes ``b``."""

    a: str
    collider: str
    b: str


class Pattern(HybridGraph):
    """Partially directed graph with only ``--`` and ``->`` links."""

    def __init__(self, nodes=(), edges=(), stage=RUDIMENTARY):
        super().__init__(nodes, edges)
        if self.has_bidirected:
            raise GraphError("a pattern of a latent-free model has no bidirected links")
        if stage not in (RUDIMENTARY, COMPLETED):
            raise ValueError(f"unknown stage {stage!r}")
        self.stage = stage

    @classmethod
    def from_hybrid(cls, h: HybridGraph, stage=RUDIMENTARY) -> "Pattern":
        return cls(h.nodes, h.edges(), stage)


def _require_latent_free(g: Dag):
    if g.latent_mask:
        raise GraphError("operation requires a latent-free dag")


def uncoupled_colliders(g: Dag) -> frozenset[Vee]:
    """All ``a -> c <- b`` with ``a`` and ``b`` non-adjacent."""
    pa, ch = g._pa, g._ch
    names = g.nodes
    out = set()
    for c in range(len(names)):
        parents = list(iter_bits(pa[c]))
        for x, i in enumerate(parents):
            for j in parents[x + 1:]:
                if not (pa[i] | ch[i]) >> j & 1:
                    out.add(Vee(names[i], names[c], names[j]))
    return frozenset(out)


def equivalent(d1: Dag, d2: Dag) -> bool:
    """Same links and same uncoupled head-to-head nodes."""
    if set(d1.nodes) != set(d2.nodes):
        raise NodeSetMismatchError("dags are defined over different node sets")
    _require_latent_free(d1)
    _require_latent_free(d2)
    return d1.skeleton() == d2.skeleton() and _vee_keys(d1) == _vee_keys(d2)


def _vee_keys(g):
    return {(frozenset((v.a, v.b)), v.collider) for v in uncoupled_colliders(g)}


def rudimentary_pattern(g: Dag) -> Pattern:
    """Skeleton of ``g`` keeping arrowheads only on uncoupled head-to-head links."""
    _require_latent_free(g)
    kept = set()
    for v in uncoupled_colliders(g):
        kept.add((v.a, v.collider))
        kept.add((v.b, v.collider))
    edges = []
    for p, c in g.edges:
        edges.append((p, c, Mark.TAIL, Mark.ARROW if (p, c) in kept else Mark.TAIL))
    return Pattern(g.nodes, edges, RUDIMENTARY)


# --- orientation propagation ------------------------------------------


def orient_fixpoint(h: HybridGraph, base_heads: Iterable[tuple[str, str]] | None = None) -> HybridGraph:
    """Direct every undirected link whose orientation the rules force.

    Rules, applied until nothing changes (``*->`` is any link with an
    arrowhead at its right end, ``->`` a singly directed link):

    1. ``z *-> x -- y`` with z, y non-adjacent gives ``x -> y``.
    2. ``x -- y`` with a singly directed path ``x -> ... -> y`` gives ``x -> y``.
    3. ``x -- y`` with ``x -- z``, ``x -- w``, ``z *-> y <-* w`` and z, w
       non-adjacent gives ``x -> y``.

    ``base_heads`` are the arrowheads allowed to take part in an uncoupled
    head-to-head node (default: those already in ``h``).  Raises
    InconsistentPatternError if a link is forced both ways, the result holds
    a directed cycle, or it holds an uncoupled head-to-head node not built
    from ``base_heads``.
    """
    names = h.nodes
    n = len(names)
    adj = [h.adjacency_mask(v) for v in names]
    # head[u] = mask of v such that the link u-v has an arrowhead at u
    head = [0] * n
    for u, v, mu, mv in h.edges():
        i, j = h.index(u), h.index(v)
        if mu is Mark.ARROW:
            head[i] |= 1 << j
        if mv is Mark.ARROW:
            head[j] |= 1 << i
    base = [0] * n
    if base_heads is None:
        base = list(head)
    else:
        for u, v in base_heads:
            base[h.index(v)] |= 1 << h.index(u)

    def undirected(i):
        return adj[i] & ~head[i] & ~_heads_at_others(i)

    def _heads_at_others(i):
        m = 0
        for j in iter_bits(adj[i]):
            if head[j] >> i & 1:
                m |= 1 << j
        return m

    def strict_children(i):
        # j with i -> j singly directed
        m = 0
        for j in iter_bits(adj[i] & ~head[i]):
            if head[j] >> i & 1:
                m |= 1 << j
        return m

    changed = True
    while changed:
        changed = False
        demands = {}
        schild = [strict_children(i) for i in range(n)]
        for x in range(n):
            und = undirected(x)
            if not und:
                continue
            # vertices reachable from x along singly directed links
            reach, frontier = 0, schild[x]
            while frontier:
                reach |= frontier
                nxt = 0
                for k in iter_bits(frontier):
                    nxt |= schild[k]
                frontier = nxt & ~reach
            for y in iter_bits(und):
                forced = False
                # rule 1
                if head[x] & ~adj[y] & ~(1 << y):
                    forced = True
                # rule 2
                elif reach >> y & 1:
                    forced = True
                # rule 3
                else:
                    cand = und & head[y] & ~(1 << y)
                    cl = list(iter_bits(cand))
                    for p, z in enumerate(cl):
                        if any(not adj[z] >> w & 1 for w in cl[p + 1:]):
                            forced = True
                            break
                if forced:
                    key = (min(x, y), max(x, y))
                    demands.setdefault(key, set()).add((x, y))
        for key, dirs in demands.items():
            if len(dirs) > 1:
                a, b = key
                raise InconsistentPatternError(
                    f"link {names[a]} -- {names[b]} is forced in both directions")
            (x, y), = dirs
            head[y] |= 1 << x
            changed = True

    out = HybridGraph(names, [
        (u, v,
         Mark.ARROW if head[h.index(u)] >> h.index(v) & 1 else Mark.TAIL,
         Mark.ARROW if head[h.index(v)] >> h.index(u) & 1 else Mark.TAIL)
        for u, v, _, _ in h.edges()
    ])
    _check_consistent(out, head, base, adj)
    return out


def _check_consistent(out, head, base, adj):
    names = out.nodes
    n = len(names)
    for x in range(n):
        hs = list(iter_bits(head[x]))
        for p, z in enumerate(hs):
            for w in hs[p + 1:]:
                if adj[z] >> w & 1:
                    continue
                if not (base[x] >> z & 1 and base[x] >> w & 1):
                    raise InconsistentPatternError(
                        f"new uncoupled head-to-head node {names[z]} -> {names[x]} <- {names[w]}")
    # strictly directed cycle check via Kahn on singly directed links
    schild = []
    for i in range(n):
        m = 0
        for j in iter_bits(adj[i] & ~head[i]):
            if head[j] >> i & 1:
                m |= 1 << j
        schild.append(m)
    indeg = [0] * n
    for i in range(n):
        for j in iter_bits(schild[i]):
            indeg[j] += 1
    ready = [i for i in range(n) if indeg[i] == 0]
    seen = 0
    while ready:
        i = ready.pop()
        seen += 1
        for j in iter_bits(schild[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    if seen < n:
        raise InconsistentPatternError("pattern contains a directed cycle")


def complete_pattern(p: Pattern) -> Pattern:
    """Direct every link of a rudimentary pattern that all class members share."""
    if not isinstance(p, Pattern):
        p = Pattern.from_hybrid(p)
    return Pattern.from_hybrid(orient_fixpoint(p), COMPLETED)


# --- class enumeration ----------------------------------------------------


def enumerate_class(p: Pattern, max_nodes: int = 10) -> list[Dag]:
    """Every dag extending ``p`` without new uncoupled head-to-head nodes.

    Members are produced by backtracking over the undirected links in node
    order, trying the orientation from the earlier node first.
    """
    if not isinstance(p, Pattern):
        p = Pattern.from_hybrid(p)
    if len(p) > max_nodes:
        raise SizeBoundError(f"pattern has {len(p)} nodes; the bound is {max_nodes}")
    names = p.nodes
    n = len(names)
    adj = [p.adjacency_mask(v) for v in names]
    pa = [0] * n
    undirected = []
    for u, v, mu, mv in p.edges():
        i, j = p.index(u), p.index(v)
        if mu is Mark.TAIL and mv is Mark.TAIL:
            undirected.append((i, j))
        elif mv is Mark.ARROW:
            pa[j] |= 1 << i
        else:
            pa[i] |= 1 << j
    if _has_cycle(pa, n):
        raise InconsistentPatternError("pattern contains a directed cycle")

    out = []

    def reaches(src, dst):
        # is there a directed path src -> ... -> dst under current parents?
        children = [0] * n
        for c in range(n):
            for q in iter_bits(pa[c]):
                children[q] |= 1 << c
        seen, stack = 1 << src, [src]
        while stack:
            u = stack.pop()
            if u == dst:
                return True
            for v in iter_bits(children[u] & ~seen):
                seen |= 1 << v
                stack.append(v)
        return False

    def ok(i, j):
        # orienting i -> j: no cycle, no new uncoupled collider at j
        if reaches(j, i):
            return False
        if pa[j] & ~adj[i] & ~(1 << i):
            return False
        return True

    def backtrack(k):
        if k == len(undirected):
            out.append(Dag(names, [(names[q], names[c]) for c in range(n) for q in iter_bits(pa[c])]))
            return
        i, j = undirected[k]
        for s, t in ((i, j), (j, i)):
            if ok(s, t):
                pa[t] |= 1 << s
                backtrack(k + 1)
                pa[t] &= ~(1 << s)

    backtrack(0)
    return out


def _has_cycle(pa, n):
    indeg = [bin(pa[i]).count("1") for i in range(n)]
    children = [0] * n
    for c in range(n):
        for q in iter_bits(pa[c]):
            children[q] |= 1 << c
    ready = [i for i in range(n) if indeg[i] == 0]
    seen = 0
    while ready:
        i = ready.pop()
        seen += 1
        for j in iter_bits(children[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    return seen < n
