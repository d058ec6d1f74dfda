"""Patterns of embedded causal models (dags with latent nodes).

Adjacency over the observables is decided by inducing paths; an arrowhead
lands at ``b`` on ``a``-``b`` when some third observable ``c``, adjacent to
``b`` but not to ``a``, is also joined to ``b`` by an inducing path pointing
into ``b``.  The result is a hybrid graph that may carry bidirected links.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping

from .exceptions import (
    GraphError,
    InconsistentPatternError,
    ObservableSetMismatchError,
    SizeBoundError,
)
from .graph import Dag, HybridGraph, Mark
from .patterns import COMPLETED, RUDIMENTARY, orient_fixpoint
from .separation import find_inducing_path

__all__ = [
    "EmbeddedPattern",
    "LatentWitness",
    "embedded_skeleton",
    "embedded_rudimentary_pattern",
    "embedded_pattern",
    "complete_embedded_pattern",
    "same_embedded_pattern",
    "embedded_equivalent",
    "ancestral_graph",
    "discriminating_paths",
    "canonical_dag",
    "canonicalize",
    "model_count_bound",
]


class EmbeddedPattern(HybridGraph):
    """Hybrid graph over the observables of an embedded model."""

    def __init__(self, nodes=(), edges=(), stage=RUDIMENTARY):
        super().__init__(nodes, edges)
        if stage not in (RUDIMENTARY, COMPLETED):
            raise ValueError(f"unknown stage {stage!r}")
        self.stage = stage

    @classmethod
    def from_hybrid(cls, h: HybridGraph, stage=RUDIMENTARY) -> "EmbeddedPattern":
        return cls(h.nodes, h.edges(), stage)


class LatentWitness(Mapping):
    """Maps each bidirected link ``{a, b}`` to the latent common cause added for it."""

    def __init__(self, latents: Mapping[frozenset, str] = ()):
        self._map = dict(latents)

    def __getitem__(self, pair):
        return self._map[frozenset(pair)]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __repr__(self):
        body = ", ".join(f"{'<->'.join(sorted(k))}: {v}" for k, v in self._map.items())
        return f"LatentWitness({{{body}}})"


def _observables(g: Dag) -> tuple[str, ...]:
    obs = g.observables
    if not obs:
        raise GraphError("the model has no observable nodes")
    return obs


def embedded_skeleton(g: Dag) -> frozenset[frozenset[str]]:
    """Observable pairs joined by an inducing path."""
    obs = _observables(g)
    return frozenset(frozenset((a, b)) for a, b in itertools.combinations(obs, 2)
                     if find_inducing_path(g, a, b) is not None)


def embedded_rudimentary_pattern(g: Dag) -> EmbeddedPattern:
    """The rudimentary pattern of ``g`` restricted to its observables."""
    obs = _observables(g)
    adj = {a: set() for a in obs}
    for a, b in itertools.combinations(obs, 2):
        if find_inducing_path(g, a, b) is not None:
            adj[a].add(b)
            adj[b].add(a)
    into = {}
    for a in obs:
        for b in adj[a]:
            into[a, b] = find_inducing_path(g, a, b, into_b=True) is not None
    heads = set()
    for a in obs:
        for b in adj[a]:
            if not into[a, b]:
                continue
            if any(c != a and c not in adj[a] and into[c, b] for c in adj[b]):
                heads.add((a, b))
    edges = []
    for a, b in itertools.combinations(obs, 2):
        if b in adj[a]:
            edges.append((a, b,
                          Mark.ARROW if (b, a) in heads else Mark.TAIL,
                          Mark.ARROW if (a, b) in heads else Mark.TAIL))
    return EmbeddedPattern(obs, edges, RUDIMENTARY)


def complete_embedded_pattern(p: HybridGraph) -> EmbeddedPattern:
    """Add every arrowhead forced by the no-new-collider and no-cycle constraints.

    Cycles count only singly directed links; bidirected links contribute
    arrowheads to head-to-head tests but never to directed paths.
    """
    return EmbeddedPattern.from_hybrid(orient_fixpoint(p), COMPLETED)


def embedded_pattern(g: Dag, complete: bool = True) -> EmbeddedPattern:
    p = embedded_rudimentary_pattern(g)
    return complete_embedded_pattern(p) if complete else p


def _check_observables(g1, g2):
    if set(g1.observables) != set(g2.observables):
        raise ObservableSetMismatchError("models have different observable sets")


def same_embedded_pattern(g1: Dag, g2: Dag) -> bool:
    """True iff both models have the same rudimentary embedded pattern."""
    _check_observables(g1, g2)
    return embedded_rudimentary_pattern(g1) == embedded_rudimentary_pattern(g2)


# --- ancestral view used for the equivalence decision ---------------------


def ancestral_graph(g: Dag) -> HybridGraph:
    """Observable skeleton with ancestral marks.

    The mark at ``b`` on ``a``-``b`` is a tail when ``b`` is an ancestor of
    ``a`` in ``g`` and an arrowhead otherwise.
    """
    obs = _observables(g)
    edges = []
    for a, b in itertools.combinations(obs, 2):
        if find_inducing_path(g, a, b) is None:
            continue
        ia, ib = g.index(a), g.index(b)
        mark_a = Mark.TAIL if g._anc[ib] >> ia & 1 else Mark.ARROW
        mark_b = Mark.TAIL if g._anc[ia] >> ib & 1 else Mark.ARROW
        edges.append((a, b, mark_a, mark_b))
    return HybridGraph(obs, edges)


def discriminating_paths(m: HybridGraph):
    """Yield ``(path, b)`` for every path discriminating for ``b`` in ``m``.

    ``path`` is ``(x, q1, ..., qk, b, y)`` with k >= 1, x and y non-adjacent,
    and every ``qi`` a collider on the path and a parent (``qi -> y``) of y.
    """
    names = m.nodes
    for y in names:
        for b in m.neighbors(y):
            for q in m.neighbors(b):
                if q == y or not m.is_directed(q, y) or not m.has_arrow_at(b, q):
                    continue
                yield from _extend_discriminating(m, [q, b, y])


def _extend_discriminating(m, tail):
    # tail = [q_current, ..., b, y]; q_current needs an arrowhead from its predecessor
    head_q = tail[0]
    y = tail[-1]
    for s in m.neighbors(head_q):
        if s in tail or not m.has_arrow_at(s, head_q):
            continue
        if not m.adjacent(s, y):
            yield (s, *tail), tail[-2]
        elif m.is_directed(s, y) and m.has_arrow_at(head_q, s):
            yield from _extend_discriminating(m, [s, *tail])


def _is_discriminating(m, path):
    x, *qs, b, y = path
    if not qs or m.adjacent(x, y):
        return False
    for u, v in zip(path, path[1:]):
        if not m.adjacent(u, v):
            return False
    for k, q in enumerate(qs, start=1):
        if not (m.has_arrow_at(path[k - 1], q) and m.has_arrow_at(path[k + 1], q)):
            return False
        if not m.is_directed(q, y):
            return False
    return True


def _collider_at(m, u, b, v):
    return m.has_arrow_at(u, b) and m.has_arrow_at(v, b)


def embedded_equivalent(g1: Dag, g2: Dag) -> bool:
    """Decide whether two embedded models impose the same observable independencies.

    Equal rudimentary patterns are necessary.  The ancestral graphs must in
    addition agree on the collider status of every node that has a
    discriminating path in both, which equal patterns alone do not ensure
    once four or more observables are involved.
    """
    _check_observables(g1, g2)
    if embedded_rudimentary_pattern(g1) != embedded_rudimentary_pattern(g2):
        return False
    m1, m2 = ancestral_graph(g1), ancestral_graph(g2)
    for first, second in ((m1, m2), (m2, m1)):
        for path, b in discriminating_paths(first):
            if not _is_discriminating(second, path):
                continue
            u, v = path[-3], path[-1]
            if _collider_at(first, u, b, v) != _collider_at(second, u, b, v):
                return False
    return True


# --- canonical simple dags -----------------------------------------------


def _latent_name(a, b, taken):
    base = f"L_{a}_{b}"
    name, k = base, 1
    while name in taken:
        k += 1
        name = f"{base}_{k}"
    taken.add(name)
    return name


def canonical_dag(h: HybridGraph) -> tuple[Dag, LatentWitness]:
    """Replace each ``a <-> b`` by ``a <- L_a_b -> b`` and keep directed links.

    Every link of ``h`` must be directed or bidirected.
    """
    taken = set(h.nodes)
    edges, latents, witness = [], [], {}
    for u, v, mu, mv in h.edges():
        if mu is Mark.ARROW and mv is Mark.ARROW:
            lam = _latent_name(u, v, taken)
            latents.append(lam)
            witness[frozenset((u, v))] = lam
            edges += [(lam, u), (lam, v)]
        elif mv is Mark.ARROW:
            edges.append((u, v))
        elif mu is Mark.ARROW:
            edges.append((v, u))
        else:
            raise GraphError(f"link {u} -- {v} is not oriented")
    return Dag(list(h.nodes) + latents, edges, latents), LatentWitness(witness)


def _greedy_typing(c: HybridGraph):
    """Orient the undirected links of ``c`` without cycles or new head-to-head nodes."""
    names = c.nodes
    n = len(names)
    idx = {v: i for i, v in enumerate(names)}
    head = [0] * n
    strict_pa = [0] * n
    und = []
    for u, v, mu, mv in c.edges():
        i, j = idx[u], idx[v]
        if mu is Mark.ARROW:
            head[i] |= 1 << j
        if mv is Mark.ARROW:
            head[j] |= 1 << i
        if mu is Mark.TAIL and mv is Mark.TAIL:
            und.append((i, j))
        elif mu is Mark.TAIL and mv is Mark.ARROW:
            strict_pa[j] |= 1 << i
        elif mu is Mark.ARROW and mv is Mark.TAIL:
            strict_pa[i] |= 1 << j
    adj = [c.adjacency_mask(v) for v in names]

    def reaches(src, dst):
        seen, stack = 1 << src, [src]
        while stack:
            u = stack.pop()
            if u == dst:
                return True
            for w in range(n):
                if strict_pa[w] >> u & 1 and not seen >> w & 1:
                    seen |= 1 << w
                    stack.append(w)
        return False

    chosen = []

    def backtrack(k):
        if k == len(und):
            return True
        i, j = und[k]
        for s, t in ((i, j), (j, i)):
            if head[t] & ~adj[s] & ~(1 << s):
                continue
            if reaches(t, s):
                continue
            head[t] |= 1 << s
            strict_pa[t] |= 1 << s
            chosen.append((s, t))
            if backtrack(k + 1):
                return True
            chosen.pop()
            head[t] &= ~(1 << s)
            strict_pa[t] &= ~(1 << s)
        return False

    if not backtrack(0):
        return None
    return c.with_arrowheads((names[s], names[t]) for s, t in chosen)


def _link_options(c: HybridGraph):
    opts = []
    for u, v, mu, mv in c.edges():
        if mu is Mark.ARROW and mv is Mark.ARROW:
            opts.append([(Mark.ARROW, Mark.ARROW)])
        elif mv is Mark.ARROW:
            opts.append([(Mark.TAIL, Mark.ARROW), (Mark.ARROW, Mark.ARROW)])
        elif mu is Mark.ARROW:
            opts.append([(Mark.ARROW, Mark.TAIL), (Mark.ARROW, Mark.ARROW)])
        else:
            opts.append([(Mark.TAIL, Mark.ARROW), (Mark.ARROW, Mark.TAIL), (Mark.ARROW, Mark.ARROW)])
    return opts


def canonicalize(p: HybridGraph, orient_undirected: str = "extension",
                 max_candidates: int = 200_000, strict: bool = False) -> tuple[Dag, LatentWitness]:
    """Build a simple dag, with one latent per bidirected link, realizing ``p``.

    The result's completed embedded pattern equals the completion of ``p``.
    ``orient_undirected="extension"`` first tries the extension that keeps
    single arrowheads directed and orients undirected links without new
    head-to-head nodes; when that does not reproduce ``p`` the typed
    extensions are searched exhaustively (bounded by ``max_candidates``).
    ``"search"`` skips the greedy attempt.

    Some marked graphs are not the pattern of any model, a lone ``a <-> b``
    for instance. When nothing realizes ``p`` and it has no undirected links,
    the direct translation (one latent per bidirected link, directed links
    kept) is returned, unless ``strict`` is set, in which case
    InconsistentPatternError is raised.
    """
    if orient_undirected not in ("extension", "search"):
        raise ValueError(f"unknown orientation policy {orient_undirected!r}")
    target = complete_embedded_pattern(p)

    def realizes(h):
        try:
            dag, witness = canonical_dag(h)
        except GraphError:
            return None
        if complete_embedded_pattern(embedded_rudimentary_pattern(dag)) == target:
            return dag, witness
        return None

    if orient_undirected == "extension":
        typed = _greedy_typing(target)
        if typed is not None:
            found = realizes(typed)
            if found is not None:
                return found

    edges = target.edges()
    opts = _link_options(target)
    total = 1
    for o in opts:
        total *= len(o)
    if total > max_candidates:
        raise SizeBoundError(f"{total} typed extensions exceed the search bound {max_candidates}")
    for choice in itertools.product(*opts):
        h = HybridGraph(target.nodes, [(u, v, mu, mv) for (u, v, _, _), (mu, mv) in zip(edges, choice)])
        found = realizes(h)
        if found is not None:
            return found
    if not strict and not any(mu is Mark.TAIL and mv is Mark.TAIL for _, _, mu, mv in target.edges()):
        try:
            return canonical_dag(target)
        except GraphError:
            pass
    raise InconsistentPatternError("no simple dag with pairwise latents realizes the pattern")


def model_count_bound(n_observables: int) -> int:
    """Upper bound ``5 ** (n * n)`` on distinct embedded models over n observables.

    Python integers are unbounded, so no overflow handling is needed.
    """
    if n_observables < 1:
        raise ValueError("need at least one observable")
    return 5 ** (n_observables * n_observables)
