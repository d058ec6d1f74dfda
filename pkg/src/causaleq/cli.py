"""Command-line entry point: ``causaleq <command> ...``.

Graphs are read and written in the edge-list format of
:func:`causaleq.graph.parse_graph`.  ``--json`` switches any command to JSON
output; the ``CAUSALEQ_FORMAT`` environment variable (``text`` or ``json``)
sets the default.  Exit status is 0 on success, 1 when the input is rejected
by the library, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from .causes import cause_verdict, consistent_patterns
from .embedded import canonicalize, embedded_equivalent, embedded_pattern
from .exceptions import CausalEqError, GraphError
from .graph import Dag, HybridGraph, format_graph, parse_graph
from .patterns import Pattern, complete_pattern, enumerate_class, equivalent, rudimentary_pattern
from .recovery import graphical_oracle, recover, recover_latent_free
from .separation import active_path, d_separated
from .statind import (
    DEFAULT_EPSILON,
    DEFAULT_K_MIN,
    Cpt,
    Dataset,
    cross_entropy,
    data_oracle,
    forward_sample,
)

__all__ = ["main", "parse_graph_file", "emit", "build_parser"]

FORMAT_ENV = "CAUSALEQ_FORMAT"


class UsageError(Exception):
    """Bad command-line arguments detected after parsing."""


def parse_graph_file(path: str, kind: str | None = None) -> Dag | HybridGraph:
    """Read a graph file; the kind follows the link tokens unless forced."""
    with open(path) as fh:
        return parse_graph(fh.read(), kind)


def _split(value: str | None) -> list[str]:
    if not value:
        return []
    return [v.strip() for v in value.split(",") if v.strip()]


def _graph_json(g) -> dict:
    if isinstance(g, Dag):
        return {
            "kind": "dag",
            "nodes": list(g.nodes),
            "latent": list(g.latents),
            "edges": [[p, "->", c] for p, c in g.edges],
            "text": format_graph(g),
        }
    edges = []
    for u, v, _, _ in g.edges():
        tok = g.link(u, v)
        if tok == "<-":
            edges.append([v, "->", u])
        else:
            edges.append([u, tok, v])
    out = {"kind": "hybrid", "nodes": list(g.nodes), "edges": edges, "text": format_graph(g)}
    if getattr(g, "stage", None):
        out["stage"] = g.stage
    return out


def emit(result, fmt: str, out=None) -> None:
    """Write ``result`` as text or JSON.

    ``result`` is a dict with a ``"text"`` entry used for text output; the
    whole dict is the JSON payload.
    """
    out = out or sys.stdout
    if fmt == "json":
        payload = {k: v for k, v in result.items() if not k.startswith("_")}
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        text = result["text"]
        out.write(text if text.endswith("\n") or not text else text + "\n")


def _read_dag(path) -> Dag:
    g = parse_graph_file(path)
    if not isinstance(g, Dag):
        raise GraphError(f"{path}: expected a dag, found undirected or bidirected links")
    return g


def _read_hybrid(path) -> HybridGraph:
    g = parse_graph_file(path)
    if isinstance(g, Dag):
        if g.latents:
            raise GraphError(f"{path}: a pattern file may not declare latent nodes")
        g = HybridGraph.from_dag(g)
    return g


def _with_observables(g: Dag, observables: str | None) -> Dag:
    names = _split(observables)
    if not names:
        return g
    unknown = [v for v in names if v not in g.nodes]
    if unknown:
        raise GraphError(f"unknown observables: {', '.join(unknown)}")
    return g.with_latent([v for v in g.nodes if v not in names])


def _oracle(spec: str, k_min: int, epsilon: float):
    kind, sep, path = spec.partition(":")
    if not sep or kind not in ("graph", "data") or not path:
        raise UsageError(f"--oracle must be graph:FILE or data:FILE.csv, got {spec!r}")
    if kind == "graph":
        return graphical_oracle(_read_dag(path))
    return data_oracle(Dataset.read_csv(path), k_min, epsilon)


# --- commands -----------------------------------------------------------------


def cmd_dsep(args):
    g = _read_dag(args.graph)
    given = _split(args.given)
    sep = d_separated(g, args.x, args.y, given)
    result = {"separated": sep, "text": "separated" if sep else "connected"}
    if args.witness and not sep:
        path = active_path(g, args.x, args.y, given)
        result["witness"] = list(path.nodes)
        result["text"] += "\n" + str(path)
    return result


def cmd_equiv(args):
    same = equivalent(_read_dag(args.graph1), _read_dag(args.graph2))
    return {"equivalent": same, "text": "equivalent" if same else "distinct"}


def cmd_equiv_embedded(args):
    g1 = _with_observables(_read_dag(args.graph1), args.observables)
    g2 = _with_observables(_read_dag(args.graph2), args.observables)
    same = embedded_equivalent(g1, g2)
    return {"equivalent": same, "text": "equivalent" if same else "distinct"}


def cmd_pattern(args):
    p = rudimentary_pattern(_read_dag(args.graph))
    if args.complete:
        p = complete_pattern(p)
    return {"pattern": _graph_json(p), "text": format_graph(p)}


def cmd_class(args):
    p = Pattern.from_hybrid(_read_hybrid(args.pattern))
    members = enumerate_class(p, max_nodes=args.max_nodes)
    blocks = [f"# member {k + 1}\n{format_graph(g)}" for k, g in enumerate(members)]
    return {"members": [_graph_json(g) for g in members], "count": len(members),
            "text": "\n".join(blocks)}


def cmd_project(args):
    g = _with_observables(_read_dag(args.graph), args.observables)
    p = embedded_pattern(g, complete=args.complete)
    return {"pattern": _graph_json(p), "text": format_graph(p)}


def cmd_canonicalize(args):
    dag, witness = canonicalize(_read_hybrid(args.pattern))
    return {"dag": _graph_json(dag),
            "latents": {"-".join(sorted(k)): v for k, v in witness.items()},
            "text": format_graph(dag)}


def cmd_recover(args):
    o = _oracle(args.oracle, args.kmin, args.eps)
    stats = {}
    run = recover_latent_free if args.latent_free else recover
    h, seps = run(o, complete=args.complete, stats=stats)
    text = format_graph(h)
    if args.stats:
        counts = " ".join(f"{k}={v}" for k, v in stats.items())
        text = text.rstrip("\n") + ("\n" if text else "") + f"# queries {counts}"
    return {"pattern": _graph_json(h), "queries": stats,
            "separators": {"-".join(sorted(k)): None if v is None else sorted(v) for k, v in seps.items()},
            "text": text}


def cmd_sample(args):
    g = _read_dag(args.graph)
    cpt = Cpt.load(args.cpt)
    data = forward_sample(g, cpt, args.n, args.seed)
    if args.output:
        data.to_csv(args.output)
        text = f"wrote {data.n_rows} rows to {args.output}"
    else:
        text = data.to_csv()
    return {"rows": data.n_rows, "variables": list(data.variables),
            "output": args.output, "text": text}


def cmd_citest(args):
    data = Dataset.read_csv(args.data)
    r = cross_entropy(data, args.a, args.b, _split(args.given), args.kmin)
    indep = r.value <= args.eps
    word = "independent" if indep else "dependent"
    return {"independent": indep, "cross_entropy": r.value, "covered_mass": r.covered_mass,
            "epsilon": args.eps, "k_min": args.kmin,
            "text": f"{word} cross_entropy={r.value:.6g} covered_mass={r.covered_mass:.4f}"}


def cmd_causes(args):
    pair = _split(args.pair)
    if len(pair) != 2:
        raise UsageError("--pair takes exactly two names, as c,e")
    o = _oracle(args.oracle, args.kmin, args.eps)
    ps = consistent_patterns(o, n_max=args.n_max)
    v = cause_verdict(ps, *pair)
    tier = v.tier
    if args.inclusive and tier == "genuine":
        label = "genuine (also potential)"
    else:
        label = tier
    return {"cause": v.cause, "effect": v.effect, "verdict": tier, "in_all": v.in_all,
            "in_some": v.in_some, "reverse_in_some": v.reverse_in_some,
            "models": v.n_models, "patterns": v.n_patterns, "inclusive": args.inclusive,
            "text": f"{label}\npatterns {v.n_patterns}\nmodels {v.n_models}"}


# --- parser -----------------------------------------------------------------------


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _nonneg_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _stat_options(p):
    p.add_argument("--kmin", type=_positive_int, default=DEFAULT_K_MIN,
                   help=f"smallest stratum size used by data tests (default {DEFAULT_K_MIN})")
    p.add_argument("--eps", type=_nonneg_float, default=DEFAULT_EPSILON,
                   help=f"cross-entropy threshold in bits (default {DEFAULT_EPSILON})")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", dest="format", action="store_const", const="json",
                        help=f"JSON output (default from ${FORMAT_ENV})")
    common.add_argument("--text", dest="format", action="store_const", const="text",
                        help="edge-list text output")

    parser = argparse.ArgumentParser(prog="causaleq", description="Equivalence, patterns and recovery of causal models.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=func)
        return p

    p = add("dsep", cmd_dsep, "test d-separation of x and y in a dag")
    p.add_argument("graph")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--given", default="", help="comma-separated conditioning set")
    p.add_argument("--witness", action="store_true", help="print an active path when connected")

    p = add("equiv", cmd_equiv, "decide whether two dags are equivalent")
    p.add_argument("graph1")
    p.add_argument("graph2")

    p = add("equiv-embedded", cmd_equiv_embedded, "decide whether two embedded models are equivalent")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.add_argument("--observables", help="comma-separated observables; other nodes become latent")

    p = add("pattern", cmd_pattern, "print the pattern of a dag")
    p.add_argument("graph")
    p.add_argument("--complete", action="store_true")

    p = add("class", cmd_class, "list the dags represented by a pattern")
    p.add_argument("pattern")
    p.add_argument("--max-nodes", type=_positive_int, default=10)

    p = add("project", cmd_project, "print the embedded pattern over the observables")
    p.add_argument("graph")
    p.add_argument("--observables", help="comma-separated observables; other nodes become latent")
    p.add_argument("--complete", action="store_true")

    p = add("canonicalize", cmd_canonicalize, "build a simple dag with one latent per bidirected link")
    p.add_argument("pattern")

    p = add("recover", cmd_recover, "recover a pattern from a graph or data oracle")
    p.add_argument("--oracle", required=True, help="graph:FILE or data:FILE.csv")
    p.add_argument("--latent-free", action="store_true", help="clique-restricted search, no latents")
    p.add_argument("--complete", action="store_true")
    p.add_argument("--stats", action="store_true", help="report oracle query counts")
    _stat_options(p)

    p = add("sample", cmd_sample, "forward-sample a dag with conditional probability tables")
    p.add_argument("graph")
    p.add_argument("cpt")
    p.add_argument("-n", type=_positive_int, required=True, help="number of rows")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output", help="CSV destination (default stdout)")

    p = add("citest", cmd_citest, "test conditional independence in a CSV dataset")
    p.add_argument("data")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--given", default="", help="comma-separated conditioning set")
    _stat_options(p)

    p = add("causes", cmd_causes, "classify c as a genuine or potential cause of e")
    p.add_argument("--oracle", required=True, help="graph:FILE or data:FILE.csv")
    p.add_argument("--pair", required=True, help="c,e")
    p.add_argument("--inclusive", action="store_true", help="count genuine causes as potential too")
    p.add_argument("--n-max", type=_positive_int, help="total node budget including hidden causes")
    _stat_options(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or os.environ.get(FORMAT_ENV, "text").strip().lower() or "text"
    if fmt not in ("text", "json"):
        parser.error(f"${FORMAT_ENV} must be 'text' or 'json', got {fmt!r}")
    try:
        result = args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (CausalEqError, ValueError, OSError) as exc:
        msg = str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"causaleq {args.command}: error: {msg}", file=sys.stderr)
        return 1
    emit(result, fmt)
    return 0
