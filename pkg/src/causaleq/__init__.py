"""Equivalence, patterns and recovery of causal models, with and without latents."""

from .causes import CauseVerdict, PatternSet, cause_verdict, consistent_patterns, genuine_cause, potential_cause
from .embedded import (
    EmbeddedPattern,
    LatentWitness,
    ancestral_graph,
    canonical_dag,
    canonicalize,
    complete_embedded_pattern,
    embedded_equivalent,
    embedded_pattern,
    embedded_rudimentary_pattern,
    embedded_skeleton,
    model_count_bound,
    same_embedded_pattern,
)
from .estimator import PatternRecovery
from . import exceptions
from .exceptions import *  # noqa: F401,F403
from .graph import Dag, HybridGraph, Mark, format_graph, parse_graph, skeleton
from .patterns import (
    Pattern,
    Vee,
    complete_pattern,
    enumerate_class,
    equivalent,
    rudimentary_pattern,
    uncoupled_colliders,
)
from .recovery import (
    CountingOracle,
    GraphicalOracle,
    IndependenceOracle,
    SeparatorTable,
    graphical_oracle,
    markov_net,
    recover,
    recover_latent_free,
)
from .separation import (
    PathWitness,
    active_path,
    d_separated,
    find_inducing_path,
    is_inducing_path,
    separable,
    separated_by_pair_ancestors,
    separated_by_pair_parents,
    separated_over_observables,
)
from .statind import (
    Cpt,
    CrossEntropyResult,
    DataOracle,
    Dataset,
    cross_entropy,
    data_oracle,
    forward_sample,
    reliable_independent,
)

__version__ = "0.1.0"

__all__ = [
    "EmbeddedPattern",
    "LatentWitness",
    "ancestral_graph",
    "canonical_dag",
    "canonicalize",
    "complete_embedded_pattern",
    "embedded_equivalent",
    "embedded_pattern",
    "embedded_rudimentary_pattern",
    "embedded_skeleton",
    "model_count_bound",
    "same_embedded_pattern",
    "Pattern",
    "Vee",
    "complete_pattern",
    "enumerate_class",
    "equivalent",
    "rudimentary_pattern",
    "uncoupled_colliders",
    "CountingOracle",
    "GraphicalOracle",
    "IndependenceOracle",
    "SeparatorTable",
    "graphical_oracle",
    "markov_net",
    "recover",
    "recover_latent_free",
    "PathWitness",
    "active_path",
    "d_separated",
    "find_inducing_path",
    "is_inducing_path",
    "separable",
    "separated_by_pair_ancestors",
    "separated_by_pair_parents",
    "separated_over_observables",
    "Cpt",
    "CrossEntropyResult",
    "DataOracle",
    "Dataset",
    "cross_entropy",
    "data_oracle",
    "forward_sample",
    "reliable_independent",
    "CauseVerdict",
    "PatternSet",
    "cause_verdict",
    "consistent_patterns",
    "genuine_cause",
    "potential_cause",
    "PatternRecovery",
    "Dag",
    "HybridGraph",
    "Mark",
    "format_graph",
    "parse_graph",
    "skeleton",
] + exceptions.__all__
