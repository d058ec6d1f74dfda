"""Estimator-style wrapper around recovery from categorical samples."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .graph import Mark
from .recovery import recover, recover_latent_free
from .statind import DEFAULT_EPSILON, DEFAULT_K_MIN, DataOracle
from .validation import check_dataset, check_k_min, check_threshold

__all__ = ["PatternRecovery"]


class PatternRecovery(BaseEstimator):
    """Recover a pattern from categorical samples.

    Parameters
    ----------
    k_min : int, default=5
        Smallest stratum size that takes part in an independence test.
    epsilon : float, default=0.02
        Cross-entropy threshold in bits below which independence is accepted.
    latent_free : bool, default=False
        Use the clique-restricted search, which assumes no hidden variables.
    complete : bool, default=True
        Complete the recovered pattern.

    Attributes
    ----------
    pattern_ : HybridGraph
        Recovered pattern (a :class:`Pattern` when ``latent_free``).
    separators_ : SeparatorTable
        Separator found for every non-adjacent pair.
    n_queries_ : dict
        Independence tests issued, per recovery step.
    feature_names_in_ : ndarray of str
    n_features_in_ : int

    Examples
    --------
    >>> import numpy as np
    >>> rng = np.random.default_rng(0)
    >>> a = rng.integers(0, 2, 2000)
    >>> X = np.column_stack([a, a ^ (rng.random(2000) < 0.1)])
    >>> PatternRecovery().fit(X).pattern_
    HybridGraph([x0--x1])
    """

    def __init__(self, k_min=DEFAULT_K_MIN, epsilon=DEFAULT_EPSILON, latent_free=False, complete=True):
        self.k_min = k_min
        self.epsilon = epsilon
        self.latent_free = latent_free
        self.complete = complete

    def fit(self, X, y=None, feature_names=None):
        """Run recovery on ``X``; ``y`` is ignored."""
        k_min = check_k_min(self.k_min)
        epsilon = check_threshold(self.epsilon)
        data = check_dataset(X, feature_names)
        oracle = DataOracle(data, k_min, epsilon)
        stats = {}
        run = recover_latent_free if self.latent_free else recover
        self.pattern_, self.separators_ = run(oracle, complete=bool(self.complete), stats=stats)
        self.n_queries_ = stats
        self.feature_names_in_ = np.asarray(data.variables, dtype=object)
        self.n_features_in_ = len(data.variables)
        self.oracle_ = oracle
        return self

    def adjacency_matrix(self):
        """Mark matrix: entry ``[i, j]`` is 1 for a tail and 2 for an arrowhead at ``j``."""
        check_is_fitted(self, "pattern_")
        names = list(self.feature_names_in_)
        out = np.zeros((len(names), len(names)), dtype=np.int8)
        for u, v, mu, mv in self.pattern_.edges():
            i, j = names.index(u), names.index(v)
            out[i, j] = 2 if mv is Mark.ARROW else 1
            out[j, i] = 2 if mu is Mark.ARROW else 1
        return out
