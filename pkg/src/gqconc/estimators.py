"""scikit-learn style transformers over batches of states.

Rows of ``X`` are flattened state vectors (pure-state transformers) or
flattened density matrices (``ConvexRoof``). ``fit`` only validates the
input shape and records ``n_features_in_``; every transformer is stateless
otherwise, so it composes with ``Pipeline`` and ``clone``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_density_batch, check_dims, check_q, check_state_batch, check_unit_interval
from .measures import CONCURRENCE, gq_measure, h_q
from .monogamy import HierarchySpec, hierarchy_terms
from .qcore import DensityMatrix, PureState
from .roof import RoofConfig, roof_minimize


class _StateTransformer(TransformerMixin, BaseEstimator):
    def _check(self, X, reset: bool):
        arr = check_state_batch(X, check_dims(self.dims))
        if reset:
            self.n_features_in_ = arr.shape[1]
        else:
            check_is_fitted(self, "n_features_in_")
            if arr.shape[1] != self.n_features_in_:
                raise ValueError(f"X has {arr.shape[1]} features, expected {self.n_features_in_}")
        return arr

    def fit(self, X, y=None):
        self._check(X, reset=True)
        return self

    def _states(self, X):
        dims = check_dims(self.dims)
        return [PureState.from_vector(row, dims) for row in self._check(X, reset=False)]


class PureStateMeasure(_StateTransformer):
    """Concurrence or G_q-concurrence of each state across ``split | rest``.

    Parameters
    ----------
    dims : tuple of int
        Subsystem dimensions.
    split : tuple of int
        Subsystems on side A.
    measure : {"gq", "concurrence"}
    q : float
        Order of the G_q-concurrence, in (1, 2].
    """

    def __init__(self, dims=(2, 2), split=(0,), measure="gq", q=1.5):
        self.dims = dims
        self.split = split
        self.measure = measure
        self.q = q

    def _measure(self):
        if self.measure == "concurrence":
            return CONCURRENCE
        if self.measure == "gq":
            return gq_measure(self.q)
        raise ValueError(f"measure must be 'gq' or 'concurrence', got {self.measure!r}")

    def transform(self, X):
        f = self._measure()
        return np.array([[f(s, tuple(self.split))] for s in self._states(X)])


class HierarchicalIndicator(_StateTransformer):
    """``tau_qk`` of each state, one column per entry of ``q_grid``.

    Mixed terms follow the usual policy (Wootters after support compression,
    else a roof upper bound built from the ``roof_*`` parameters).
    """

    def __init__(self, dims=(2, 2, 2), k=3, q_grid=(1.5,), ordering=None,
                 roof_restarts=1, roof_max_iters=200, seed=0):
        self.dims = dims
        self.k = k
        self.q_grid = q_grid
        self.ordering = ordering
        self.roof_restarts = roof_restarts
        self.roof_max_iters = roof_max_iters
        self.seed = seed

    def transform(self, X):
        dims = check_dims(self.dims)
        spec = HierarchySpec(len(dims), self.k, self.ordering)
        qs = [check_q(q) for q in self.q_grid]
        cfg = RoofConfig(restarts=self.roof_restarts, max_iters=self.roof_max_iters, seed=self.seed)
        out = []
        for s in self._states(X):
            terms = hierarchy_terms(s, spec, cfg)
            out.append([terms.gq_report(q).residual for q in qs])
        return np.array(out)


class ConvexRoof(TransformerMixin, BaseEstimator):
    """Roof upper bound of concurrence or G_q-concurrence for each density matrix.

    Rows of ``X`` are flattened ``D x D`` matrices (or ``X`` is a stack of
    matrices). ``transform`` returns one column of roof values.
    """

    def __init__(self, dims=(2, 2), split=(0,), measure="gq", q=1.5, ensemble_size=None,
                 restarts=1, max_iters=200, seed=0):
        self.dims = dims
        self.split = split
        self.measure = measure
        self.q = q
        self.ensemble_size = ensemble_size
        self.restarts = restarts
        self.max_iters = max_iters
        self.seed = seed

    def fit(self, X, y=None):
        arr = check_density_batch(X, check_dims(self.dims))
        self.n_features_in_ = arr.shape[1] * arr.shape[2]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        dims = check_dims(self.dims)
        arr = check_density_batch(X, dims)
        f = CONCURRENCE if self.measure == "concurrence" else gq_measure(self.q)
        cfg = RoofConfig(self.ensemble_size, self.restarts, self.max_iters, seed=self.seed)
        return np.array([[roof_minimize(DensityMatrix(m, dims), f, tuple(self.split), cfg).value] for m in arr])


class SquaredConcurrenceToGq(TransformerMixin, BaseEstimator):
    """Elementwise ``t -> h_q(t)`` on squared concurrences in [0, 1]."""

    def __init__(self, q=1.5):
        self.q = q

    def fit(self, X, y=None):
        arr = np.asarray(X, dtype=float)
        self.n_features_in_ = 1 if arr.ndim < 2 else arr.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        arr = check_unit_interval(X, "X")
        return np.asarray(h_q(arr, check_q(self.q)), dtype=float).reshape(arr.shape)

