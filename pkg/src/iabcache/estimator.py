"""Estimator-style facade over the analytical engine.

``PartitionModel`` follows the scikit-learn conventions (constructor stores
parameters, ``fit`` validates and precomputes, ``predict``/``transform`` map
rows of ``(eta, C)`` to metrics) so it composes with ``get_params``,
``set_params`` and ``clone``.  Nothing is learned from data: ``fit`` only
checks the configuration and tabulates the coverage curves.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .config import BACKHAUL, MBS, SBS, NetworkConfig
from .coverage import db_to_linear
from .metrics import PartitionPoint, apt, ase, optimal_partition, tier_curve


def check_partition_points(X, cfg):
    """Validate an (n, 2) array of (eta, C) rows against ``cfg``; returns a float array."""
    X = check_array(X, dtype=float, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (eta, C), got {X.shape[1]}")
    eta, C = X[:, 0], X[:, 1]
    if np.any((eta < 0) | (eta > 1)):
        raise ValueError("eta must lie in [0, 1]")
    if np.any(C != np.round(C)) or np.any(C < 0) or np.any(C > cfg.F):
        raise ValueError(f"C must be an integer in [0, {cfg.F}]")
    return X


def check_config(config):
    if config is None:
        return NetworkConfig()
    if isinstance(config, NetworkConfig):
        return config
    if isinstance(config, dict):
        return NetworkConfig(**config)
    raise TypeError("config must be a NetworkConfig, a dict of its fields, or None")


class PartitionModel(TransformerMixin, BaseEstimator):
    """Maps (eta, C) rows to APT and ASE under one network configuration.

    ``predict`` returns the objective (``"ase"`` or ``"apt"``); ``transform``
    returns the columns ``apt, ase, ase_sbs, ase_mbs``.
    """

    def __init__(self, config=None, objective="ase", gamma0_db=10.0):
        self.config = config
        self.objective = objective
        self.gamma0_db = gamma0_db

    def fit(self, X=None, y=None):
        if self.objective not in ("ase", "apt"):
            raise ValueError(f"objective must be 'ase' or 'apt', got {self.objective!r}")
        self.config_ = check_config(self.config)
        self.gamma0_ = float(db_to_linear(self.gamma0_db))
        Cs = [self.config_.C]
        if X is not None:
            X = check_partition_points(X, self.config_)
            Cs = sorted({int(c) for c in X[:, 1]})
        for C in Cs:
            for tier in (SBS, MBS, BACKHAUL):
                tier_curve(tier, self.config_, C)
        self.n_features_in_ = 2
        return self

    def _rows(self, X):
        check_is_fitted(self, "config_")
        X = check_partition_points(X, self.config_)
        return [PartitionPoint(float(e), int(c)) for e, c in X]

    def transform(self, X):
        out = []
        for p in self._rows(X):
            a = ase(p, self.config_)
            out.append((apt(p, self.gamma0_, self.config_).total, a.total, a.sbs, a.mbs))
        return np.array(out, dtype=float).reshape(-1, 4)

    def predict(self, X):
        cols = self.transform(X)
        return cols[:, 1] if self.objective == "ase" else cols[:, 0]

    def best_partition(self, C, step=0.01):
        """(eta*, value) for cache capacity C under the configured objective."""
        check_is_fitted(self, "config_")
        gamma0 = self.gamma0_ if self.objective == "apt" else None
        return optimal_partition(C, self.config_, self.objective, gamma0=gamma0, step=step)
