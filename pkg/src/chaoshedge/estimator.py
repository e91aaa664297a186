"""Scikit-learn estimators wrapping the chaos regression pipeline.

ChaosFeatures maps a batch of simulated paths to the chaos design: an
intercept column followed by the terminal iterated integrals J_n(T) of
m_n random neurons per order n = 1..order. ChaosHedgeRegressor composes
that featurization with the least-squares readout and exposes the fitted
payoff approximation (predict) together with its closed-form hedging
strategy (hedge).

Both estimators take PathBatch inputs rather than 2-D arrays: a sample is
an entire simulated path, and the featurization needs the time grid and
the path increments, not just a terminal cross-section. The diffusion
model is a constructor parameter because the neuron quadratic variations
depend on the model's diffusion matrix along each path. get_params /
set_params / clone follow scikit-learn conventions (parameters are stored
verbatim; all validation happens in fit), so the estimators compose with
Pipeline, GridSearchCV and friends as long as the cross-validation
splitter is path-aware.
"""

from __future__ import annotations

from math import factorial

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .chaos import INTERCEPT, ChaosDesign, HedgePaths, iterated_integral_hermite
from .errors import ConfigError
from .features import FeatureInit, compute_integrals, neuron_values_on_grid, sample_feature_bank
from .hermite import hermite_ts
from .models import ModelSpec, PathBatch, model_dim


def _as_path_batch(X) -> PathBatch:
    if not isinstance(X, PathBatch):
        raise ConfigError(
            f"expected a PathBatch of simulated paths, got {type(X).__name__}; "
            "estimators in this package consume whole paths, not feature arrays"
        )
    return X


class ChaosFeatures(TransformerMixin, BaseEstimator):
    """Transform simulated paths into the chaos regression design.

    Parameters
    ----------
    model : ModelSpec
        Diffusion model the paths were simulated from; fixes the neuron
        quadratic variations and the path dimension.
    order : int, default=2
        Truncation order N; the design has 1 + order * m_n columns.
    m_n : int, default=50
        Neurons per chaos order.
    activation : {"Sigmoid", "Relu", "Tanh"}, default="Sigmoid"
        Neuron activation.
    init : FeatureInit, optional
        Law of the neuron weights; standard normal by default.
    random_state : int, default=0
        Seed for the neuron bank. Order-n neurons come from the n-th
        substream, so banks are nested across truncation orders.

    Attributes
    ----------
    bank_ : FeatureBank
        The sampled neurons, grouped by order.
    column_index_ : tuple
        Design column keys: "intercept" then (order, neuron) pairs.
    n_output_features_ : int
        Number of design columns.
    """

    def __init__(self, model: ModelSpec = None, *, order: int = 2, m_n: int = 50,
                 activation: str = "Sigmoid", init: FeatureInit = None,
                 random_state: int = 0):
        self.model = model
        self.order = order
        self.m_n = m_n
        self.activation = activation
        self.init = init
        self.random_state = random_state

    def _validate(self, X: PathBatch) -> PathBatch:
        X = _as_path_batch(X)
        if self.model is None:
            raise ConfigError("ChaosFeatures needs the diffusion model the paths came from")
        if model_dim(self.model) != X.dim:
            raise ConfigError(
                f"model dimension {model_dim(self.model)} does not match "
                f"path dimension {X.dim}"
            )
        return X

    def fit(self, X, y=None):
        X = self._validate(X)
        order = int(self.order)
        if order < 0:
            raise ConfigError("order must be >= 0")
        init = self.init if self.init is not None else FeatureInit()
        self.bank_ = sample_feature_bank(
            order, (int(self.m_n),) * order, X.dim, self.activation, init,
            int(self.random_state),
        )
        self.column_index_ = tuple(
            [INTERCEPT]
            + [(n, j) for n, group in enumerate(self.bank_.orders, start=1)
               for j in range(len(group))]
        )
        self.n_output_features_ = len(self.column_index_)
        return self

    def transform(self, X) -> np.ndarray:
        self._check_fitted()
        X = self._validate(X)
        columns = [np.ones(X.n_paths)]
        for n, group in enumerate(self.bank_.orders, start=1):
            for neuron in group:
                wq = compute_integrals(neuron, self.bank_.activation, X, self.model)
                columns.append(iterated_integral_hermite(wq.W[:, -1], wq.Q[:, -1], n))
        return np.column_stack(columns)

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        self._check_fitted()
        names = [key if key == INTERCEPT else f"J{key[0]}_{key[1]}"
                 for key in self.column_index_]
        return np.asarray(names, dtype=object)

    def _check_fitted(self):
        if not hasattr(self, "bank_"):
            raise NotFittedError("this ChaosFeatures instance is not fitted yet")


class ChaosHedgeRegressor(RegressorMixin, BaseEstimator):
    """Chaos regression of a payoff with a closed-form hedging strategy.

    Fits intercept + readout weights over the chaos design by (optionally
    ridged) least squares; predict evaluates the fitted payoff
    approximation on new paths and hedge returns the induced trading
    strategy along them.

    Parameters
    ----------
    model : ModelSpec
        Diffusion model the paths were simulated from.
    order : int, default=2
        Truncation order N.
    m_n : int, default=50
        Neurons per chaos order.
    activation : {"Sigmoid", "Relu", "Tanh"}, default="Sigmoid"
    init : FeatureInit, optional
    random_state : int, default=0
        Seed for the neuron bank.
    ridge_lambda : float, optional
        Ridge penalty on the non-intercept weights; None picks a
        scale-aware floor from the design.

    Attributes
    ----------
    features_ : ChaosFeatures
        The fitted featurizer.
    weights_ : ndarray of shape (1 + order * m_n,)
        Full readout, intercept first.
    intercept_ : float
    coef_ : ndarray of shape (order * m_n,)
        Readout weights excluding the intercept.
    train_mse_, condition_, effective_rank_, ridge_lambda_
        Fit diagnostics from the least-squares solve.
    """

    def __init__(self, model: ModelSpec = None, *, order: int = 2, m_n: int = 50,
                 activation: str = "Sigmoid", init: FeatureInit = None,
                 random_state: int = 0, ridge_lambda: float = None):
        self.model = model
        self.order = order
        self.m_n = m_n
        self.activation = activation
        self.init = init
        self.random_state = random_state
        self.ridge_lambda = ridge_lambda

    def fit(self, X, y):
        from .regression import fit_readout

        features = ChaosFeatures(
            self.model, order=self.order, m_n=self.m_n, activation=self.activation,
            init=self.init, random_state=self.random_state,
        )
        matrix = features.fit(X).transform(X)
        y = np.asarray(y, dtype=float)
        if y.shape != (matrix.shape[0],):
            raise ConfigError(
                f"targets shape {y.shape} does not match {matrix.shape[0]} paths"
            )
        design = ChaosDesign(matrix=matrix, column_index=features.column_index_)
        result = fit_readout(design, y, self.ridge_lambda)

        self.features_ = features
        self.weights_ = result.weights
        self.intercept_ = float(result.weights[0])
        self.coef_ = result.weights[1:]
        self.train_mse_ = result.train_mse
        self.condition_ = result.condition_estimate
        self.effective_rank_ = result.effective_rank
        self.ridge_lambda_ = result.ridge_lambda
        return self

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        return self.features_.transform(X) @ self.weights_

    def hedge(self, X, node_stride: int = 1) -> HedgePaths:
        """Closed-form hedge along the given paths.

        Returns positions of shape (n_paths, K//node_stride + 1, d) on every
        node_stride-th grid node; node_stride must divide the step count.
        Recomputes the neuron integrals per neuron, so memory stays at a few
        path tensors regardless of the bank size.
        """
        self._check_fitted()
        X = self.features_._validate(X)
        K = X.grid.K
        stride = int(node_stride)
        if stride < 1 or K % stride:
            raise ConfigError(f"node_stride {stride} must divide the step count {K}")
        nodes = np.arange(0, K + 1, stride)
        times = X.grid.times[nodes]

        bank = self.features_.bank_
        theta = np.zeros((X.n_paths, nodes.shape[0], X.dim))
        pos = 1
        for n, group in enumerate(bank.orders, start=1):
            for neuron in group:
                w = self.weights_[pos]
                pos += 1
                wq = compute_integrals(neuron, bank.activation, X, self.model)
                base = hermite_ts(n - 1, wq.W[:, nodes], wq.Q[:, nodes]) / factorial(n - 1)
                phi = neuron_values_on_grid(neuron, bank.activation, times)
                theta += w * base[:, :, None] * phi[None, :, :]
        return HedgePaths(theta=theta, times=times)

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError("this ChaosHedgeRegressor instance is not fitted yet")
