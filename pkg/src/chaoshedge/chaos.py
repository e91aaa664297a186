"""Closed-form iterated integrals, the chaos regression design, and hedging.

The n-th iterated integral of a neuron phi along a path is evaluated in
closed form as H_n(W_t, Q_t)/n! where H_n is the time-space harmonic Hermite
polynomial and (W, Q) are the neuron's stochastic integral and quadratic
variation. A brute-force discretization of the defining recursion

    P^0 = 1,   P^n[k] = sum_{j<k} P^{n-1}[j] * phi(t_j) . dX_j

is provided as an independent oracle; the two agree up to discretization
error that vanishes as the grid is refined.

The regression design stacks an intercept column of ones followed by the
terminal values H_n(W_T, Q_T)/n! for every neuron, ordered by chaos order
then neuron index. The hedge for fitted readout weights w is

    theta_i(t_k) = sum_{n>=1} 1/(n-1)! sum_j w[n,j] * H_{n-1}(W[k], Q[k]) * phi_{n,j,i}(t_k),

self-financing against the synthesized payoff: intercept + left-point
trading gains reproduce the design-weighted payoff exactly for orders 0 and
1, and up to grid discretization error for higher orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Mapping, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError
from .features import FeatureBank, NeuronPathIntegrals, RandomNeuron, neuron_values_on_grid
from .hermite import hermite_ts
from .models import PathBatch

ColumnKey = Union[str, Tuple[int, int]]
INTERCEPT: ColumnKey = "intercept"


@dataclass(frozen=True)
class ChaosDesign:
    """Regression matrix (M, P) with P = 1 + sum_n m_n; intercept column first."""

    matrix: np.ndarray
    column_index: tuple  # tuple of ColumnKey, len P

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[1] != len(self.column_index):
            raise ConfigError("design matrix shape does not match the column index")
        if self.column_index[0] != INTERCEPT:
            raise ConfigError("design must start with the intercept column")
        if not np.all(np.isfinite(self.matrix)):
            raise ConfigError("design matrix has non-finite entries")

    @property
    def n_columns(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class HedgePaths:
    """Hedge positions theta, shape (M, K+1, d), on the grid `times`.

    theta[:, K, :] is evaluated for completeness but trading sums only use
    nodes 0..K-1 (the last rebalancing happens at t_{K-1}).
    """

    theta: np.ndarray
    times: np.ndarray


def iterated_integral_hermite(W: np.ndarray, Q: np.ndarray, n: int) -> np.ndarray:
    """J_n: pointwise H_n(W, Q)/n!.

    Accepts full path tensors (where Q starts at 0 by construction) or
    terminal cross-sections; shapes must agree elementwise.
    """
    W = np.asarray(W, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if W.shape != Q.shape:
        raise ConfigError(f"W and Q shapes differ: {W.shape} vs {Q.shape}")
    return hermite_ts(n, W, Q) / factorial(n)


def iterated_integral_direct(neuron: RandomNeuron, activation: str,
                             paths: PathBatch, n: int) -> np.ndarray:
    """Brute-force iterated integral by nested left-point sums, (M, K+1).

    Oracle for iterated_integral_hermite only; cost grows with n and it
    carries O(sqrt(dt)) discretization error.
    """
    if n < 1:
        raise ConfigError("iterated_integral_direct needs n >= 1")
    K = paths.grid.K
    phi = neuron_values_on_grid(neuron, activation, paths.grid.times[:K])
    steps = np.einsum("mkd,kd->mk", paths.increments, phi)  # phi(t_j) . dX_j
    P = np.ones((paths.n_paths, K + 1))
    for _ in range(n):
        contrib = P[:, :K] * steps
        nxt = np.empty_like(P)
        nxt[:, 0] = 0.0
        np.cumsum(contrib, axis=1, out=nxt[:, 1:])
        P = nxt
    return P


def build_design(bank: FeatureBank,
                 integrals: Mapping[Tuple[int, int], NeuronPathIntegrals],
                 n_paths: int | None = None) -> ChaosDesign:
    """Assemble the (M, P) design from per-neuron terminal (W_T, Q_T) values.

    For an order-0 (empty) bank the design is the intercept column alone and
    ``n_paths`` must be given, since there are no integrals to infer it from.
    """
    columns = []
    index: list = [INTERCEPT]
    for n, group in enumerate(bank.orders, start=1):
        for j in range(len(group)):
            try:
                wq = integrals[(n, j)]
            except KeyError as exc:
                raise ConfigError(f"missing integrals for neuron (order {n}, index {j})") from exc
            columns.append(iterated_integral_hermite(wq.W[:, -1], wq.Q[:, -1], n))
            index.append((n, j))
            n_paths = wq.W.shape[0]
    if n_paths is None:
        raise ConfigError("an empty bank needs an explicit n_paths for the intercept design")
    matrix = np.column_stack([np.ones(n_paths)] + columns)
    return ChaosDesign(matrix=matrix, column_index=tuple(index))


def synthesize_payoff(design: ChaosDesign, weights: np.ndarray) -> np.ndarray:
    """Design-weighted payoff G = design @ weights."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (design.n_columns,):
        raise ConfigError(
            f"weights length {weights.shape} does not match design columns {design.n_columns}"
        )
    return design.matrix @ weights


def hedging_strategy(
    bank: FeatureBank,
    weights: np.ndarray,
    integrals: Mapping[Tuple[int, int], NeuronPathIntegrals],
    times: np.ndarray,
    column_index: Sequence[ColumnKey] | None = None,
) -> HedgePaths:
    """Closed-form hedge paths for fitted readout weights.

    ``column_index`` defaults to the canonical ordering (intercept, then
    orders ascending); the intercept weight contributes nothing.
    """
    times = np.asarray(times, dtype=float)
    if column_index is None:
        column_index = [INTERCEPT] + [
            (n, j) for n, group in enumerate(bank.orders, start=1) for j in range(len(group))
        ]
    weights = np.asarray(weights, dtype=float)
    if len(column_index) != weights.shape[0]:
        raise ConfigError("weights and column index lengths differ")

    theta = None
    for key, w in zip(column_index, weights):
        if key == INTERCEPT:
            continue
        n, j = key
        neuron = bank.orders[n - 1][j]
        wq = integrals[(n, j)]
        if theta is None:
            theta = np.zeros((wq.W.shape[0], times.shape[0], neuron.dim))
        base = hermite_ts(n - 1, wq.W, wq.Q) / factorial(n - 1)  # (M, K+1)
        phi = neuron_values_on_grid(neuron, bank.activation, times)  # (K+1, d)
        theta += w * base[:, :, None] * phi[None, :, :]
    if theta is None:
        raise ConfigError("hedging_strategy needs at least one non-intercept column")
    return HedgePaths(theta=theta, times=times)


def replication_gap(phi0: float, theta: HedgePaths, paths: PathBatch,
                    target: np.ndarray) -> np.ndarray:
    """phi0 + left-point trading gains minus the synthesized payoff, per path."""
    target = np.asarray(target, dtype=float)
    M, K, d = paths.increments.shape
    if theta.theta.shape != (M, K + 1, d) or target.shape != (M,):
        raise ConfigError("theta/paths/target shapes do not agree")
    gains = np.einsum("mkd,mkd->m", theta.theta[:, :K, :], paths.increments)
    return phi0 + gains - target
