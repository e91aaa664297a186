"""Random-feature neurons and their per-path stochastic integrals.

A neuron is a deterministic function of time t -> rho(a_i*t + b_i)_{i=1..d}
with weights (a, b) drawn i.i.d. from a normal distribution (a strictly
positive joint density is required for the approximation theory behind the
chaos regression, which is why only normal initializers are accepted).

For each neuron and each simulated path the module computes, by left-point
(predictable) sums on the simulation grid,

    W[m, k] = sum_{j<k} phi(t_j) . increments[m, j, :]
    Q[m, k] = sum_{j<k} phi(t_j)' a(t_j, X_{m,j}) phi(t_j) * dt,

the stochastic integral of the neuron against the asset paths and its
quadratic variation under the model's diffusion matrix.

Sampling contract: order-n neurons draw from the n-th spawn of
numpy SeedSequence(seed) through a Philox generator, a-matrix first, then
b-matrix, so banks are deterministic in (shape, seed) and orders are
independent substreams.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .errors import ConfigError
from .models import ModelSpec, PathBatch, BrownianMotion, Cev, Polynomial1D, AffineMultiD

ACTIVATIONS = ("Sigmoid", "Relu", "Tanh")


def apply_activation(activation: str, u):
    if activation == "Sigmoid":
        return expit(u)
    if activation == "Relu":
        return np.maximum(u, 0.0)
    if activation == "Tanh":
        return np.tanh(u)
    raise ConfigError(f"unknown activation {activation!r}; expected one of {ACTIVATIONS}")


@dataclass(frozen=True)
class Distribution:
    """Initializer for neuron weights; only normal laws are supported.

    kind "StandardNormal" is Normal(0, 1); kind "Normal" takes mean and
    std > 0. Anything else is rejected: the feature-sampling theory needs a
    strictly positive joint density for the (a, b) pairs.
    """

    kind: str = "StandardNormal"
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if self.kind == "StandardNormal":
            object.__setattr__(self, "mean", 0.0)
            object.__setattr__(self, "std", 1.0)
            return
        if self.kind == "Normal":
            if not self.std > 0:
                raise ConfigError("Normal initializer needs std > 0 (positive density)")
            return
        raise ConfigError(
            f"unsupported initializer {self.kind!r}: neuron weights must have a "
            "strictly positive joint density, so only StandardNormal or "
            "Normal(mean, std>0) are allowed"
        )


@dataclass(frozen=True)
class FeatureInit:
    a_dist: Distribution = Distribution()
    b_dist: Distribution = Distribution()


@dataclass(frozen=True)
class RandomNeuron:
    a: np.ndarray  # (d,)
    b: np.ndarray  # (d,)

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.shape != b.shape or a.ndim != 1:
            raise ConfigError("neuron weights a, b must be vectors of equal length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ConfigError("neuron weights must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class FeatureBank:
    """Neurons grouped by chaos order: orders[n-1] lists the m_n order-n neurons."""

    orders: tuple  # tuple of tuples of RandomNeuron
    activation: str
    seed: int
    init: FeatureInit

    @property
    def n_orders(self) -> int:
        return len(self.orders)

    @property
    def sizes(self) -> tuple:
        return tuple(len(group) for group in self.orders)

    @property
    def n_neurons(self) -> int:
        return sum(self.sizes)


@dataclass(frozen=True)
class NeuronPathIntegrals:
    W: np.ndarray  # (M, K+1)
    Q: np.ndarray  # (M, K+1)


def sample_feature_bank(
    N: int,
    sizes: Sequence[int],
    d: int,
    activation: str,
    init: FeatureInit,
    seed: int,
) -> FeatureBank:
    """Draw the random neurons for orders 1..N; deterministic in seed."""
    apply_activation(activation, 0.0)  # validates the activation name
    if N < 0:
        raise ConfigError("sample_feature_bank needs N >= 0")
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) != N:
        raise ConfigError(f"expected {N} order sizes, got {len(sizes)}")
    if any(s < 1 for s in sizes):
        raise ConfigError("every represented order needs at least one neuron")
    if d < 1:
        raise ConfigError("neuron dimension d must be >= 1")

    children = np.random.SeedSequence(seed).spawn(N) if N else []
    orders = []
    for n in range(1, N + 1):
        rng = np.random.Generator(np.random.Philox(children[n - 1]))
        m_n = sizes[n - 1]
        a = rng.normal(init.a_dist.mean, init.a_dist.std, size=(m_n, d))
        b = rng.normal(init.b_dist.mean, init.b_dist.std, size=(m_n, d))
        orders.append(tuple(RandomNeuron(a=a[j], b=b[j]) for j in range(m_n)))
    return FeatureBank(orders=tuple(orders), activation=activation, seed=seed, init=init)


def neuron_value(neuron: RandomNeuron, activation: str, t: float) -> np.ndarray:
    """phi(t), component i = rho(a_i*t + b_i)."""
    return apply_activation(activation, neuron.a * t + neuron.b)


def neuron_values_on_grid(neuron: RandomNeuron, activation: str, times: np.ndarray) -> np.ndarray:
    """phi evaluated at every grid time, shape (len(times), d)."""
    times = np.asarray(times, dtype=float)
    return apply_activation(activation, np.outer(times, neuron.a) + neuron.b)


def _check_dims(neuron: RandomNeuron, paths: PathBatch) -> None:
    if neuron.dim != paths.dim:
        raise ConfigError(
            f"neuron dimension {neuron.dim} does not match path dimension {paths.dim}"
        )


def compute_W(neuron: RandomNeuron, activation: str, paths: PathBatch) -> np.ndarray:
    """Left-point stochastic integral of the neuron along every path, (M, K+1)."""
    _check_dims(neuron, paths)
    K = paths.grid.K
    phi = neuron_values_on_grid(neuron, activation, paths.grid.times[:K])  # (K, d)
    steps = np.einsum("mkd,kd->mk", paths.increments, phi)
    W = np.empty((paths.n_paths, K + 1))
    W[:, 0] = 0.0
    np.cumsum(steps, axis=1, out=W[:, 1:])
    return W


def _q_steps(neuron: RandomNeuron, activation: str, paths: PathBatch,
             model: ModelSpec) -> np.ndarray:
    """Per-step quadratic-variation increments phi' a phi * dt, shape (M, K)."""
    K = paths.grid.K
    dt = paths.grid.dt
    phi = neuron_values_on_grid(neuron, activation, paths.grid.times[:K])  # (K, d)
    X = paths.states[:, :K, :]
    if isinstance(model, BrownianMotion):
        qs = np.einsum("kd,kd->k", phi, phi) * dt
        return np.broadcast_to(qs, (paths.n_paths, K))
    if isinstance(model, Cev):
        return model.sigma0**2 * np.maximum(X[:, :, 0], 0.0) * phi[:, 0] ** 2 * dt
    if isinstance(model, Polynomial1D):
        x = X[:, :, 0]
        a_val = np.maximum(model.alpha0 + model.alpha1 * x + model.alpha2 * x**2, 0.0)
        return a_val * phi[:, 0] ** 2 * dt
    # Affine: a(x) = alpha0 + sum_k alphas[k]*max(x_k,0) is PSD by construction
    # (PSD summands, nonnegative weights), so the quadratic form needs no clip.
    c0 = np.einsum("kd,de,ke->k", phi, model.alpha0, phi)
    ck = np.einsum("kd,jde,ke->kj", phi, model.alphas, phi)
    return (c0 + np.einsum("kj,mkj->mk", ck, np.maximum(X, 0.0))) * dt


def compute_Q(neuron: RandomNeuron, activation: str, paths: PathBatch,
              model: ModelSpec) -> np.ndarray:
    """Quadratic variation of W under the model diffusion, (M, K+1), nondecreasing."""
    _check_dims(neuron, paths)
    qs = _q_steps(neuron, activation, paths, model)
    Q = np.empty((paths.n_paths, paths.grid.K + 1))
    Q[:, 0] = 0.0
    np.cumsum(qs, axis=1, out=Q[:, 1:])
    return Q


def compute_integrals(neuron: RandomNeuron, activation: str, paths: PathBatch,
                      model: ModelSpec) -> NeuronPathIntegrals:
    return NeuronPathIntegrals(
        W=compute_W(neuron, activation, paths),
        Q=compute_Q(neuron, activation, paths, model),
    )
