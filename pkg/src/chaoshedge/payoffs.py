"""Payoff definitions and their evaluation on simulated path batches.

Three payoffs are supported: a European call max(X_T - K, 0) on a scalar
asset, an arithmetic-average Asian put max(K - (1/T) int_0^T X_t dt, 0)
with the time integral discretized as a left Riemann sum, and a basket put
max(K - w^T X_T, 0) on a multivariate asset.

The left-Riemann convention for the Asian average is shared with the
Fourier pricing oracle so that discretized payoffs and reference prices
agree on the same functional of the path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError
from .models import PathBatch


@dataclass(frozen=True)
class EuropeanCall:
    strike: float

    def __post_init__(self):
        if not np.isfinite(self.strike):
            raise ConfigError("strike must be finite")


@dataclass(frozen=True)
class AsianPut:
    strike: float

    def __post_init__(self):
        if not np.isfinite(self.strike):
            raise ConfigError("strike must be finite")


@dataclass(frozen=True)
class BasketPut:
    strike: float
    weights: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.strike):
            raise ConfigError("strike must be finite")
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if w.ndim != 1 or w.size < 1:
            raise ConfigError("weights must be a non-empty vector")
        if not np.all(np.isfinite(w)):
            raise ConfigError("weights must be finite")
        object.__setattr__(self, "weights", w)


PayoffSpec = Union[EuropeanCall, AsianPut, BasketPut]


def running_average(states: np.ndarray, dt: float, horizon: float) -> np.ndarray:
    """Left-Riemann running averages I_{0,t_k} = (1/T) sum_{j<k} X_{t_j} dt.

    ``states`` has shape (M, K+1) (scalar asset); the result has the same
    shape, with column k holding the average accumulated strictly before
    t_k.  Column 0 is zero and the final column is the average used by the
    Asian payoff.
    """
    out = np.zeros_like(states)
    np.cumsum(states[:, :-1] * (dt / horizon), axis=1, out=out[:, 1:])
    return out


def evaluate_payoff(payoff: PayoffSpec, paths: PathBatch) -> np.ndarray:
    """Per-path payoff values, shape (M,)."""
    states = paths.states
    d = paths.dim
    if isinstance(payoff, EuropeanCall):
        if d != 1:
            raise ConfigError(f"EuropeanCall needs a scalar asset, got d={d}")
        return np.maximum(states[:, -1, 0] - payoff.strike, 0.0)
    if isinstance(payoff, AsianPut):
        if d != 1:
            raise ConfigError(f"AsianPut needs a scalar asset, got d={d}")
        grid = paths.grid
        avg = states[:, :-1, 0].sum(axis=1) * (grid.dt / grid.T)
        return np.maximum(payoff.strike - avg, 0.0)
    if isinstance(payoff, BasketPut):
        if payoff.weights.size != d:
            raise ConfigError(
                f"BasketPut weights have length {payoff.weights.size}, paths have d={d}"
            )
        basket = states[:, -1, :] @ payoff.weights
        return np.maximum(payoff.strike - basket, 0.0)
    raise ConfigError(f"unknown payoff type {type(payoff).__name__}")


def payoff_to_json(payoff: PayoffSpec) -> dict:
    if isinstance(payoff, EuropeanCall):
        return {"kind": "EuropeanCall", "K": payoff.strike}
    if isinstance(payoff, AsianPut):
        return {"kind": "AsianPut", "K": payoff.strike}
    if isinstance(payoff, BasketPut):
        return {"kind": "BasketPut", "K": payoff.strike, "w": payoff.weights.tolist()}
    raise ConfigError(f"unknown payoff type {type(payoff).__name__}")


def payoff_from_json(doc: dict) -> PayoffSpec:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("payoff document must be an object with a 'kind' field")
    kind = doc["kind"]
    try:
        if kind == "EuropeanCall":
            return EuropeanCall(strike=float(doc["K"]))
        if kind == "AsianPut":
            return AsianPut(strike=float(doc["K"]))
        if kind == "BasketPut":
            return BasketPut(strike=float(doc["K"]), weights=doc["w"])
    except KeyError as exc:
        raise ConfigError(f"payoff document missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"payoff document for kind {kind!r} has a malformed field: {exc}") from exc
    raise ConfigError(f"unknown payoff kind {kind!r}")


def payoff_dumps(payoff: PayoffSpec) -> str:
    return json.dumps(payoff_to_json(payoff))


def payoff_loads(text: str) -> PayoffSpec:
    return payoff_from_json(json.loads(text))
