"""Probabilists' Hermite polynomials and their time-space harmonic variant.

Evaluation is by the three-term recurrences

    h_n(x)    = x*h_{n-1}(x)   - (n-1)*h_{n-2}(x),
    H_n(x, t) = x*H_{n-1}(x,t) - (n-1)*t*H_{n-2}(x,t),

which are numerically stable in the regimes used here; the closed-form
coefficient sums appear only in tests. H_n(x, 0) = x**n, the limit of the
scaling relation H_n(x,t) = t**(n/2) * h_n(x/sqrt(t)).

All evaluators accept scalars or numpy arrays (broadcast against each other).
"""

from __future__ import annotations

import numpy as np

# Degree guard: beyond n ~ 60 the recurrence values exceed the comfortable
# double-precision dynamic range for |x| <= 10 and results degrade silently.
MAX_DEGREE = 60


def _check_degree(n: int) -> None:
    if n < 0:
        raise ValueError(f"polynomial degree must be non-negative, got {n}")
    if n > MAX_DEGREE:
        raise ValueError(
            f"degree {n} exceeds the double-precision guard n <= {MAX_DEGREE}"
        )


def probabilists_hermite(n: int, x):
    """Evaluate the probabilists' Hermite polynomial h_n at x."""
    _check_degree(n)
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for k in range(2, n + 1):
        h_prev, h = h, x * h - (k - 1) * h_prev
    return h if h.ndim else float(h)


def hermite_ts(n: int, x, t):
    """Evaluate the time-space harmonic Hermite polynomial H_n(x, t), t >= 0."""
    _check_degree(n)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("hermite_ts requires t >= 0")
    shape = np.broadcast_shapes(x.shape, t.shape)
    h_prev = np.ones(shape)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = np.broadcast_to(x, shape).astype(float)
    for k in range(2, n + 1):
        h_prev, h = h, x * h - (k - 1) * t * h_prev
    return h if h.ndim else float(h)


def hermite_ts_all(n_max: int, x, t) -> np.ndarray:
    """Evaluate H_0..H_{n_max} at (x, t) in one recurrence pass.

    Returns an array of shape (n_max + 1,) + broadcast(x, t).shape with
    entry [n] equal to hermite_ts(n, x, t).
    """
    _check_degree(n_max)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("hermite_ts_all requires t >= 0")
    shape = np.broadcast_shapes(x.shape, t.shape)
    out = np.empty((n_max + 1,) + shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = np.broadcast_to(x, shape)
    for k in range(2, n_max + 1):
        out[k] = x * out[k - 1] - (k - 1) * t * out[k - 2]
    return out
