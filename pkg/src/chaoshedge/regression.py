"""Least-squares readout fitting and fit metrics.

The readout solves

    min_w ||A w - y||^2 + lambda * ||w_tail||^2

where A is the chaos design (intercept column first) and w_tail excludes the
intercept, which is never penalized. The solve goes through a rank-revealing
SVD factorization (scipy lstsq, driver gelsd) of the ridge-augmented system;
at lambda = 0 on a rank-deficient design this returns the minimum-norm
solution. The default lambda = 1e-8 * trace(A'A)/P is a scale-aware floor
for near-collinear random-feature designs.

MSE is reported as a mean (divide by the number of paths); IMSE weights the
squared hedge error by the time step, so a constant offset c in one asset
integrates to exactly c^2 * T.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import lstsq

from .chaos import ChaosDesign, HedgePaths
from .errors import ConfigError


@dataclass(frozen=True)
class FitResult:
    weights: np.ndarray  # (P,), intercept first
    train_mse: float
    test_mse: Optional[float]  # filled by the harness once test rows exist
    condition_estimate: float
    ridge_lambda: float
    effective_rank: int


def default_ridge(design: ChaosDesign) -> float:
    a = design.matrix
    return 1e-8 * float(np.einsum("mp,mp->", a, a)) / a.shape[1]


def fit_readout(design: ChaosDesign, targets: np.ndarray,
                ridge_lambda: Optional[float] = None) -> FitResult:
    """Fit intercept and readout weights by (optionally ridged) least squares."""
    a = design.matrix
    y = np.asarray(targets, dtype=float)
    if y.shape != (a.shape[0],):
        raise ConfigError(f"targets shape {y.shape} does not match {a.shape[0]} design rows")
    if not np.all(np.isfinite(y)):
        raise ConfigError("targets must be finite")
    lam = default_ridge(design) if ridge_lambda is None else float(ridge_lambda)
    if lam < 0:
        raise ConfigError("ridge_lambda must be >= 0")
    m, p = a.shape
    if m < p:
        warnings.warn(
            f"design has fewer rows ({m}) than columns ({p}); fit is underdetermined",
            stacklevel=2,
        )

    sv = np.linalg.svd(a, compute_uv=False)
    tol = sv.max() * max(m, p) * np.finfo(float).eps
    effective_rank = int(np.sum(sv > tol))
    condition = float(sv.max() / sv.min()) if sv.min() > 0 else float("inf")

    if lam > 0 and p > 1:
        # Augment with sqrt(lambda) rows for every non-intercept column.
        aug = np.zeros((p - 1, p))
        aug[:, 1:] = np.sqrt(lam) * np.eye(p - 1)
        a_solve = np.vstack([a, aug])
        y_solve = np.concatenate([y, np.zeros(p - 1)])
    else:
        a_solve, y_solve = a, y
    weights, _, _, _ = lstsq(a_solve, y_solve, lapack_driver="gelsd")

    residual = a @ weights - y
    train_mse = float(residual @ residual / m)
    return FitResult(
        weights=weights,
        train_mse=train_mse,
        test_mse=None,
        condition_estimate=condition,
        ridge_lambda=lam,
        effective_rank=effective_rank,
    )


def mse(pred: np.ndarray, truth: np.ndarray) -> float:
    """Mean squared difference."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ConfigError(f"mse operands differ in shape: {pred.shape} vs {truth.shape}")
    diff = pred - truth
    return float(diff @ diff / diff.shape[0]) if diff.ndim == 1 else float(np.mean(diff**2))


def imse(theta_hat: HedgePaths, theta_ref: HedgePaths, stride: int = 1) -> float:
    """Time-integrated mean squared hedge error.

    Mean over paths of sum_k ||theta_hat(t_k) - theta_ref(t_k)||^2 * dt with
    a left Riemann sum over nodes 0..K-1. ``stride`` thins the evaluation to
    every stride-th node, scaling the weight to stride*dt (used when the
    reference hedge is expensive); K must then be a multiple of stride.
    """
    th, tr = theta_hat.theta, theta_ref.theta
    if th.shape != tr.shape:
        raise ConfigError(f"hedge shapes differ: {th.shape} vs {tr.shape}")
    if not np.allclose(theta_hat.times, theta_ref.times):
        raise ConfigError("hedge paths live on different grids")
    K = th.shape[1] - 1
    if stride < 1 or K % stride:
        raise ConfigError(f"stride {stride} must divide the step count {K}")
    dt = float(theta_hat.times[1] - theta_hat.times[0])
    diff = th[:, 0:K:stride, :] - tr[:, 0:K:stride, :]
    per_path = np.einsum("mkd,mkd->m", diff, diff) * (stride * dt)
    return float(per_path.mean())
