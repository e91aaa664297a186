"""Reference prices and hedge ratios for the supported model/payoff pairs.

Closed-form piece: the Gaussian call delta Phi((x - K)/sqrt(T - t)) for a
driftless Brownian asset.  Fourier piece: conditional characteristic
functions of affine functionals (terminal value, time average) solved from
their Riccati ODE systems by classical fourth-order Runge-Kutta stepping,
with sensitivity equations integrated alongside, then inverted into put
values and deltas by Gil-Pelaez quadrature.  Monte Carlo piece: chunked
reprice and bump-and-reprice estimators used to cross-check everything
else.

Inversion notes: a put value is assembled as K*P(Y <= K) - E[Y 1_{Y <= K}]
with both terms recovered from one pass of u-space quadrature; integrands
at nodes below 1e-8 are replaced by their analytic u -> 0 limits (exact
conditional first and second moments of Y).  States whose conditional
z-score |K - E[Y]| / std(Y) exceeds 12 skip quadrature and use the
almost-surely-exercised or worthless closed forms: at double precision the
Fourier integral carries no information there, while its oscillation
frequency grows past what fixed node counts resolve.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError, NumericalError
from .models import (
    AffineMultiD,
    Cev,
    ModelSpec,
    Polynomial1D,
    TimeGrid,
    model_dim,
    simulate_paths,
)
from .payoffs import PayoffSpec, evaluate_payoff

QUADRATURE_RULES = ("GaussLegendre", "Simpson")

# Nodes below this use the analytic u -> 0 limit of the inversion integrand.
SMALL_U = 1e-8

# z-score beyond which the put is priced by its degenerate closed form.
DEEP_Z = 12.0

DEFAULT_ODE_STEPS = 256

# Paths are priced in blocks of this size to bound the (paths x nodes)
# workspace in the profile evaluators.
PROFILE_CHUNK = 512


def normal_cdf(x):
    """Standard normal CDF Phi(x).

    Evaluated with ``scipy.special.ndtr``, i.e. through the Cody rational
    Chebyshev approximation of erf/erfc, whose absolute error is below
    1e-15 -- comfortably inside the 1e-10 contract of this function.
    """
    return ndtr(x)


def bm_call_delta(x, t: float, strike: float, maturity: float):
    """Hedge ratio Phi((x - K)/sqrt(T - t)) of a call on driftless BM.

    ``x`` may be a scalar or an array of states.  At ``t == maturity`` the
    limiting indicator 1_{x >= K} is returned.
    """
    if t > maturity:
        raise ConfigError(f"time t={t} is beyond maturity T={maturity}")
    x = np.asarray(x, dtype=float)
    if t == maturity:
        out = np.where(x >= strike, 1.0, 0.0)
    else:
        out = ndtr((x - strike) / math.sqrt(maturity - t))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# quadrature specification


@dataclass(frozen=True)
class QuadratureSpec:
    """Rule for the Fourier inversion integral over u in (0, u_max]."""

    u_max: float
    n_nodes: int = 256
    rule: str = "GaussLegendre"

    def __post_init__(self):
        if not (np.isfinite(self.u_max) and self.u_max > 0):
            raise ConfigError(f"u_max must be positive and finite, got {self.u_max}")
        if self.n_nodes < 16:
            raise ConfigError(f"n_nodes must be at least 16, got {self.n_nodes}")
        if self.rule not in QUADRATURE_RULES:
            raise ConfigError(f"rule must be one of {QUADRATURE_RULES}, got {self.rule!r}")
        if self.rule == "Simpson" and self.n_nodes % 2 == 0:
            raise ConfigError("Simpson rule needs an odd n_nodes (even interval count)")

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes and weights on [0, u_max]."""
        if self.rule == "GaussLegendre":
            xs, ws = np.polynomial.legendre.leggauss(self.n_nodes)
            return 0.5 * self.u_max * (xs + 1.0), 0.5 * self.u_max * ws
        h = self.u_max / (self.n_nodes - 1)
        u = np.linspace(0.0, self.u_max, self.n_nodes)
        w = np.full(self.n_nodes, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return u, w * (h / 3.0)

    def scaled(self, u_max: float) -> "QuadratureSpec":
        """Same rule and node count with a different truncation point."""
        return QuadratureSpec(u_max=u_max, n_nodes=self.n_nodes, rule=self.rule)


# ---------------------------------------------------------------------------
# Riccati systems


@dataclass(frozen=True)
class RiccatiSolution:
    """Exponent of an affine conditional characteristic function.

    E[exp(z1.X_T + z2*(1/T) int_t^T sum_k X_k ds) | X_t = x]
    = exp(phi + psi.x), with tau = T - t and (dphi_dz2, dpsi_dz2) the
    sensitivities of the exponent to the time-integral weight z2.
    """

    phi: complex
    psi: np.ndarray
    dphi_dz2: complex
    dpsi_dz2: np.ndarray
    tau: float


def _affine_coefficients(model: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Diffusion decomposition a(x) = alpha0 + sum_k alphas[k] * x_k."""
    if isinstance(model, Cev):
        return np.zeros((1, 1)), np.array([[[model.sigma0**2]]])
    if isinstance(model, AffineMultiD):
        return model.alpha0, model.alphas
    raise ConfigError(
        f"characteristic functions are available for Cev and AffineMultiD, "
        f"not {type(model).__name__}"
    )


def _require_driftless(model: ModelSpec) -> None:
    if isinstance(model, Cev):
        driftless = model.alpha == 0.0
    elif isinstance(model, AffineMultiD):
        driftless = not (np.any(model.beta0) or np.any(model.beta))
    else:
        driftless = False
    if not driftless:
        raise ConfigError(
            "model must be driftless here; pass zero_drift(model) so the "
            "expectation is taken under the martingale measure"
        )


def _riccati_batch(
    alpha0: np.ndarray,
    alphas: np.ndarray,
    z1: np.ndarray,
    z2: np.ndarray,
    tau: float,
    horizon: float,
    ode_steps: int,
    z1_direction: np.ndarray | None = None,
) -> dict:
    """Integrate the Riccati system for a batch of (z1, z2) arguments.

    psi_k' = (1/2) psi.alphas[k].psi + z2/T, psi(0) = z1;
    phi'   = (1/2) psi.alpha0.psi,           phi(0) = 0;
    plus the variational systems for d/dz2 and, when ``z1_direction`` is
    given, the directional derivative of (phi, psi) in that z1 direction.

    ``z1`` has shape (n, d), ``z2`` shape (n,).  Classical RK4 with
    ``ode_steps`` uniform steps on [0, tau].  Returns arrays keyed
    phi, psi, dphi_dz2, dpsi_dz2 and (if requested) dphi_dz1, dpsi_dz1.
    """
    n, d = z1.shape
    psi = z1.astype(np.complex128).copy()
    psi_z2 = np.zeros((n, d), dtype=np.complex128)
    phi = np.zeros(n, dtype=np.complex128)
    phi_z2 = np.zeros(n, dtype=np.complex128)
    with_dir = z1_direction is not None
    if with_dir:
        psi_dir = np.broadcast_to(
            np.asarray(z1_direction, dtype=np.complex128), (n, d)
        ).copy()
    else:
        psi_dir = np.zeros((n, d), dtype=np.complex128)
    phi_dir = np.zeros(n, dtype=np.complex128)

    # The constant forcing terms of psi' and (d psi/d z2)'.
    forcing = (z2 / horizon)[:, None] * np.ones(d)
    forcing_z2 = np.full((n, d), 1.0 / horizon, dtype=np.complex128)

    # Pack [psi | psi_z2 | psi_dir | phi | phi_z2 | phi_dir] per node.
    y = np.concatenate(
        [psi, psi_z2, psi_dir, phi[:, None], phi_z2[:, None], phi_dir[:, None]],
        axis=1,
    )

    def rhs(state: np.ndarray) -> np.ndarray:
        p = state[:, :d]
        p_z2 = state[:, d : 2 * d]
        p_dir = state[:, 2 * d : 3 * d]
        out = np.empty_like(state)
        # p.alphas[k].q for the three right-hand factors at once
        left = np.einsum("kij,nj->nki", alphas, p)
        out[:, :d] = 0.5 * np.einsum("nki,ni->nk", left, p) + forcing
        out[:, d : 2 * d] = np.einsum("nki,ni->nk", left, p_z2) + forcing_z2
        out[:, 2 * d : 3 * d] = np.einsum("nki,ni->nk", left, p_dir)
        a0p = p @ alpha0
        out[:, 3 * d] = 0.5 * np.einsum("ni,ni->n", a0p, p)
        out[:, 3 * d + 1] = np.einsum("ni,ni->n", a0p, p_z2)
        out[:, 3 * d + 2] = np.einsum("ni,ni->n", a0p, p_dir)
        return out

    if tau > 0.0:
        h = tau / ode_steps
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(ode_steps):
                k1 = rhs(y)
                k2 = rhs(y + 0.5 * h * k1)
                k3 = rhs(y + 0.5 * h * k2)
                k4 = rhs(y + h * k3)
                y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    if not np.all(np.isfinite(y.view(np.float64))):
        bad = int(np.where(~np.isfinite(y).all(axis=1))[0][0])
        raise NumericalError(
            f"Riccati integration diverged (first bad argument index {bad}, "
            f"|z1|={np.abs(z1[bad]).max():g}, z2={z2[bad]:g}, tau={tau:g}); "
            f"increase ode_steps or reduce the transform argument"
        )

    result = {
        "psi": y[:, :d],
        "dpsi_dz2": y[:, d : 2 * d],
        "phi": y[:, 3 * d],
        "dphi_dz2": y[:, 3 * d + 1],
    }
    if with_dir:
        result["dpsi_dz1"] = y[:, 2 * d : 3 * d]
        result["dphi_dz1"] = y[:, 3 * d + 2]
    return result


def riccati_charfn(
    model: ModelSpec,
    z1,
    z2: complex,
    tau: float,
    horizon: float,
    ode_steps: int = DEFAULT_ODE_STEPS,
) -> RiccatiSolution:
    """Exponent of E[exp(z1.X_T + z2*(1/T) int_t^T sum_k X_k ds) | X_t].

    ``model`` must be a driftless Cev or AffineMultiD; ``tau = T - t`` is
    the time to maturity and ``horizon`` is T itself (the normalizer of
    the time average).  The sensitivities with respect to z2 are solved
    simultaneously from the differentiated ODE system.
    """
    alpha0, alphas = _affine_coefficients(model)
    _require_driftless(model)
    d = alphas.shape[0]
    if not (0.0 <= tau <= horizon):
        raise ConfigError(f"tau must lie in [0, T]={horizon}, got {tau}")
    if ode_steps < 1:
        raise ConfigError(f"ode_steps must be positive, got {ode_steps}")
    z1 = np.atleast_1d(np.asarray(z1, dtype=np.complex128))
    if z1.shape != (d,):
        raise ConfigError(f"z1 must be a vector of length d={d}, got shape {z1.shape}")
    sol = _riccati_batch(
        alpha0, alphas, z1[None, :], np.array([z2], dtype=np.complex128),
        tau, horizon, ode_steps,
    )
    return RiccatiSolution(
        phi=complex(sol["phi"][0]),
        psi=sol["psi"][0],
        dphi_dz2=complex(sol["dphi_dz2"][0]),
        dpsi_dz2=sol["dpsi_dz2"][0],
        tau=tau,
    )


# ---------------------------------------------------------------------------
# conditional moments (exact for the driftless affine dynamics; they feed the
# u -> 0 integrand limits and the deep in/out-of-the-money shortcuts)


def asian_conditional_moments(
    model: Cev, x, t: float, horizon: float
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Mean/variance of Y = (1/T) int_t^T X_s ds given X_t = x, plus their
    x-derivatives dmean/dx and dvar/dx (x may be an array)."""
    x = np.asarray(x, dtype=float)
    tau = horizon - t
    dmean = tau / horizon
    dvar = model.sigma0**2 * tau**3 / (3.0 * horizon**2)
    return dmean * x, dvar * np.maximum(x, 0.0), dmean, dvar


def basket_conditional_moments(
    model: AffineMultiD, x: np.ndarray, w: np.ndarray, tau: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Mean/variance of Y = w.X_T given X_t = x (rows of a (m, d) array),
    plus the gradients dmean/dx (d,) and dvar/dx (d,)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    mean = x @ w
    waw = np.einsum("i,kij,j->k", w, model.alphas, w)
    var = tau * (w @ model.alpha0 @ w + x @ waw)
    return mean, var, w, tau * waw


# ---------------------------------------------------------------------------
# Gil-Pelaez put inversion


def _put_from_transforms(
    strike: np.ndarray,
    mean: np.ndarray,
    second_moment: np.ndarray,
    dmean: np.ndarray,
    dsecond: np.ndarray,
    u: np.ndarray,
    weights: np.ndarray,
    cf: np.ndarray,
    g: np.ndarray,
    dcf: np.ndarray,
    dg: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Assemble put values/deltas from the four u-space transforms.

    Shapes: strike, mean, second_moment are (m,); dmean, dsecond are
    (m, d); cf, g are (m, n); dcf, dg are (m, n, d).  Uses
    value = K*P(Y<=K) - E[Y 1_{Y<=K}] with the two Gil-Pelaez integrals
      P(Y<=K)      = 1/2    - (1/pi) int Im(e^{-iuK} cf)/u du,
      E[Y 1_{Y<=K}] = E[Y]/2 - (1/pi) int Im(e^{-iuK} g)/u du,
    and the analytic gradients of both in the conditioning state.
    """
    phase = np.exp(-1j * np.multiply.outer(strike, u))  # (m, n)
    small = u < SMALL_U

    def inv(values, limits):
        # values (m, n) or (m, n, d); limits (m,) or (m, d)
        if values.ndim == 3:
            num = (phase[:, :, None] * values).imag
            integrand = num / u[None, :, None]
            integrand[:, small, :] = limits[:, None, :]
            return np.einsum("mnd,n->md", integrand, weights)
        integrand = (phase * values).imag / u[None, :]
        integrand[:, small] = limits[:, None]
        return integrand @ weights

    with np.errstate(divide="ignore", invalid="ignore"):
        a = inv(cf, mean - strike)
        b = inv(g, second_moment - strike * mean)
        ax = inv(dcf, dmean)
        bx = inv(dg, dsecond - strike[:, None] * dmean)

    value = strike * (0.5 - a / math.pi) - (0.5 * mean - b / math.pi)
    delta = -0.5 * dmean - (strike[:, None] * ax - bx) / math.pi
    return value, delta


def _deep_put_closed_forms(strike, mean, std, dmean):
    """Values/deltas where |z| = |K - E[Y]|/std exceeds DEEP_Z (or std=0).

    Returns (value (m,), delta (m, d), mask of states still needing
    quadrature).  Deep in the money the put pays K - Y almost surely, so
    value = K - E[Y] and delta = -dmean; deep out of the money both are 0.
    """
    m = mean.shape[0]
    d = dmean.shape[0] if dmean.ndim == 1 else dmean.shape[1]
    value = np.zeros(m)
    delta = np.zeros((m, d))
    gap = strike - mean
    itm = gap > DEEP_Z * std
    otm = -gap > DEEP_Z * std
    degenerate = std == 0.0
    itm = itm | (degenerate & (gap > 0.0))
    otm = otm | (degenerate & (gap <= 0.0))
    value[itm] = gap[itm]
    delta[itm] = -np.broadcast_to(dmean, (m, d))[itm]
    return value, delta, ~(itm | otm)


def asian_put_profile(
    model: Cev,
    x,
    running_avg,
    t: float,
    strike: float,
    horizon: float,
    quad: QuadratureSpec,
    ode_steps: int = DEFAULT_ODE_STEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Asian-put value and hedge ratio at many states of one time slice.

    ``x`` and ``running_avg`` are arrays over paths: the state X_t and the
    accumulated left-Riemann average I_{0,t} = (1/T) int_0^t X ds.  The
    put on the full-horizon average is priced as a put on the remaining
    average with residual strike K - I_{0,t}; the delta treats
    ``running_avg`` as a second frozen state variable.  One Riccati solve
    over the quadrature nodes serves every state in the slice.
    """
    if not isinstance(model, Cev):
        raise ConfigError(f"Asian oracle needs a Cev model, got {type(model).__name__}")
    _require_driftless(model)
    if not (0.0 <= t < horizon):
        raise ConfigError(f"needs 0 <= t < T={horizon}, got t={t}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    running_avg = np.broadcast_to(
        np.asarray(running_avg, dtype=float), x.shape
    ).astype(float)
    tau = horizon - t
    kstar = strike - running_avg
    mean, var, dmean_dx, dvar_dx = asian_conditional_moments(model, x, t, horizon)
    std = np.sqrt(np.maximum(var, 0.0))
    dmean = np.array([dmean_dx])

    value, delta, mid = _deep_put_closed_forms(kstar, mean, std, dmean)
    if np.any(mid):
        u, wq = quad.nodes_weights()
        alpha0, alphas = _affine_coefficients(model)
        sol = _riccati_batch(
            alpha0, alphas,
            np.zeros((u.size, 1), dtype=np.complex128),
            1j * u.astype(np.complex128),
            tau, horizon, ode_steps,
        )
        psi = sol["psi"][:, 0]
        psi_z2 = sol["dpsi_dz2"][:, 0]
        phi = sol["phi"]
        phi_z2 = sol["dphi_dz2"]
        idx = np.flatnonzero(mid)
        for lo in range(0, idx.size, PROFILE_CHUNK):
            rows = idx[lo : lo + PROFILE_CHUNK]
            xc = x[rows][:, None]  # (c, 1)
            with np.errstate(over="ignore", invalid="ignore"):
                cf = np.exp(phi[None, :] + psi[None, :] * xc)
            level = phi_z2[None, :] + psi_z2[None, :] * xc
            g = level * cf
            dcf = (psi[None, :] * cf)[:, :, None]
            dg = ((psi_z2[None, :] + level * psi[None, :]) * cf)[:, :, None]
            if not (np.all(np.isfinite(cf)) and np.all(np.isfinite(g))):
                raise NumericalError(
                    "Asian inversion produced non-finite transforms; "
                    "increase ode_steps or reduce u_max"
                )
            mc = mean[rows]
            e2 = var[rows] + mc**2
            vals, dels = _put_from_transforms(
                kstar[rows], mc, e2,
                np.full((rows.size, 1), dmean_dx),
                (dvar_dx + 2.0 * mc * dmean_dx)[:, None],
                u, wq, cf, g, dcf, dg,
            )
            value[rows] = vals
            delta[rows] = dels
    if not (np.all(np.isfinite(value)) and np.all(np.isfinite(delta))):
        raise NumericalError(
            "Asian put inversion produced non-finite results; "
            "increase ode_steps or reduce u_max"
        )
    return value, delta[:, 0]


def asian_put_value_delta(
    model: Cev,
    x_t: float,
    running_avg: float,
    t: float,
    strike: float,
    horizon: float,
    quad: QuadratureSpec,
    ode_steps: int = DEFAULT_ODE_STEPS,
) -> tuple[float, float]:
    """Asian-put value and hedge ratio at a single state (see
    ``asian_put_profile`` for conventions)."""
    value, delta = asian_put_profile(
        model, [x_t], [running_avg], t, strike, horizon, quad, ode_steps
    )
    return float(value[0]), float(delta[0])


def basket_put_profile(
    model: AffineMultiD,
    x,
    t: float,
    strike: float,
    w,
    horizon: float,
    quad: QuadratureSpec,
    ode_steps: int = DEFAULT_ODE_STEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Basket-put value and hedge-ratio vector at many states of one time
    slice.  ``x`` is (m, d); returns values (m,) and deltas (m, d).

    The characteristic function of Y = w.X_T is exp(phi + psi.x) at
    z1 = i*u*w, and E[Y e^{iuY}] follows from the directional derivative
    of (phi, psi) along w, integrated with the same variational technique
    as the z2 sensitivities.
    """
    if not isinstance(model, AffineMultiD):
        raise ConfigError(
            f"basket oracle needs an AffineMultiD model, got {type(model).__name__}"
        )
    _require_driftless(model)
    if not (0.0 <= t < horizon):
        raise ConfigError(f"needs 0 <= t < T={horizon}, got t={t}")
    d = model.d
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != d:
        raise ConfigError(f"states must have d={d} columns, got {x.shape[1]}")
    w = np.asarray(w, dtype=float)
    if w.shape != (d,):
        raise ConfigError(f"w must be a vector of length d={d}, got shape {w.shape}")
    m = x.shape[0]
    if not np.any(w):
        return np.full(m, max(strike, 0.0)), np.zeros((m, d))
    tau = horizon - t
    mean, var, dmean, dvar = basket_conditional_moments(model, x, w, tau)
    std = np.sqrt(np.maximum(var, 0.0))
    kvec = np.full(m, float(strike))

    value, delta, mid = _deep_put_closed_forms(kvec, mean, std, dmean)
    if np.any(mid):
        u, wq = quad.nodes_weights()
        alpha0, alphas = _affine_coefficients(model)
        sol = _riccati_batch(
            alpha0, alphas,
            1j * np.multiply.outer(u, w).astype(np.complex128),
            np.zeros(u.size, dtype=np.complex128),
            tau, horizon, ode_steps,
            z1_direction=w,
        )
        psi = sol["psi"]  # (n, d)
        phi = sol["phi"]
        psi_dir = sol["dpsi_dz1"]
        phi_dir = sol["dphi_dz1"]
        idx = np.flatnonzero(mid)
        for lo in range(0, idx.size, PROFILE_CHUNK):
            rows = idx[lo : lo + PROFILE_CHUNK]
            xc = x[rows]  # (c, d)
            with np.errstate(over="ignore", invalid="ignore"):
                cf = np.exp(phi[None, :] + xc @ psi.T)
            level = phi_dir[None, :] + xc @ psi_dir.T  # (c, n)
            g = level * cf
            dcf = cf[:, :, None] * psi[None, :, :]
            dg = cf[:, :, None] * (psi_dir[None, :, :] + level[:, :, None] * psi[None, :, :])
            if not (np.all(np.isfinite(cf)) and np.all(np.isfinite(g))):
                raise NumericalError(
                    "basket inversion produced non-finite transforms; "
                    "increase ode_steps or reduce u_max"
                )
            mc = mean[rows]
            e2 = var[rows] + mc**2
            dsecond = dvar[None, :] + 2.0 * mc[:, None] * dmean[None, :]
            vals, dels = _put_from_transforms(
                kvec[rows], mc, e2,
                np.broadcast_to(dmean, (rows.size, d)),
                dsecond, u, wq, cf, g, dcf, dg,
            )
            value[rows] = vals
            delta[rows] = dels
    if not (np.all(np.isfinite(value)) and np.all(np.isfinite(delta))):
        raise NumericalError(
            "basket put inversion produced non-finite results; "
            "increase ode_steps or reduce u_max"
        )
    return value, delta


def basket_put_value_delta(
    model: AffineMultiD,
    x_t,
    t: float,
    strike: float,
    w,
    horizon: float,
    quad: QuadratureSpec,
    ode_steps: int = DEFAULT_ODE_STEPS,
) -> tuple[float, np.ndarray]:
    """Basket-put value and hedge-ratio vector at a single state."""
    value, delta = basket_put_profile(
        model, np.atleast_2d(np.asarray(x_t, dtype=float)),
        t, strike, w, horizon, quad, ode_steps,
    )
    return float(value[0]), delta[0]


# ---------------------------------------------------------------------------
# Monte Carlo reference


def mc_reference_price(
    model: ModelSpec,
    payoff: PayoffSpec,
    n_paths: int,
    grid: TimeGrid,
    seed: int,
    chunk_size: int = 50_000,
) -> tuple[float, float]:
    """Sample mean and standard error of the payoff over fresh paths.

    Paths are simulated under the martingale measure (drift zeroed), in
    chunks so memory stays bounded; chunking does not change the draw of
    any individual path.
    """
    if n_paths < 2:
        raise ConfigError(f"n_paths must be at least 2, got {n_paths}")
    values = np.empty(n_paths)
    for start in range(0, n_paths, chunk_size):
        count = min(chunk_size, n_paths - start)
        batch = simulate_paths(
            model, grid, count, seed, measure="Martingale", path_offset=start
        )
        values[start : start + count] = evaluate_payoff(payoff, batch)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n_paths))


def _bump_initial_state(model: ModelSpec, bump: float, component: int) -> ModelSpec:
    d = model_dim(model)
    if not (0 <= component < d):
        raise ConfigError(f"component must be in [0, {d}), got {component}")
    x0 = np.atleast_1d(np.asarray(model.x0, dtype=float)).copy()
    x0[component] += bump
    if isinstance(model, (Cev, Polynomial1D)):
        return dataclasses.replace(model, x0=float(x0[0]))
    return dataclasses.replace(model, x0=x0)


def mc_bump_delta(
    model: ModelSpec,
    payoff: PayoffSpec,
    n_paths: int,
    grid: TimeGrid,
    seed: int,
    bump: float,
    component: int = 0,
    chunk_size: int = 50_000,
) -> tuple[float, float]:
    """Central-difference price sensitivity to the initial state.

    Reprices with the chosen component of x0 bumped by +-``bump`` using
    the same seed (common random numbers) and differences per path, so the
    returned standard error reflects the correlated estimator.
    """
    if bump <= 0:
        raise ConfigError(f"bump must be positive, got {bump}")
    up = _bump_initial_state(model, +bump, component)
    down = _bump_initial_state(model, -bump, component)
    diffs = np.empty(n_paths)
    for start in range(0, n_paths, chunk_size):
        count = min(chunk_size, n_paths - start)
        batch_up = simulate_paths(
            up, grid, count, seed, measure="Martingale", path_offset=start
        )
        batch_dn = simulate_paths(
            down, grid, count, seed, measure="Martingale", path_offset=start
        )
        diffs[start : start + count] = (
            evaluate_payoff(payoff, batch_up) - evaluate_payoff(payoff, batch_dn)
        ) / (2.0 * bump)
    return float(diffs.mean()), float(diffs.std(ddof=1) / math.sqrt(n_paths))
