"""Diffusion model specifications and Euler-Maruyama path simulation.

Four model kinds are supported: multivariate Brownian motion, the CEV
square-root model dX = alpha*X dt + sigma0*sqrt(X) dB, a scalar polynomial
diffusion dX = (beta0 + beta1*X) dt + sqrt(alpha0 + alpha1*X + alpha2*X^2) dB,
and a multivariate affine model with drift beta0 + sum_k beta_k*x_k and
diffusion matrix a(x) = alpha0 + sum_k alpha_k*max(x_k, 0).

Simulation uses full-truncation Euler: coefficients are evaluated at the
state-space truncation of the current state, and the stored states are the
truncated values, so constrained models (CEV, affine, polynomial on [0,inf)
or [0,1]) never leave their state space. Increments are stored as exact
differences of consecutive stored states.

RNG contract: path m draws its normals from
``Generator(Philox(key=seed, counter=[0, 0, m, 0]))``, a counter-based
substream per path, so results are a deterministic function of
(model, grid, M, seed) regardless of execution order, chunking, or thread
count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ConfigError, NumericalError, SimulationError

STATE_SPACES = ("RealLine", "NonNegative", "UnitInterval")
MEASURE_TAGS = ("Physical", "Martingale")

# Symmetry tolerance for affine diffusion parameters; matrices within this
# tolerance are symmetrized, farther ones are rejected.
SYMMETRY_TOL = 1e-12


def _as_vector(x, d: int, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.shape != (d,):
        raise ConfigError(f"{name} must be a vector of length {d}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ConfigError(f"{name} must be finite")
    return v


def _as_symmetric_psd(mat, d: int, name: str) -> np.ndarray:
    m = np.asarray(mat, dtype=float)
    if m.shape != (d, d):
        raise ConfigError(f"{name} must be {d}x{d}, got shape {m.shape}")
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.T).max() > SYMMETRY_TOL * scale:
        raise ConfigError(f"{name} is not symmetric within {SYMMETRY_TOL}")
    m = 0.5 * (m + m.T)
    eigvals = np.linalg.eigvalsh(m)
    if eigvals.min() < -1e-10 * scale:
        raise ConfigError(f"{name} is not positive semidefinite (min eig {eigvals.min():g})")
    return m


@dataclass(frozen=True)
class BrownianMotion:
    dims: int = 1
    x0: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.dims < 1:
            raise ConfigError("BrownianMotion needs dims >= 1")
        x0 = np.zeros(self.dims) if self.x0 is None else _as_vector(self.x0, self.dims, "x0")
        object.__setattr__(self, "x0", x0)


@dataclass(frozen=True)
class Cev:
    x0: float
    alpha: float
    sigma0: float

    def __post_init__(self):
        if not self.x0 > 0:
            raise ConfigError("Cev needs x0 > 0")
        if not self.sigma0 > 0:
            raise ConfigError("Cev needs sigma0 > 0")


@dataclass(frozen=True)
class Polynomial1D:
    x0: float
    beta0: float
    beta1: float
    alpha0: float
    alpha1: float
    alpha2: float
    state_space: str = "RealLine"

    def __post_init__(self):
        if self.state_space not in STATE_SPACES:
            raise ConfigError(f"state_space must be one of {STATE_SPACES}")
        # Nonnegativity of alpha0 + alpha1*x + alpha2*x^2 is checked on a
        # sampled grid of the state space (wide but finite for RealLine).
        if self.state_space == "UnitInterval":
            grid = np.linspace(0.0, 1.0, 201)
        elif self.state_space == "NonNegative":
            grid = np.linspace(0.0, 1e3, 2001)
        else:
            grid = np.linspace(-1e3, 1e3, 4001)
        vals = self.alpha0 + self.alpha1 * grid + self.alpha2 * grid**2
        if vals.min() < -1e-12:
            raise ConfigError(
                "Polynomial1D diffusion alpha0+alpha1*x+alpha2*x^2 is negative "
                f"on the state space (min {vals.min():g} at x={grid[vals.argmin()]:g})"
            )


@dataclass(frozen=True)
class AffineMultiD:
    d: int
    x0: np.ndarray
    beta0: np.ndarray
    beta: np.ndarray  # (d, d): row k is the drift loading beta_k
    alpha0: np.ndarray  # (d, d) symmetric PSD
    alphas: np.ndarray  # (d, d, d): alphas[k] symmetric PSD

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError("AffineMultiD needs d >= 1")
        d = self.d
        object.__setattr__(self, "x0", _as_vector(self.x0, d, "x0"))
        object.__setattr__(self, "beta0", _as_vector(self.beta0, d, "beta0"))
        beta = np.asarray(self.beta, dtype=float)
        if beta.shape != (d, d):
            raise ConfigError(f"beta must be a list of {d} vectors of length {d}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha0", _as_symmetric_psd(self.alpha0, d, "alpha0"))
        alphas = np.asarray(self.alphas, dtype=float)
        if alphas.shape != (d, d, d):
            raise ConfigError(f"alphas must be {d} matrices of shape {d}x{d}")
        alphas = np.stack([_as_symmetric_psd(alphas[k], d, f"alphas[{k}]") for k in range(d)])
        object.__setattr__(self, "alphas", alphas)


ModelSpec = Union[BrownianMotion, Cev, Polynomial1D, AffineMultiD]


def model_dim(model: ModelSpec) -> int:
    """Number of traded assets d (also the number of Brownian drivers)."""
    if isinstance(model, BrownianMotion):
        return model.dims
    if isinstance(model, AffineMultiD):
        return model.d
    return 1


def initial_state(model: ModelSpec) -> np.ndarray:
    if isinstance(model, (BrownianMotion, AffineMultiD)):
        return np.array(model.x0, dtype=float)
    return np.array([model.x0], dtype=float)


@dataclass(frozen=True)
class TimeGrid:
    T: float
    K: int
    times: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigError("TimeGrid needs T > 0")
        if self.K < 1:
            raise ConfigError("TimeGrid needs K >= 1")
        object.__setattr__(self, "times", np.linspace(0.0, self.T, self.K + 1))

    @property
    def dt(self) -> float:
        return self.T / self.K


@dataclass(frozen=True)
class PathBatch:
    grid: TimeGrid
    states: np.ndarray  # (M, K+1, d)
    increments: np.ndarray  # (M, K, d), exact diffs of states
    seed: int
    measure_tag: str = "Physical"

    def __post_init__(self):
        if self.measure_tag not in MEASURE_TAGS:
            raise ConfigError(f"measure_tag must be one of {MEASURE_TAGS}")
        M, K1, d = self.states.shape
        if self.increments.shape != (M, K1 - 1, d):
            raise ConfigError("increments shape does not match states")

    @property
    def n_paths(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[2]


# ---------------------------------------------------------------------------
# coefficient evaluation


def drift_at(model: ModelSpec, t: float, x) -> np.ndarray:
    """Drift vector b(t, x)."""
    x = _as_vector(x, model_dim(model), "x")
    if isinstance(model, BrownianMotion):
        return np.zeros(model.dims)
    if isinstance(model, Cev):
        return np.array([model.alpha * x[0]])
    if isinstance(model, Polynomial1D):
        return np.array([model.beta0 + model.beta1 * x[0]])
    return model.beta0 + model.beta.T @ x


def diffusion_matrix_at(model: ModelSpec, t: float, x) -> np.ndarray:
    """Diffusion matrix a(t, x) = sigma*sigma^T, projected to PSD."""
    x = _as_vector(x, model_dim(model), "x")
    if isinstance(model, BrownianMotion):
        return np.eye(model.dims)
    if isinstance(model, Cev):
        return np.array([[model.sigma0**2 * max(x[0], 0.0)]])
    if isinstance(model, Polynomial1D):
        val = model.alpha0 + model.alpha1 * x[0] + model.alpha2 * x[0] ** 2
        return np.array([[max(val, 0.0)]])
    a = model.alpha0 + np.tensordot(np.maximum(x, 0.0), model.alphas, axes=(0, 0))
    a = 0.5 * (a + a.T)
    w, v = np.linalg.eigh(a)
    if w.min() >= 0.0:
        return a
    return (v * np.clip(w, 0.0, None)) @ v.T


def diffusion_factor_at(model: ModelSpec, t: float, x) -> np.ndarray:
    """Matrix S with S@S.T equal to diffusion_matrix_at(model, t, x).

    Symmetric square root via eigendecomposition with eigenvalue clipping.
    """
    a = diffusion_matrix_at(model, t, x)
    if a.shape == (1, 1):
        return np.array([[np.sqrt(max(a[0, 0], 0.0))]])
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition failed for diffusion matrix at state {x}"
        ) from exc
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def zero_drift(model: ModelSpec) -> ModelSpec:
    """Same model with all drift parameters zeroed; diffusion untouched."""
    if isinstance(model, BrownianMotion):
        return model
    if isinstance(model, Cev):
        return Cev(x0=model.x0, alpha=0.0, sigma0=model.sigma0)
    if isinstance(model, Polynomial1D):
        return Polynomial1D(
            x0=model.x0, beta0=0.0, beta1=0.0,
            alpha0=model.alpha0, alpha1=model.alpha1, alpha2=model.alpha2,
            state_space=model.state_space,
        )
    return AffineMultiD(
        d=model.d, x0=model.x0,
        beta0=np.zeros(model.d), beta=np.zeros((model.d, model.d)),
        alpha0=model.alpha0, alphas=model.alphas,
    )


# ---------------------------------------------------------------------------
# vectorized simulation internals


def truncate_states(model: ModelSpec, x: np.ndarray) -> np.ndarray:
    """Apply the model's state-space truncation componentwise.

    Only models with a constrained state space are clipped: Cev lives on
    [0, inf) and Polynomial1D on whatever ``state_space`` declares.
    BrownianMotion and AffineMultiD evolve on the whole real line /
    R^d -- the affine diffusion matrix clamps negative components
    internally, the states themselves are unconstrained.
    """
    if isinstance(model, Cev):
        return np.maximum(x, 0.0)
    if isinstance(model, Polynomial1D):
        if model.state_space == "NonNegative":
            return np.maximum(x, 0.0)
        if model.state_space == "UnitInterval":
            return np.clip(x, 0.0, 1.0)
    return x


def _drift_grid(model: ModelSpec, x: np.ndarray) -> np.ndarray:
    """Drift for a batch of states, shape (M, d) -> (M, d)."""
    if isinstance(model, BrownianMotion):
        return np.zeros_like(x)
    if isinstance(model, Cev):
        return model.alpha * x
    if isinstance(model, Polynomial1D):
        return model.beta0 + model.beta1 * x
    return model.beta0 + x @ model.beta


def _psd_sqrt_batch(a: np.ndarray) -> np.ndarray:
    """Symmetric PSD square roots of a stack of symmetric matrices (..., d, d)."""
    d = a.shape[-1]
    if d == 1:
        return np.sqrt(np.clip(a, 0.0, None))
    if d == 2:
        # Closed form for 2x2 PSD: sqrt(A) = (A + s*I) / tau with
        # s = sqrt(det A), tau = sqrt(tr A + 2 s); zero matrix maps to zero.
        det = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
        s = np.sqrt(np.clip(det, 0.0, None))
        tau = np.sqrt(np.clip(a[..., 0, 0] + a[..., 1, 1] + 2.0 * s, 0.0, None))
        safe = np.where(tau > 0.0, tau, 1.0)
        out = (a + s[..., None, None] * np.eye(2)) / safe[..., None, None]
        return np.where(tau[..., None, None] > 0.0, out, 0.0)
    w, v = np.linalg.eigh(a)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w[..., None, :]) @ np.swapaxes(v, -1, -2)


def _diffusion_term_grid(model: ModelSpec, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """S(t, x) @ z for a batch of states/draws, shapes (M, d) -> (M, d)."""
    if isinstance(model, BrownianMotion):
        return z
    if isinstance(model, Cev):
        return model.sigma0 * np.sqrt(np.maximum(x, 0.0)) * z
    if isinstance(model, Polynomial1D):
        val = model.alpha0 + model.alpha1 * x + model.alpha2 * x**2
        return np.sqrt(np.maximum(val, 0.0)) * z
    a = model.alpha0 + np.tensordot(np.maximum(x, 0.0), model.alphas, axes=(1, 0))
    s = _psd_sqrt_batch(a)
    return np.einsum("mij,mj->mi", s, z)


def path_normals(seed: int, path_index: int, K: int, d: int) -> np.ndarray:
    """Standard normal draws (K, d) of the dedicated substream for one path."""
    bitgen = np.random.Philox(key=seed, counter=[0, 0, path_index, 0])
    return np.random.Generator(bitgen).standard_normal((K, d))


def simulate_paths(
    model: ModelSpec,
    grid: TimeGrid,
    M: int,
    seed: int,
    measure: str = "Physical",
    path_offset: int = 0,
) -> PathBatch:
    """Simulate M paths by full-truncation Euler-Maruyama.

    ``path_offset`` shifts the per-path substream index so that chunked
    simulation (concatenating batches with offsets 0, M1, M1+M2, ...)
    reproduces a single full run bit for bit.
    """
    if M < 1:
        raise ConfigError("simulate_paths needs M >= 1")
    if measure not in MEASURE_TAGS:
        raise ConfigError(f"measure must be one of {MEASURE_TAGS}")
    step_model = zero_drift(model) if measure == "Martingale" else model
    d = model_dim(model)
    K = grid.K
    dt = grid.dt
    sqdt = np.sqrt(dt)

    Z = np.empty((M, K, d))
    for m in range(M):
        Z[m] = path_normals(seed, path_offset + m, K, d)

    states = np.empty((M, K + 1, d))
    # raw chain x may leave a constrained state space; coefficients are
    # evaluated at the truncated value xplus and xplus is what gets stored
    x = np.tile(initial_state(model), (M, 1))
    xplus = truncate_states(step_model, x)
    states[:, 0, :] = xplus
    # overflow surfaces as the explicit non-finite check below, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(K):
            drift = _drift_grid(step_model, xplus)
            diff = _diffusion_term_grid(step_model, xplus, Z[:, k, :])
            x = x + drift * dt + sqdt * diff
            if not np.all(np.isfinite(x)):
                bad = np.argwhere(~np.isfinite(x))[0]
                raise SimulationError(
                    f"non-finite state at path {int(bad[0])}, step {k + 1}"
                )
            xplus = truncate_states(step_model, x)
            states[:, k + 1, :] = xplus
    increments = np.diff(states, axis=1)
    return PathBatch(grid=grid, states=states, increments=increments,
                     seed=seed, measure_tag=measure)


def sample_affine_model(d: int, seed: int, x0_value: float = 10.0) -> AffineMultiD:
    """Draw a d-dimensional affine model from the basket experiment's recipe.

    One stream seeded by ``seed`` draws, in order, the constant drift
    beta0 (entries N(0, 3e-3)), the linear drift rows beta_k
    (N(0, 3e-4)), and the diffusion factor vectors r_0 (N(0, 3e-2)) and
    r_k (N(0, 3e-3)); the diffusion loadings are the rank-one matrices
    alpha_k = r_k r_k^T, so they are positive semidefinite by
    construction.  The initial state is ``x0_value`` in every component.
    """
    if d < 1:
        raise ConfigError(f"sample_affine_model needs d >= 1, got {d}")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    beta0 = rng.normal(0.0, np.sqrt(3e-3), size=d)
    beta = rng.normal(0.0, np.sqrt(3e-4), size=(d, d))
    r0 = rng.normal(0.0, np.sqrt(3e-2), size=d)
    rks = rng.normal(0.0, np.sqrt(3e-3), size=(d, d))
    alpha0 = np.outer(r0, r0)
    alphas = np.stack([np.outer(rks[k], rks[k]) for k in range(d)])
    return AffineMultiD(
        d=d, x0=np.full(d, float(x0_value)),
        beta0=beta0, beta=beta, alpha0=alpha0, alphas=alphas,
    )


# ---------------------------------------------------------------------------
# serialization


def model_to_json(model: ModelSpec) -> dict:
    """JSON document for a model spec (stable field names)."""
    if isinstance(model, BrownianMotion):
        return {"kind": "BrownianMotion", "d": model.dims, "x0": model.x0.tolist()}
    if isinstance(model, Cev):
        return {"kind": "Cev", "x0": model.x0, "alpha": model.alpha, "sigma0": model.sigma0}
    if isinstance(model, Polynomial1D):
        return {
            "kind": "Polynomial1D", "x0": model.x0,
            "beta0": model.beta0, "beta1": model.beta1,
            "alpha0": model.alpha0, "alpha1": model.alpha1, "alpha2": model.alpha2,
            "state_space": model.state_space,
        }
    return {
        "kind": "AffineMultiD", "d": model.d, "x0": model.x0.tolist(),
        "beta0": model.beta0.tolist(), "beta": model.beta.tolist(),
        "alpha0": model.alpha0.tolist(),
        "alphas": model.alphas.tolist(),
    }


def model_from_json(doc: dict) -> ModelSpec:
    try:
        kind = doc["kind"]
    except KeyError as exc:
        raise ConfigError("model document lacks 'kind'") from exc
    try:
        if kind == "BrownianMotion":
            return BrownianMotion(dims=int(doc["d"]), x0=np.asarray(doc["x0"], dtype=float))
        if kind == "Cev":
            return Cev(x0=float(doc["x0"]), alpha=float(doc["alpha"]), sigma0=float(doc["sigma0"]))
        if kind == "Polynomial1D":
            return Polynomial1D(
                x0=float(doc["x0"]), beta0=float(doc["beta0"]), beta1=float(doc["beta1"]),
                alpha0=float(doc["alpha0"]), alpha1=float(doc["alpha1"]),
                alpha2=float(doc["alpha2"]), state_space=doc.get("state_space", "RealLine"),
            )
        if kind == "AffineMultiD":
            return AffineMultiD(
                d=int(doc["d"]), x0=np.asarray(doc["x0"], dtype=float),
                beta0=np.asarray(doc["beta0"], dtype=float),
                beta=np.asarray(doc["beta"], dtype=float),
                alpha0=np.asarray(doc["alpha0"], dtype=float),
                alphas=np.asarray(doc["alphas"], dtype=float),
            )
    except KeyError as exc:
        raise ConfigError(f"model document for kind {kind!r} lacks field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model document for kind {kind!r} has a malformed field: {exc}") from exc
    raise ConfigError(f"unknown model kind {kind!r}")


def model_dumps(model: ModelSpec) -> str:
    return json.dumps(model_to_json(model), indent=2, sort_keys=True)


def model_loads(text: str) -> ModelSpec:
    return model_from_json(json.loads(text))


PATH_BATCH_MAGIC = b"CHPB"
PATH_BATCH_VERSION = 1


def save_path_batch(batch: PathBatch, path) -> None:
    """Write states to a flat little-endian binary file.

    Layout: magic "CHPB", version u32, then M, K, d as u64, then the
    (M, K+1, d) states row-major as f64. Increments are not stored; they are
    exact diffs of the states by construction.
    """
    M, K1, d = batch.states.shape
    with open(path, "wb") as fh:
        fh.write(PATH_BATCH_MAGIC)
        fh.write(np.uint32(PATH_BATCH_VERSION).tobytes())
        fh.write(np.array([M, K1 - 1, d], dtype="<u8").tobytes())
        fh.write(np.ascontiguousarray(batch.states, dtype="<f8").tobytes())


def load_path_batch(path, grid: TimeGrid, seed: int = 0,
                    measure_tag: str = "Physical") -> PathBatch:
    """Read a path batch written by save_path_batch.

    The binary stores shapes and states only, so the time grid (and the
    bookkeeping seed/measure tag) must be supplied by the caller.
    """
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != PATH_BATCH_MAGIC:
            raise ConfigError(f"bad magic {magic!r}, expected {PATH_BATCH_MAGIC!r}")
        version = int(np.frombuffer(fh.read(4), dtype="<u4")[0])
        if version != PATH_BATCH_VERSION:
            raise ConfigError(f"unsupported path batch version {version}")
        M, K, d = (int(v) for v in np.frombuffer(fh.read(24), dtype="<u8"))
        if K != grid.K:
            raise ConfigError(f"file has K={K}, grid has K={grid.K}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    expected = M * (K + 1) * d
    if data.size != expected:
        raise ConfigError(f"file holds {data.size} floats, expected {expected}")
    states = data.reshape(M, K + 1, d).copy()
    return PathBatch(grid=grid, states=states, increments=np.diff(states, axis=1),
                     seed=seed, measure_tag=measure_tag)
