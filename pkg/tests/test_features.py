"""Neuron sampling and per-path W/Q integral contracts."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from chaoshedge.errors import ConfigError
from chaoshedge.features import (
    Distribution,
    FeatureInit,
    RandomNeuron,
    apply_activation,
    compute_Q,
    compute_W,
    compute_integrals,
    neuron_value,
    neuron_values_on_grid,
    sample_feature_bank,
)
from chaoshedge.models import (
    BrownianMotion,
    Cev,
    PathBatch,
    TimeGrid,
    diffusion_matrix_at,
    simulate_paths,
)

CEV_32 = Cev(x0=100.0, alpha=-0.02, sigma0=0.4)


def const_neuron(value: float, d: int = 1) -> RandomNeuron:
    """Relu neuron with a=0 so phi is constant at `value` (for value >= 0)."""
    return RandomNeuron(a=np.zeros(d), b=np.full(d, value))


def manual_batch(states: np.ndarray, T: float) -> PathBatch:
    states = np.asarray(states, dtype=float)
    grid = TimeGrid(T=T, K=states.shape[1] - 1)
    return PathBatch(grid=grid, states=states, increments=np.diff(states, axis=1),
                     seed=0, measure_tag="Physical")


# ---------------------------------------------------------------------------
# activations and neuron values


def test_activation_values():
    assert apply_activation("Sigmoid", 0.0) == pytest.approx(0.5)
    assert apply_activation("Relu", -2.0) == 0.0
    assert apply_activation("Relu", 3.0) == 3.0
    assert apply_activation("Tanh", 0.0) == 0.0
    with pytest.raises(ConfigError):
        apply_activation("Swish", 0.0)


def test_neuron_value_examples():
    assert_allclose(neuron_value(const_neuron(0.0, d=3), "Sigmoid", 17.0), [0.5] * 3)
    relu = RandomNeuron(a=np.array([1.0]), b=np.array([-0.5]))
    assert_allclose(neuron_value(relu, "Relu", 0.25), [0.0])
    sig = RandomNeuron(a=np.array([2.0]), b=np.array([-1.0]))
    assert_allclose(neuron_value(sig, "Sigmoid", 1.0), [1.0 / (1.0 + np.exp(-1.0))])


def test_neuron_values_on_grid_matches_pointwise():
    neuron = RandomNeuron(a=np.array([0.7, -0.3]), b=np.array([0.1, 0.9]))
    times = np.linspace(0.0, 2.0, 9)
    grid_vals = neuron_values_on_grid(neuron, "Tanh", times)
    assert grid_vals.shape == (9, 2)
    for i, t in enumerate(times):
        assert_allclose(grid_vals[i], neuron_value(neuron, "Tanh", t))


def test_neuron_validation():
    with pytest.raises(ConfigError):
        RandomNeuron(a=np.array([1.0, 2.0]), b=np.array([1.0]))
    with pytest.raises(ConfigError):
        RandomNeuron(a=np.array([np.inf]), b=np.array([1.0]))


# ---------------------------------------------------------------------------
# bank sampling


def test_sample_feature_bank_shapes():
    bank = sample_feature_bank(6, [50] * 6, 1, "Sigmoid", FeatureInit(), seed=7)
    assert bank.n_neurons == 300
    assert bank.sizes == (50,) * 6
    single = sample_feature_bank(1, [1], 3, "Relu", FeatureInit(), seed=0)
    assert single.orders[0][0].a.shape == (3,)


def test_sample_feature_bank_deterministic():
    kwargs = dict(N=3, sizes=[4, 5, 6], d=2, activation="Tanh",
                  init=FeatureInit(), seed=123)
    b1 = sample_feature_bank(**kwargs)
    b2 = sample_feature_bank(**kwargs)
    for g1, g2 in zip(b1.orders, b2.orders):
        for n1, n2 in zip(g1, g2):
            assert_array_equal(n1.a, n2.a)
            assert_array_equal(n1.b, n2.b)


def test_sample_feature_bank_orders_use_independent_substreams():
    # shrinking the bank must not change the neurons of the orders kept
    big = sample_feature_bank(3, [4, 4, 4], 1, "Sigmoid", FeatureInit(), seed=5)
    small = sample_feature_bank(2, [4, 4], 1, "Sigmoid", FeatureInit(), seed=5)
    for n_big, n_small in zip(big.orders[0], small.orders[0]):
        assert_array_equal(n_big.a, n_small.a)
    for n_big, n_small in zip(big.orders[1], small.orders[1]):
        assert_array_equal(n_big.b, n_small.b)


def test_sample_feature_bank_rejects_bad_distributions():
    with pytest.raises(ConfigError, match="positive density"):
        Distribution(kind="Normal", mean=0.0, std=0.0)
    with pytest.raises(ConfigError, match="positive.*density"):
        Distribution(kind="Uniform")
    with pytest.raises(ConfigError):
        sample_feature_bank(1, [2, 2], 1, "Sigmoid", FeatureInit(), seed=1)
    with pytest.raises(ConfigError):
        sample_feature_bank(1, [0], 1, "Sigmoid", FeatureInit(), seed=1)


def test_normal_init_parameters_respected():
    init = FeatureInit(a_dist=Distribution("Normal", mean=2.0, std=0.1),
                       b_dist=Distribution("Normal", mean=-1.0, std=0.2))
    bank = sample_feature_bank(1, [400], 1, "Sigmoid", init, seed=9)
    a = np.array([n.a[0] for n in bank.orders[0]])
    b = np.array([n.b[0] for n in bank.orders[0]])
    assert a.mean() == pytest.approx(2.0, abs=5 * 0.1 / 20)
    assert b.mean() == pytest.approx(-1.0, abs=5 * 0.2 / 20)


# ---------------------------------------------------------------------------
# W


def test_compute_w_constant_neuron_telescopes():
    batch = simulate_paths(BrownianMotion(dims=1), TimeGrid(T=1.0, K=16), M=7, seed=1)
    w = compute_W(const_neuron(1.0), "Relu", batch)
    assert_allclose(w, batch.states[:, :, 0] - batch.states[:, :1, 0], atol=1e-12)


def test_compute_w_zero_neuron():
    batch = simulate_paths(BrownianMotion(dims=1), TimeGrid(T=1.0, K=8), M=4, seed=2)
    zero = RandomNeuron(a=np.zeros(1), b=np.full(1, -1.0))  # Relu(-1) = 0
    assert_array_equal(compute_W(zero, "Relu", batch), np.zeros((4, 9)))


def test_compute_w_hand_computed_fixture():
    # three steps, d=1, hand-listed increments, sigmoid neuron
    states = np.array([[[1.0], [1.4], [0.9], [1.2]]])  # increments 0.4, -0.5, 0.3
    batch = manual_batch(states, T=0.75)  # dt = 0.25, times 0, .25, .5, .75
    neuron = RandomNeuron(a=np.array([2.0]), b=np.array([-0.5]))
    sig = lambda u: 1.0 / (1.0 + np.exp(-u))
    w = compute_W(neuron, "Sigmoid", batch)
    expected = [
        0.0,
        sig(-0.5) * 0.4,
        sig(-0.5) * 0.4 + sig(0.0) * (-0.5),
        sig(-0.5) * 0.4 + sig(0.0) * (-0.5) + sig(0.5) * 0.3,
    ]
    assert_allclose(w[0], expected, rtol=1e-14)


def test_compute_w_scales_linearly_in_neuron_values():
    batch = simulate_paths(CEV_32, TimeGrid(T=1.0, K=10), M=5, seed=4)
    w1 = compute_W(const_neuron(1.0), "Relu", batch)
    w2 = compute_W(const_neuron(2.0), "Relu", batch)
    assert_allclose(w2, 2.0 * w1, rtol=1e-14)


def test_compute_w_dimension_mismatch():
    batch = simulate_paths(BrownianMotion(dims=2), TimeGrid(T=1.0, K=4), M=2, seed=0)
    with pytest.raises(ConfigError):
        compute_W(const_neuron(1.0, d=1), "Relu", batch)


# ---------------------------------------------------------------------------
# Q


def test_compute_q_bm_unit_neuron_is_time():
    batch = simulate_paths(BrownianMotion(dims=1), TimeGrid(T=2.0, K=10), M=3, seed=6)
    q = compute_Q(const_neuron(1.0), "Relu", batch, BrownianMotion(dims=1))
    assert_allclose(q, np.tile(batch.grid.times, (3, 1)), atol=1e-13)


def test_compute_q_zero_neuron():
    batch = simulate_paths(BrownianMotion(dims=1), TimeGrid(T=1.0, K=5), M=2, seed=7)
    zero = RandomNeuron(a=np.zeros(1), b=np.full(1, -3.0))
    assert_array_equal(compute_Q(zero, "Relu", batch, BrownianMotion(dims=1)),
                       np.zeros((2, 6)))


def test_compute_q_cev_frozen_path_direct_sum():
    batch = simulate_paths(CEV_32, TimeGrid(T=1.0, K=12), M=4, seed=8)
    q = compute_Q(const_neuron(1.0), "Relu", batch, CEV_32)
    dt = batch.grid.dt
    # direct sum oracle: sigma0^2 * sum_{j<k} X_j^+ * dt
    x = np.maximum(batch.states[:, :-1, 0], 0.0)
    expected = np.concatenate(
        [np.zeros((4, 1)), CEV_32.sigma0**2 * np.cumsum(x * dt, axis=1)], axis=1
    )
    assert_allclose(q, expected, rtol=1e-13)


def test_compute_q_monotone():
    for model, dims in ((CEV_32, 1), (BrownianMotion(dims=2), 2)):
        batch = simulate_paths(model, TimeGrid(T=1.0, K=30), M=20, seed=9)
        neuron = RandomNeuron(a=np.full(dims, 0.5), b=np.full(dims, -0.1))
        q = compute_Q(neuron, "Tanh", batch, model)
        assert np.all(np.diff(q, axis=1) >= -1e-15)
        assert_array_equal(q[:, 0], 0.0)


def test_compute_q_affine_matches_pointwise_diffusion_matrix():
    rng = np.random.default_rng(3)
    r = rng.normal(size=(3, 2))
    alphas = np.stack([np.outer(r[0], r[0]), np.outer(r[1], r[1])])
    from chaoshedge.models import AffineMultiD

    model = AffineMultiD(d=2, x0=np.array([1.0, 2.0]), beta0=np.zeros(2),
                         beta=np.zeros((2, 2)), alpha0=np.outer(r[2], r[2]),
                         alphas=alphas)
    batch = simulate_paths(model, TimeGrid(T=1.0, K=6), M=3, seed=10)
    neuron = RandomNeuron(a=np.array([0.4, -0.8]), b=np.array([0.2, 0.3]))
    q = compute_Q(neuron, "Sigmoid", batch, model)
    # brute-force oracle through diffusion_matrix_at at every (path, node)
    dt = batch.grid.dt
    for m in range(3):
        acc = 0.0
        expected = [0.0]
        for k in range(6):
            phi = neuron_value(neuron, "Sigmoid", batch.grid.times[k])
            a = diffusion_matrix_at(model, batch.grid.times[k], batch.states[m, k])
            acc += float(phi @ a @ phi) * dt
            expected.append(acc)
        assert_allclose(q[m], expected, rtol=1e-12)


def test_ito_isometry_bm():
    # Var(W_T) over 1e5 BM paths agrees with the deterministic Q_T within 5 SE
    model = BrownianMotion(dims=1)
    batch = simulate_paths(model, TimeGrid(T=1.0, K=64), M=100_000, seed=11)
    neuron = RandomNeuron(a=np.array([0.6]), b=np.array([-0.2]))
    wq = compute_integrals(neuron, "Sigmoid", batch, model)
    q_T = wq.Q[0, -1]
    sample_var = wq.W[:, -1].var()
    se = q_T * np.sqrt(2.0 / batch.n_paths)
    assert abs(sample_var - q_T) <= 5.0 * se
