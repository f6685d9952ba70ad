import numpy as np
import pytest
from numpy.polynomial import Polynomial
from numpy.polynomial import chebyshev as cheb

from ratnet import nn
from ratnet.data import sample_function
from ratnet.errors import PoleError
from ratnet.nn import (ActivationSpec, AdamState, MlpParams, TrainConfig, adam_step, adamax_step,
                       backward, forward, init_params, loss, relu_rational_coeffs, train,
                       train_split)

SQRT = sample_function("sqrt_abs_shift")
KINDS = ["relu", "rat-fixed", "rat-learn"]


def perturbed_activation(kind, rng):
    if kind == "relu":
        return ActivationSpec("relu")
    a, b, _ = relu_rational_coeffs()
    return ActivationSpec(kind, np.array(a) + 0.05 * rng.normal(size=4),
                          np.array(b) + 0.05 * rng.normal(size=3))


def test_forward_trivial_cases():
    p = MlpParams(np.zeros(3), np.zeros(3), np.zeros(3), 0.7)
    assert np.all(forward(p, np.linspace(-1, 1, 5)) == 0.7)
    relu = MlpParams([1.0], [0.0], [1.0], 0.0)
    assert forward(relu, -3.0) == 0.0
    assert forward(relu, 2.0) == 2.0


def test_fixed_rational_network_is_a_rational_of_degree_2h_plus_1_2h():
    rng = np.random.default_rng(7)
    act = ActivationSpec("rat-fixed")
    p = MlpParams(rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2), 0.3, act)
    P = Polynomial(cheb.cheb2poly(act.num))
    Q = Polynomial(cheb.cheb2poly(act.den))
    lin = [Polynomial([b, w]) for w, b in zip(p.W1, p.b1)]
    ps = [P(l) for l in lin]
    qs = [Q(l) for l in lin]
    den = qs[0] * qs[1]
    num = p.W2[0] * ps[0] * qs[1] + p.W2[1] * ps[1] * qs[0] + p.b2 * den
    # each term is p_h times the other H - 1 denominators: degree 3 + 2(H - 1)
    assert num.degree() == 5 and den.degree() == 4
    x = np.linspace(-1, 1, 100)
    assert np.allclose(forward(p, x), num(x) / den(x), rtol=1e-10, atol=1e-12)


def test_loss_examples():
    p = MlpParams([0.0], [0.0], [0.0], 0.0)
    data = (np.array([0.0, 1.0]), np.array([-3.0, 4.0]))  # residuals 3, -4
    assert loss(p, data, "mse") == 12.5
    assert loss(p, data, "uniform") == 4.0
    exact = (np.array([0.0, 1.0]), np.zeros(2))
    assert loss(p, exact, "mse") == 0.0 and loss(p, exact, "uniform") == 0.0
    value, g = backward(p, exact, "mse")
    assert value == 0.0 and np.all(g == 0.0)


def fd_gradient(p, data, kind, h=1e-6):
    v = p.to_vector()
    g = np.zeros_like(v)
    for i in range(v.size):
        e = np.zeros_like(v)
        e[i] = h
        g[i] = (loss(p.with_vector(v + e), data, kind) - loss(p.with_vector(v - e), data, kind)) / (2 * h)
    return g


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("H", [2, 10])
def test_mse_gradient_matches_finite_differences(kind, H):
    rng = np.random.default_rng(100 * H + KINDS.index(kind))
    x = np.linspace(-1, 1, 201)
    data = (x, np.sqrt(np.abs(x - 0.25)))
    for _ in range(20):
        p = init_params(H, perturbed_activation(kind, rng), int(rng.integers(2 ** 31)))
        _, g = backward(p, data, "mse")
        fd = fd_gradient(p, data, "mse")
        if kind != "rat-learn":
            fd[3 * H + 1:] = 0.0
        floor = 1e-3 * np.max(np.abs(fd))
        assert np.all(np.abs(g - fd) <= 1e-5 * np.maximum(np.abs(fd), floor))


@pytest.mark.parametrize("kind", KINDS)
def test_uniform_subgradient_is_ascent_direction(kind):
    rng = np.random.default_rng(3)
    for seed in range(5):
        p = init_params(10, perturbed_activation(kind, rng), seed)
        L0, g = backward(p, SQRT, "uniform")
        step = 1e-6 / np.linalg.norm(g)
        L1 = loss(p.with_vector(p.to_vector() + step * g), SQRT, "uniform")
        assert L1 > L0


def test_adam_converges_to_lr_sized_steps_and_ignores_zero_gradient():
    state, x = AdamState.zeros(2), np.zeros(2)
    g = np.array([3.0, -0.01])
    for t in range(1, 2001):
        state, new = adam_step(state, x, g, 0.01, t)
        step, x = new - x, new
    assert np.allclose(np.abs(step), 0.01, rtol=1e-6)
    for fn in (adam_step, adamax_step):
        _, same = fn(AdamState.zeros(2), np.array([1.0, 2.0]), np.zeros(2), 0.1, 1)
        assert np.all(same == [1.0, 2.0])
    with pytest.raises(ValueError):
        adam_step(AdamState.zeros(1), np.zeros(1), np.zeros(1), 0.1, 0)


def test_three_step_hand_trace():
    # theta0 = 1, gradients 0.5, -0.2, 1.0, lr 0.1 (worked out by hand)
    expect = {adam_step: [0.9000000019999999, 0.8654394181165107, 0.7965256089766645],
              adamax_step: [0.900000002, 0.8736578709220805, 0.8284549193445897]}
    for fn, values in expect.items():
        state, theta = AdamState.zeros(1), np.array([1.0])
        for t, (g, want) in enumerate(zip([0.5, -0.2, 1.0], values), 1):
            state, theta = fn(state, theta, np.array([g]), 0.1, t)
            assert theta[0] == pytest.approx(want, abs=1e-15)


def test_zero_epochs_reports_initial_loss():
    p = init_params(10, seed=1)
    rep = train(p, SQRT, TrainConfig(epochs=0))
    assert rep.per_epoch_loss == [] and rep.min_loss_epoch == 0
    assert rep.final_loss == rep.initial_loss == loss(p, SQRT, "uniform")


@pytest.mark.parametrize("kind", KINDS)
def test_training_is_deterministic_and_consistent(kind):
    cfg = TrainConfig(epochs=30, loss="mse")
    a = train(init_params(4, ActivationSpec(kind), 9), SQRT, cfg)
    b = train(init_params(4, ActivationSpec(kind), 9), SQRT, cfg)
    assert a.per_epoch_loss == b.per_epoch_loss
    assert a.min_loss == min(a.per_epoch_loss)
    assert a.per_epoch_loss[a.min_loss_epoch - 1] == a.min_loss
    assert a.min_loss <= a.final_loss and 1 <= a.min_loss_epoch <= 30
    assert a.config.optimizer is nn.Optimizer.ADAM
    assert a.final_loss < a.initial_loss


def test_fixed_activation_coefficients_do_not_move():
    p = init_params(4, ActivationSpec("rat-fixed"), 2)
    rep = train(p, SQRT, TrainConfig(epochs=10))
    assert np.array_equal(rep.params.activation.num, p.activation.num)
    learn = train(init_params(4, ActivationSpec("rat-learn"), 2), SQRT, TrainConfig(epochs=10))
    assert not np.array_equal(learn.params.activation.num, p.activation.num)


def test_split_with_frozen_blocks_equals_input_layer_training():
    p = init_params(10, ActivationSpec("rat-learn"), 4)
    lr = 1e-2
    rep = train_split(p, SQRT, TrainConfig(epochs=15, mode="split", block_lr=(lr, 0.0, 0.0)))
    v, state, losses = p.to_vector(), AdamState.zeros(20), []
    for t in range(1, 16):
        _, g = backward(p.with_vector(v), SQRT, "uniform")
        state, v[:20] = adamax_step(state, v[:20], g[:20], lr, t)
        losses.append(loss(p.with_vector(v), SQRT, "uniform"))
    assert rep.per_epoch_loss == losses


def test_split_needs_learnable_activation():
    with pytest.raises(ValueError):
        train_split(init_params(2, ActivationSpec("rat-fixed")), SQRT)


def test_split_descends_in_most_epochs():
    # uniform loss with Adamax oscillates; measured fractions on seeds 1..5 were
    # 0.54 to 0.63, so the pinned threshold is one half
    fractions = []
    for seed in range(1, 6):
        rep = train_split(init_params(10, ActivationSpec("rat-learn"), seed), SQRT,
                          TrainConfig(epochs=200, mode="split"))
        L = np.array([rep.initial_loss] + rep.per_epoch_loss)
        fractions.append(np.mean(np.diff(L) <= 0))
    assert min(fractions) >= 0.5


def test_pole_during_training_aborts_and_flags(monkeypatch):
    calls = {"n": 0}
    real = nn.backward

    def flaky(*args, **kw):
        calls["n"] += 1
        if calls["n"] == 4:
            raise PoleError("synthetic pole")
        return real(*args, **kw)

    monkeypatch.setattr(nn, "backward", flaky)
    rep = train(init_params(3, ActivationSpec("rat-learn"), 0), SQRT, TrainConfig(epochs=10))
    assert rep.epochs_run == 3
    assert "epoch 4" in rep.pole_error


def test_activation_validation():
    with pytest.raises(ValueError, match="real root"):
        ActivationSpec("rat-fixed", [0, 1, 0, 0], [0.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        ActivationSpec("rat-fixed", [0, 1, 0], [1.0, 0.0, 0.0])
    # a root outside the window is accepted, and evaluation there raises
    act = ActivationSpec("rat-fixed", [1.0, 0, 0, 0], [-12.0, 1.0, 0.0])
    p = MlpParams([12.0], [0.0], [1.0], 0.0, act)
    with pytest.raises(PoleError):
        forward(p, 1.0)


def test_fixed_activation_tracks_relu_within_best_error():
    a, b, e_relu = relu_rational_coeffs()
    act = ActivationSpec("rat-fixed")
    p = MlpParams([1.0], [0.0], [1.0], 0.0, act)
    train_grid = np.linspace(-1, 1, 2001)
    assert np.max(np.abs(forward(p, train_grid) - np.maximum(train_grid, 0))) <= e_relu + 1e-12
    dense = np.linspace(-1, 1, 200001)
    assert np.max(np.abs(forward(p, dense) - np.maximum(dense, 0))) <= e_relu + 1e-6


def test_params_round_trip():
    p = init_params(5, ActivationSpec("rat-learn"), 11)
    assert np.array_equal(p.with_vector(p.to_vector()).to_vector(), p.to_vector())
    back = MlpParams.from_dict(p.to_dict())
    assert np.array_equal(back.to_vector(), p.to_vector())
    assert nn.n_params(10) == 38
    with pytest.raises(ValueError):
        MlpParams([1.0, 2.0], [0.0], [1.0], 0.0)


def test_config_defaults_pair_loss_and_optimizer():
    assert TrainConfig(loss="uniform").optimizer is nn.Optimizer.ADAMAX
    assert TrainConfig(loss="mse").optimizer is nn.Optimizer.ADAM
    assert TrainConfig(loss="mse", optimizer="adamax").optimizer is nn.Optimizer.ADAMAX
    with pytest.raises(ValueError):
        TrainConfig(epochs=-1)
