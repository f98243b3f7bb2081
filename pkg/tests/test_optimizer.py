import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphpade.errors import InvalidParameterError, PoleError
from graphpade.filters import RationalFilter
from graphpade.graph import build_laplacian, generate_block_graph
from graphpade.optimizer import (
    FitReport,
    TrainConfig,
    gauss_newton_direction,
    gradients,
    improvement,
    pad_orders,
    spectral_loss,
    train,
    write_reports,
)
from graphpade.remez import DiscreteTarget, traverse_orders
from graphpade.spectral import decompose

T = np.linspace(0, 1, 60)


def numeric_grad(f, target, xhat, h=1e-6):
    theta = np.concatenate([f.psi, f.phi])
    g = np.zeros_like(theta)
    for i in range(len(theta)):
        up, dn = theta.copy(), theta.copy()
        up[i] += h
        dn[i] -= h
        lu = spectral_loss(RationalFilter(up[: f.m + 1], up[f.m + 1 :]), target, xhat)
        ld = spectral_loss(RationalFilter(dn[: f.m + 1], dn[f.m + 1 :]), target, xhat)
        g[i] = (lu - ld) / (2 * h)
    return g


def test_loss_zero_at_exact_fit():
    f = RationalFilter([1.0, 0.5], [0.25])
    assert spectral_loss(f, DiscreteTarget(T, f(T))) == 0.0


def test_loss_constant_offset():
    assert spectral_loss(RationalFilter([0.0]), DiscreteTarget(T, np.ones_like(T))) == 1.0


def test_loss_rejects_pole_and_bad_xhat():
    with pytest.raises(PoleError):
        spectral_loss(RationalFilter([1.0], [-1.0]), DiscreteTarget(T, T))
    with pytest.raises(InvalidParameterError):
        spectral_loss(RationalFilter([1.0]), DiscreteTarget(T, T), xhat=np.ones(3))


@given(
    st.integers(0, 4),
    st.integers(0, 3),
    st.integers(0, 2**31 - 1),
    st.booleans(),
)
def test_gradients_match_central_differences(m, n, seed, use_xhat):
    rng = np.random.default_rng(seed)
    psi = rng.uniform(-1, 1, m + 1)
    phi = rng.uniform(-0.3, 0.3, n)  # |Q - 1| <= 0.9 on [0, 1], so Q stays safe
    f = RationalFilter(psi, phi)
    target = DiscreteTarget(T, np.abs(T - 0.5))
    xhat = rng.uniform(0.5, 1.5, len(T)) if use_xhat else None
    analytic = np.concatenate(gradients(f, target, xhat))
    numeric = numeric_grad(f, target, xhat)
    assert np.all(np.abs(analytic - numeric) <= 1e-5 * (1 + np.abs(analytic)))


def test_gradients_vanish_at_exact_fit():
    f = RationalFilter([0.3, -0.2, 0.1], [0.4])
    dpsi, dphi = gradients(f, DiscreteTarget(T, f(T)))
    assert np.max(np.abs(np.concatenate([dpsi, dphi]))) <= 1e-10


def test_gradient_constant_model():
    y = np.sin(T)
    xhat = 1 + T
    f = RationalFilter([0.2])
    (d0,), _ = gradients(f, DiscreteTarget(T, y), xhat)
    e = 0.2 * xhat - y
    assert d0 == pytest.approx(2 * np.mean(e * xhat), rel=1e-12)


def test_gauss_newton_solves_linear_least_squares():
    y = np.cos(3 * T)
    f = RationalFilter(np.zeros(4))
    dpsi, _ = gauss_newton_direction(f, DiscreteTarget(T, y))
    ref = np.linalg.lstsq(np.vander(T, 4, increasing=True), y, rcond=None)[0]
    np.testing.assert_allclose(-dpsi, ref, atol=1e-9)


def test_pad_orders_keeps_values():
    f = RationalFilter([1.0, 2.0], [0.5])
    g = pad_orders(f, 3, 2)
    assert (g.m, g.n) == (3, 2)
    np.testing.assert_allclose(g(T), f(T))
    with pytest.raises(InvalidParameterError):
        pad_orders(f, 0, 1)


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        TrainConfig(learning_rate=-1)
    with pytest.raises(InvalidParameterError):
        TrainConfig(window=0)
    with pytest.raises(InvalidParameterError):
        TrainConfig(preconditioner="adam")


@pytest.mark.parametrize("pre", ["gauss-newton", "none"])
def test_zero_learning_rate_returns_initial_loss(pre):
    f0 = RationalFilter([0.1, 0.2], [0.1])
    target = DiscreteTarget(T, np.abs(T - 0.5))
    rep = train(f0, target, cfg=TrainConfig(learning_rate=0.0, max_epochs=200, preconditioner=pre))
    assert rep.spectral_mse == spectral_loss(f0, target)
    assert rep.epochs == 50


def test_exact_start_stops_within_window():
    f0 = RationalFilter([0.3, 0.1], [0.2])
    rep = train(f0, DiscreteTarget(T, f0(T)))
    assert rep.spectral_mse == 0.0 and rep.epochs <= 50


@pytest.mark.parametrize("pre", ["gauss-newton", "none"])
def test_trace_running_min_and_best_returned(pre):
    target = DiscreteTarget(T, np.sign(T - 0.5))
    rep = train(RationalFilter(np.full(4, 0.01), np.zeros(3)), target,
                cfg=TrainConfig(max_epochs=300, preconditioner=pre))
    trace = np.array(rep.loss_trace)
    assert len(trace) == rep.epochs + 1
    assert rep.spectral_mse == trace.min()
    assert spectral_loss(RationalFilter.from_dict(rep.coefficients), target) == pytest.approx(trace.min())
    assert rep.spectral_mse <= trace[0]


def test_training_rejects_poled_start():
    with pytest.raises(PoleError):
        train(RationalFilter([1.0], [-1.0]), DiscreteTarget(T, T))


@pytest.fixture(scope="module")
def sign_setup():
    g = generate_block_graph(5, 100, 8, 3, seed=0)
    t = decompose(build_laplacian(g)).normalized()
    target = DiscreteTarget(t, np.sign(t - 0.5))
    f0, _, _ = traverse_orders(target.unique(), 5, 5)
    return target, pad_orders(f0, 5, 5)


def test_remez_init_never_worse(sign_setup):
    target, f0 = sign_setup
    rep = train(f0, target, cfg=TrainConfig(max_epochs=500))
    assert rep.spectral_mse <= spectral_loss(f0, target)


def test_remez_init_beats_zero_init_on_sign(sign_setup):
    target, f0 = sign_setup
    cfg = TrainConfig()
    with_remez = train(f0, target, cfg=cfg).spectral_mse
    without = train(RationalFilter(np.full(6, 1e-2), np.zeros(5)), target, cfg=cfg).spectral_mse
    assert with_remez < without


@pytest.mark.slow
def test_remez_init_loss_scale_on_1000_nodes():
    g = generate_block_graph(10, 100, 8, 3, seed=0)
    t = decompose(build_laplacian(g)).normalized()
    target = DiscreteTarget(t, np.abs(t - 0.5))
    f0, _, _ = traverse_orders(target.unique(), 5, 5)
    loss = spectral_loss(f0, target)
    # reference scale 4.5e-6, realizations differ
    assert 4.5e-7 <= loss <= 4.5e-5


def test_improvement_formula():
    assert improvement(2.0, 0.5) == 0.75
    assert improvement(0.0, 0.0) == 0.0


def test_report_serialization(tmp_path):
    rep = FitReport("x", {"psi": [1.0]}, 0.5, 0.5, 2, [1.0, 0.75, 0.5])
    assert json.loads(rep.to_json())["spectral_mse"] == 0.5
    rep.write_trace_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "epoch,loss" and lines[2] == "1,0.75"
    write_reports([rep], tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text())[0]["method"] == "x"
    assert rep.ok and not FitReport("y", error="boom").ok
