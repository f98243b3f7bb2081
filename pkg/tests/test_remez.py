import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphpade.errors import InvalidParameterError, NoFitError, PoleError, SingularSystemError
from graphpade.filters import fit_poly_least_squares
from graphpade.remez import (
    DiscreteTarget,
    decrement_orders,
    exact_level,
    exchange,
    remez_fit,
    remez_poly,
    solve_linearized,
    traverse_orders,
)
from graphpade.theory import newman_sup_error

GRID201 = np.linspace(0, 1, 201)
GRID500 = np.linspace(0, 1, 500)


def abs_target(x):
    return DiscreteTarget(x, np.abs(x - 0.5))


def control_residuals(f, state, target):
    return target.ys[state.control_index] - f(state.control_points)


def test_discrete_target_validation():
    with pytest.raises(InvalidParameterError):
        DiscreteTarget([1.0, 0.0], [0.0, 0.0])
    with pytest.raises(InvalidParameterError):
        DiscreteTarget([0.0, 1.0], [0.0, np.inf])
    with pytest.raises(InvalidParameterError):
        DiscreteTarget([0.0, 1.0], [0.0])


def test_unique_merges_close_abscissae():
    t = DiscreteTarget([0.0, 0.5, 0.5 + 1e-14, 1.0], [0.0, 1.0, 3.0, 0.0]).unique()
    np.testing.assert_allclose(t.ts, [0.0, 0.5, 1.0])
    np.testing.assert_allclose(t.ys, [0.0, 2.0, 0.0])


def test_linearized_exact_polynomial():
    xs = np.array([0.0, 0.3, 0.7, 1.0])
    psi, phi, E = solve_linearized(xs, 1 - xs + 2 * xs**2, 2, 0, 0.0)
    assert abs(E) < 1e-9
    np.testing.assert_allclose(psi, [1, -1, 2], atol=1e-9)
    assert len(phi) == 0


def test_linearized_constant_on_two_points():
    psi, phi, E = solve_linearized(np.array([0.0, 1.0]), np.array([0.5, 0.5]), 0, 0, 0.0)
    assert psi[0] == pytest.approx(0.5) and E == pytest.approx(0.0, abs=1e-15)


def test_linearized_sign_matches_brute_force():
    x = GRID500
    idx = np.round(np.linspace(0, 499, 4)).astype(int)
    xs, ys = x[idx], np.sign(x[idx] - 0.5)
    E = 0.0
    for _ in range(100):
        psi, phi, E_next = solve_linearized(xs, ys, 1, 1, E)
        if abs(E_next - E) < 1e-6:
            break
        E = E_next
    # Nelder-Mead from 300 random starts on the 4-point minimax gave 0.4984984984985
    assert abs(E_next) == pytest.approx(0.4984984984985, rel=0.1)
    assert abs(E_next) == pytest.approx(0.4984984984985, rel=1e-10)


def test_linearized_singular_on_duplicates():
    with pytest.raises(SingularSystemError):
        solve_linearized(np.array([0.0, 0.0, 1.0, 1.0]), np.array([0.0, 0.0, 1.0, 1.0]), 1, 1, 0.0)


def test_linearized_needs_exact_count():
    with pytest.raises(InvalidParameterError):
        solve_linearized(np.array([0.0, 1.0]), np.array([0.0, 1.0]), 1, 0, 0.0)


def test_recovers_representable_rational():
    x = np.linspace(0, 1, 200)
    f, state = remez_fit(DiscreteTarget(x, 1 / (1 + x)), 0, 1)
    np.testing.assert_allclose(f.psi, [1.0], atol=1e-6)
    np.testing.assert_allclose(f.phi, [1.0], atol=1e-6)
    assert state.max_residual <= 1e-6


# Differential-correction linear programs on the same grid agree to 1e-12.
@pytest.mark.parametrize(
    "m,n,expect",
    [(2, 1, 0.0625), (2, 2, 0.021843340650171), (4, 4, 0.0042446956294)],
)
def test_abs_minimax_matches_lp_oracle(m, n, expect):
    target = abs_target(GRID201)
    f, state = remez_fit(target, m, n)
    assert state.status == "converged"
    assert state.max_residual == pytest.approx(expect, rel=1e-9)


@pytest.mark.parametrize("m,n", [(2, 2), (4, 4), (1, 2)])
def test_equioscillation_at_control_points(m, n):
    target = abs_target(GRID500)
    f, state = remez_fit(target, m, n)
    r = control_residuals(f, state, target)
    assert np.all(np.sign(r[1:]) == -np.sign(r[:-1]))
    np.testing.assert_allclose(np.abs(r), abs(state.E), atol=1e-6 * (1 + abs(state.E)))
    assert abs(state.E) <= state.max_residual + 1e-12


def test_degenerate_cell_raises_pole_with_state():
    # the grid is symmetric, so the (3, 3) optimum collapses to (2, 2)
    with pytest.raises(PoleError) as info:
        remez_fit(abs_target(GRID500), 3, 3)
    assert info.value.state.status == "relaxed-stop"


def test_allow_poles_returns_flagged_iterate():
    target = abs_target(GRID500)
    f, state = remez_fit(target, 3, 3, allow_poles=True)
    assert state.has_pole and state.inner_converged
    r = target.ys[state.control_index] - f.numerator(state.control_points) / f.denominator(state.control_points)
    np.testing.assert_allclose(np.abs(r), abs(state.E), atol=1e-6 * (1 + abs(state.E)))


def test_abs_beats_degree_ten_least_squares():
    target = abs_target(GRID500)
    _, state = remez_fit(target, 5, 5)
    ls = fit_poly_least_squares(target.ts, target.ys, 10)
    assert state.max_residual < np.max(np.abs(ls(target.ts) - target.ys))


def test_abs_on_symmetric_interval_within_newman_factor():
    x = np.linspace(-1, 1, 2001)
    f, state = remez_fit(DiscreteTarget(x, np.abs(x)), 4, 4)
    assert state.max_residual <= 3 * newman_sup_error(5, 1.0, 2001)


@given(st.floats(-2.0, 2.0), st.integers(0, 2), st.integers(0, 2))
def test_leveled_error_bounded_by_max_residual(a, m, n):
    x = np.linspace(0, 1, 120)
    target = DiscreteTarget(x, np.exp(a * x) * np.cos(3 * x))
    try:
        f, state = remez_fit(target, m, n)
    except (SingularSystemError, PoleError):
        return
    assert abs(state.E) <= state.max_residual + 1e-9
    assert len(state.control_points) == m + n + 2
    assert np.all(np.diff(state.control_points) > 0)
    assert np.isin(state.control_points, x).all()
    if state.status == "converged":
        r = control_residuals(f, state, target)
        np.testing.assert_allclose(np.abs(r), abs(state.E), atol=1e-6 * (1 + abs(state.E)))


def test_best_so_far_is_non_increasing_in_trace():
    _, state = remez_fit(DiscreteTarget(GRID500, np.sign(GRID500 - 0.5)), 3, 3)
    seen = [t["max_residual"] for t in state.trace if not t.get("pole") and "max_residual" in t]
    running = np.minimum.accumulate(seen)
    assert state.max_residual == pytest.approx(running[-1])


def test_remez_is_deterministic():
    target = DiscreteTarget(GRID500, np.sign(GRID500 - 0.5))
    a = remez_fit(target, 4, 3)[1].to_dict()
    b = remez_fit(target, 4, 3)[1].to_dict()
    assert a == b


def test_exchange_picks_alternating_extrema():
    r = np.array([0.1, 0.5, 0.2, -0.1, -0.7, -0.3, 0.4, 0.9, 0.1, -0.2])
    idx = exchange(r, np.array([0, 3, 6, 9]), 4)
    np.testing.assert_array_equal(idx, [1, 4, 7, 9])


def test_exchange_pads_from_previous_controls():
    r = np.array([0.1, 0.2, 0.3, 0.2, 0.1])
    idx = exchange(r, np.array([0, 2, 4]), 3)
    assert len(idx) == 3 and 2 in idx


def test_exact_level_matches_linearized_fixed_point():
    x = GRID201
    idx = np.round(np.linspace(0, 200, 6)).astype(int)
    xs, ys = x[idx], np.abs(x[idx] - 0.5)
    psi, phi, E = exact_level(xs, ys, 2, 2)
    q = 1 + phi[0] * xs + phi[1] * xs**2
    r = ys - (psi[0] + psi[1] * xs + psi[2] * xs**2) / q
    np.testing.assert_allclose(r, (-1.0) ** np.arange(6) * E, atol=1e-12)


# minimax polynomials with closed forms
def test_poly_abs_degree_two():
    u = np.linspace(-1, 1, 2001)
    _, state = remez_poly(DiscreteTarget(u, np.abs(u)), 2)
    assert state.max_residual == pytest.approx(1 / 8, abs=1e-9)


def test_poly_quartic_by_cubic():
    # x^4 - T_4(x) / 8 is the best cubic; error 2^-3
    u = np.cos(np.linspace(np.pi, 0, 2001))
    _, state = remez_poly(DiscreteTarget(u, u**4), 3)
    assert state.max_residual == pytest.approx(1 / 8, abs=1e-9)


def test_poly_rejects_unit_interval_violation():
    with pytest.raises(InvalidParameterError):
        remez_poly(DiscreteTarget([0.0, 2.0], [0.0, 1.0]), 0)


def test_decrement_schedule():
    assert decrement_orders(2, 1) == [(2, 1), (2, 0), (1, 0), (0, 0)]
    assert decrement_orders(0, 0) == [(0, 0)]


def test_traverse_representable_low_order():
    x = np.linspace(0, 1, 100)
    f, state, cells = traverse_orders(DiscreteTarget(x, 1 + x - x**2), 3, 2)
    assert state.max_residual <= 1e-6
    assert state.m + state.n <= 2
    assert len(cells) == 12


def test_traverse_sign_beats_polynomial_row(block500):
    _, es = block500
    t = es.normalized()
    target = DiscreteTarget(t, np.sign(t - 0.5)).unique()
    _, state, cells = traverse_orders(target, 6, 6)
    poly_best = min(c["max_residual"] for (m, n), c in cells.items() if n == 0 and c["max_residual"] is not None)
    assert state.max_residual < poly_best


def test_traverse_reports_singular_cells():
    target = DiscreteTarget([0.0, 0.0, 1.0, 1.0], [0.0, 0.0, 1.0, 1.0])
    _, _, cells = traverse_orders(target, 1, 1, leveling="linearized")
    assert cells[(1, 1)]["status"] == "singular-skip"
    assert cells[(0, 0)]["max_residual"] is not None


def test_traverse_threads_match_serial():
    target = DiscreteTarget(GRID201, np.sign(GRID201 - 0.5))
    a = traverse_orders(target, 3, 3, threads=1)
    b = traverse_orders(target, 3, 3, threads=4)
    assert a[2] == b[2]
    np.testing.assert_array_equal(a[0].psi, b[0].psi)


def test_traverse_no_fit():
    with pytest.raises(NoFitError):
        traverse_orders(DiscreteTarget([0.0], [1.0]), 2, 2)
