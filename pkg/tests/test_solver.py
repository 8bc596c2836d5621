import math

import numpy as np
import pytest

from ergodic_games import fixtures
from ergodic_games.errors import NoConvergence
from ergodic_games.shapley import game_operator, hilbert, value_iteration
from ergodic_games.solver import (
    check_solution,
    extract_strategies,
    solvability_probe,
    solve_ergodic,
    uniqueness_probe,
)

from conftest import matching_pennies_game

FAST = {"max_iter": 20_000, "stall_window": 500}


# ─── solve_ergodic ───────────────────────────────────────────────────────────

def test_circle_with_payoff():
    sol = solve_ergodic(fixtures.t_circle([1.0, 0.0]))
    assert sol.lam == pytest.approx(0.5, abs=1e-7)
    assert sol.u.rep[0] - sol.u.rep[1] == pytest.approx(0.5, abs=1e-6)
    assert sol.iterations < 10_000
    assert sol.u.rep.min() == 0.0


def test_circle_game_backed_matches_closed_form(circle_g10):
    sol = solve_ergodic(game_operator(circle_g10))
    assert sol.lam == pytest.approx(0.5, abs=1e-7)
    assert sol.bias.tolist() == pytest.approx([0.5, 0.0], abs=1e-6)


def test_log_game():
    sol = solve_ergodic(fixtures.log_game())
    assert sol.lam == pytest.approx(0.0, abs=1e-7)
    assert sol.u.rep[1] - sol.u.rep[0] == pytest.approx(2 - math.e, abs=1e-6)


def test_triangle_below_diagonal():
    sol = solve_ergodic(fixtures.t_triangle([-1.0, 0.0]))
    assert sol.lam == pytest.approx(-0.5, abs=1e-7)
    assert sol.u.rep[0] - sol.u.rep[1] == pytest.approx(-0.5, abs=1e-6)


def test_triangle_above_diagonal_does_not_converge():
    with pytest.raises(NoConvergence) as err:
        solve_ergodic(fixtures.t_triangle([1.0, 0.0]), **FAST)
    exc = err.value
    assert exc.exit_code == 2
    assert exc.residual == pytest.approx(1.0)
    assert len(exc.trace) > 0
    assert exc.best_u is not None


def test_max_iter_is_respected():
    with pytest.raises(NoConvergence) as err:
        solve_ergodic(fixtures.t_square([1.0, 0.0]), max_iter=50, stall_window=0)
    assert err.value.iterations == 50


def test_residual_trace_is_nonincreasing(gamma):
    sol = solve_ergodic(game_operator(gamma))
    assert sol.monotone
    trace = np.array(sol.trace)
    assert (np.diff(trace) <= 1e-8).all()


def test_gamma_game_value_is_zero(gamma):
    sol = solve_ergodic(game_operator(gamma))
    assert sol.lam == pytest.approx(0.0, abs=1e-7)
    assert check_solution(game_operator(gamma), sol.lam, sol.u, tol=1e-7)


def test_theta_must_be_in_range():
    with pytest.raises(ValueError):
        solve_ergodic(fixtures.t_circle(), theta=0.0)


def test_start_point_is_accepted():
    sol = solve_ergodic(fixtures.t_circle([1.0, 0.0]), u0=[7.0, -3.0])
    assert sol.u.rep.tolist() == pytest.approx([0.5, 0.0], abs=1e-6)



@pytest.mark.parametrize("T", [fixtures.t_circle([1.0, 0.0]), fixtures.log_game()])
def test_lambda_does_not_depend_on_the_start(T):
    result = uniqueness_probe(T, num_starts=10, seed=3, **FAST)
    assert max(result.lambdas) - min(result.lambdas) <= 10 * 1e-8


def test_gamma_lambda_does_not_depend_on_the_start(gamma):
    result = uniqueness_probe(game_operator(gamma), num_starts=10, seed=3, **FAST)
    assert max(result.lambdas) - min(result.lambdas) <= 10 * 1e-8


def test_constant_shift_of_g_moves_only_lambda(gamma):
    T = game_operator(gamma)
    g = np.array([0.2, -0.1, 0.4])
    base = solve_ergodic(T.perturbed(g))
    shifted = solve_ergodic(T.perturbed(g + 3.0))
    assert shifted.lam == pytest.approx(base.lam + 3.0, abs=1e-7)
    assert shifted.u.rep.tolist() == pytest.approx(base.u.rep.tolist(), abs=1e-6)

# ─── check_solution ──────────────────────────────────────────────────────────

def test_check_solution():
    assert check_solution(fixtures.t_circle(), 0.0, [0.0, 0.0])
    assert check_solution(fixtures.t_circle([1.0, 0.0]), 0.5, [0.5, 0.0])
    assert not check_solution(fixtures.t_circle(), 1.0, [0.0, 0.0])


# ─── strategies ──────────────────────────────────────────────────────────────

def test_strategies_singleton_actions(circle_g10):
    pair = extract_strategies(circle_g10, [0.5, 0.0])
    assert [s.tolist() for s in pair.sigma] == [[1.0], [1.0]]
    assert [t.tolist() for t in pair.tau] == [[1.0], [1.0]]
    assert pair.certified()


def test_strategies_matching_pennies():
    pair = extract_strategies(matching_pennies_game(2), [0.0, 0.0])
    for s in pair.sigma:
        assert s.tolist() == pytest.approx([0.5, 0.5], abs=1e-9)


def test_strategies_gamma_are_certified(gamma):
    sol = solve_ergodic(game_operator(gamma))
    pair = extract_strategies(gamma, sol.u)
    assert pair.certified()
    for lo, hi, t in pair.certificates:
        assert lo >= t - pair.epsilon
        assert hi <= t + pair.epsilon
    assert pair.epsilon >= 2e-9


def test_requested_epsilon_is_kept(gamma):
    assert extract_strategies(gamma, np.zeros(3), epsilon=0.1).epsilon == 0.1


# ─── probes ──────────────────────────────────────────────────────────────────

def test_probe_circle_always_solvable():
    probe = solvability_probe(fixtures.t_circle(), 20, seed=0, **FAST)
    assert probe.fraction == 1.0
    assert probe.failures == []
    assert all(lam is not None for lam in probe.lambdas)


def test_probe_square_never_solvable():
    probe = solvability_probe(fixtures.t_square(), 5, seed=0, **FAST)
    assert probe.successes == 0
    assert len(probe.failures) == 5


def test_probe_triangle_solvable_below_diagonal():
    probe = solvability_probe(fixtures.t_triangle(), 20, seed=4, **FAST)
    for g, lam in zip(probe.perturbations, probe.lambdas):
        assert (lam is not None) == (g[0] <= g[1])
    assert 0 < probe.successes < 20


def test_probe_is_deterministic_and_thread_independent():
    a = solvability_probe(fixtures.t_triangle(), 8, seed=9, threads=1, **FAST)
    b = solvability_probe(fixtures.t_triangle(), 8, seed=9, threads=4, **FAST)
    assert a.successes == b.successes
    assert all(np.array_equal(x, y) for x, y in zip(a.perturbations, b.perturbations))


def test_uniqueness_triangle_on_diagonal():
    result = uniqueness_probe(fixtures.t_triangle(), num_starts=10, seed=0, **FAST)
    assert result.label == "MultipleFound"
    assert len(result.representatives) > 1
    for rep in result.representatives:
        assert rep.rep[0] >= rep.rep[1]


def test_uniqueness_circle():
    result = uniqueness_probe(fixtures.t_circle(), g=[1.0, 0.0], num_starts=10, seed=0, **FAST)
    assert result.unique
    assert result.representatives[0].rep.tolist() == pytest.approx([0.5, 0.0], abs=1e-6)


def test_uniqueness_triangle_below_diagonal():
    result = uniqueness_probe(fixtures.t_triangle([-1.0, 0.0]), num_starts=10, seed=1, **FAST)
    assert result.unique
    rep = result.representatives[0].rep
    assert rep[0] - rep[1] == pytest.approx(-0.5, abs=1e-6)


# ─── value iteration against the solution ────────────────────────────────────

@pytest.mark.parametrize("T", [
    fixtures.t_circle(),
    fixtures.t_circle([1.0, 0.0]),
    fixtures.log_game(),
])
def test_value_iteration_rate(T):
    sol = solve_ergodic(T)
    bound = 2 * hilbert(sol.u.rep) + 1e-8
    for k, v, _ in value_iteration(T, 500):
        assert np.abs(v - sol.lam).max() <= bound / k + 1e-8
