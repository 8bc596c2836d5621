import numpy as np
import pytest

from ergodic_games import matrix_game
from ergodic_games.errors import DimensionError
from ergodic_games.matrix_game import MatrixGame

from oracles import grid_bisection_value, matrix_value, support_enumeration_value


def _certified(M, sol, tol):
    lo, hi = sol.guarantees(np.asarray(M, dtype=float))
    return lo >= sol.value - tol and hi <= sol.value + tol


def test_one_by_one():
    sol = matrix_game.solve([[2.5]])
    assert sol.value == 2.5
    assert sol.x.tolist() == [1.0]
    assert sol.y.tolist() == [1.0]


def test_matching_pennies():
    sol = matrix_game.solve([[1.0, -1.0], [-1.0, 1.0]])
    assert sol.value == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(sol.x, [0.5, 0.5], atol=1e-9)
    assert np.allclose(sol.y, [0.5, 0.5], atol=1e-9)


def test_rock_paper_scissors():
    M = [[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]]
    sol = matrix_game.solve(M)
    assert sol.value == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(sol.x, 1 / 3, atol=1e-9)
    assert sol.pivots > 0


def test_pure_saddle_point_skips_the_lp():
    sol = matrix_game.solve([[3.0, 1.0], [4.0, 2.0]])
    assert sol.value == 2.0
    assert sol.x.tolist() == [0.0, 1.0]
    assert sol.y.tolist() == [0.0, 1.0]
    assert sol.pivots == 0


def test_random_integer_3x3_matches_grid_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        M = rng.integers(-5, 6, (3, 3)).astype(float)
        sol = matrix_game.solve(M)
        assert sol.value == pytest.approx(support_enumeration_value(M), abs=1e-3)
        assert _certified(M, sol, 1e-9 * max(1.0, np.ptp(M)))


def test_two_row_games_match_bisection_oracle():
    rng = np.random.default_rng(5)
    for _ in range(20):
        M = rng.uniform(-3, 3, (2, int(rng.integers(2, 6))))
        assert matrix_game.solve(M).value == pytest.approx(grid_bisection_value(M), abs=1e-3)


@pytest.mark.parametrize("seed", range(5))
def test_random_matrices_up_to_5x5(seed):
    rng = np.random.default_rng(100 + seed)
    for _ in range(20):
        m, k = rng.integers(1, 6, 2)
        M = rng.uniform(-10, 10, (m, k))
        sol = matrix_game.solve(M)
        assert sol.value == pytest.approx(matrix_value(M), abs=1e-3)
        assert _certified(M, sol, 1e-9 * max(1.0, np.ptp(M)))
        assert sol.x.sum() == pytest.approx(1.0)
        assert (sol.x >= 0).all() and (sol.y >= 0).all()


def test_large_entries_stay_well_conditioned():
    M = np.array([[1e6, -1e6], [-1e6, 1e6]]) + np.array([[0.5, 0.0], [0.0, 0.0]])
    sol = matrix_game.solve(M)
    assert _certified(M, sol, 1e-9 * np.ptp(M))


def test_value_lies_between_the_extreme_entries():
    rng = np.random.default_rng(21)
    for _ in range(30):
        m, k = rng.integers(1, 6, 2)
        M = rng.uniform(-10, 10, (m, k))
        value = matrix_game.solve(M).value
        assert M.min() - 1e-9 <= value <= M.max() + 1e-9


def test_value_is_monotone_in_the_entries():
    rng = np.random.default_rng(22)
    for _ in range(30):
        m, k = rng.integers(1, 6, 2)
        M = rng.uniform(-10, 10, (m, k))
        bigger = M + rng.uniform(0, 3, (m, k)) * (rng.random((m, k)) < 0.5)
        tol = 1e-9 * max(1.0, np.ptp(bigger))
        assert matrix_game.solve(bigger).value >= matrix_game.solve(M).value - 2 * tol


def test_shift_invariance():
    assert matrix_game.shift_invariance_check([[1.0, -1.0], [-1.0, 1.0]], 3.0)
    assert matrix_game.solve(np.array([[1.0, -1.0], [-1.0, 1.0]]) + 3.0).value == pytest.approx(3.0)
    assert matrix_game.shift_invariance_check([[4.0]], -2.0)
    rng = np.random.default_rng(7)
    assert matrix_game.shift_invariance_check(rng.uniform(-1, 1, (4, 4)), 0.7)


def test_skew_duality():
    rng = np.random.default_rng(11)
    for _ in range(10):
        game = MatrixGame(rng.uniform(-2, 2, (3, 4)))
        v = matrix_game.solve(game).value
        assert matrix_game.solve(game.transpose_dual()).value == pytest.approx(-v, abs=1e-8)


@pytest.mark.parametrize("bad", [[], [[]], [[1.0, float("nan")]], [1.0, 2.0]])
def test_bad_matrices(bad):
    with pytest.raises(DimensionError):
        matrix_game.solve(bad)
