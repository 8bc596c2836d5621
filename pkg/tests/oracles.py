"""Brute-force references the fast code is checked against. Small inputs only."""
from __future__ import annotations

import itertools
from typing import List, Sequence

import numpy as np

from ergodic_games.game_model import FiniteGame


def support_enumeration_value(M) -> float:
    """Matrix game value from all square kernels (I, J) with |I| = |J|.

    For each kernel solve  sum_{a in I} x_a M[a, b] = v  (b in J),  sum x_a = 1,
    keep the nonnegative solutions, and score them by min_b (x M)_b. Some extreme
    optimal strategy of MAX comes out of a nonsingular kernel, so the best score
    is the value.
    """
    M = np.asarray(M, dtype=float)
    m, k = M.shape
    best = -np.inf
    for size in range(1, min(m, k) + 1):
        for I in itertools.combinations(range(m), size):
            for J in itertools.combinations(range(k), size):
                A = np.zeros((size + 1, size + 1))
                A[:size, :size] = M[np.ix_(I, J)].T
                A[:size, size] = -1.0
                A[size, :size] = 1.0
                rhs = np.zeros(size + 1)
                rhs[size] = 1.0
                try:
                    sol = np.linalg.solve(A, rhs)
                except np.linalg.LinAlgError:
                    continue
                xs = sol[:size]
                if (xs < -1e-12).any():
                    continue
                x = np.zeros(m)
                x[list(I)] = np.clip(xs, 0.0, None)
                x /= x.sum()
                best = max(best, float((x @ M).min()))
    return best


def grid_bisection_value(M, points: int = 2001) -> float:
    """Two-row games: max over p of min_b (p M0 + (1-p) M1), grid then ternary refinement."""
    M = np.asarray(M, dtype=float)
    assert M.shape[0] == 2

    def f(p: float) -> float:
        return float((p * M[0] + (1 - p) * M[1]).min())

    grid = np.linspace(0.0, 1.0, points)
    vals = [f(p) for p in grid]
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    for _ in range(100):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if f(m1) < f(m2):
            lo = m1
        else:
            hi = m2
    return max(max(vals), f(0.5 * (lo + hi)))


def matrix_value(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.shape[0] == 2:
        return grid_bisection_value(M)
    return support_enumeration_value(M)


def backward_induction(game: FiniteGame, k: int) -> np.ndarray:
    """T^k(0) through the game tree, one brute-force matrix game per state and stage."""
    V = np.zeros(game.n)
    for _ in range(k):
        V = np.array([support_enumeration_value(game.stage_matrix(i, V)) for i in range(game.n)])
    return V


def brute_force_operator(game: FiniteGame, x: Sequence[float]) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.array([support_enumeration_value(game.stage_matrix(i, x)) for i in range(game.n)])


def path_enumeration_payoff(game: FiniteGame, sigma, tau, i0: int, k: int) -> float:
    """Exact k-stage average payoff by summing over every (state, a, b) history."""
    total = 0.0
    frontier: List = [(i0, 1.0, 0.0)]  # (state, probability, accumulated payoff)
    for _ in range(k):
        nxt = []
        for i, prob, acc in frontier:
            for a, pa in enumerate(sigma[i]):
                for b, pb in enumerate(tau[i]):
                    w = prob * pa * pb
                    if w == 0.0:
                        continue
                    r = acc + game.payoff[i][a, b]
                    for j, pj in enumerate(game.trans[i][a, b]):
                        if pj > 0.0:
                            nxt.append((j, w * pj, r))
        frontier = nxt
    for _, prob, acc in frontier:
        total += prob * acc
    return total / k
