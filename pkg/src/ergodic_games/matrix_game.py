"""
ergodic_games.matrix_game
~~~~~~~~~~~~~~~~~~~~~~~~~
Value and optimal mixed strategies of a one-shot zero-sum matrix game.

MAX picks the row, MIN the column, MAX receives M[a, b]. The solver is a
dense primal simplex (Bland's rule) on the classic value LP

    maximize  sum(q)  s.t.  A q <= 1,  q >= 0

where A is M rescaled into [1, 2]. MIN's strategy is q / sum(q); MAX's is read
off the slack reduced costs. Every solve checks its own optimality
certificates before returning.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

from .errors import DimensionError, NumericalFailure

logger = logging.getLogger(__name__)

TOL_LP = 1e-9
_PIVOT_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class MatrixGame:
    M: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=float, copy=True)
        if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
            raise DimensionError(f"matrix game needs a nonempty 2-D array, got shape {M.shape}")
        if not np.isfinite(M).all():
            raise DimensionError("matrix game entries must be finite")
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    @property
    def rows(self) -> int:
        return self.M.shape[0]

    @property
    def cols(self) -> int:
        return self.M.shape[1]

    @property
    def scale(self) -> float:
        return max(1.0, float(self.M.max() - self.M.min()))

    def shifted(self, c: float) -> "MatrixGame":
        return MatrixGame(self.M + c)

    def transpose_dual(self) -> "MatrixGame":
        """The game with roles swapped: value(-M^T) = -value(M)."""
        return MatrixGame(-self.M.T)


@dataclass(frozen=True)
class MatrixGameSolution:
    """Value and optimal mixed strategies of one matrix game.

    ``gap`` is max(M y) - min(x^T M). ``solve`` rejects a solution whose gap
    exceeds tol_lp * s, with s = max(1, max M - min M), so certificates carry
    a tolerance relative to the payoff span rather than an absolute one.
    """
    value: float
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    gap: float
    pivots: int = 0

    def guarantees(self, M: np.ndarray) -> Tuple[float, float]:
        """(min_b (x^T M)_b, max_a (M y)_a): what x secures for MAX and y concedes to MAX."""
        return float((self.x @ M).min()), float((M @ self.y).max())


MatrixLike = Union[MatrixGame, np.ndarray, Sequence[Sequence[float]]]


def _as_game(M: MatrixLike) -> MatrixGame:
    return M if isinstance(M, MatrixGame) else MatrixGame(np.asarray(M, dtype=float))


def _simplex(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float, int]:
    """Solve max 1'q s.t. A q <= 1, q >= 0 for A > 0. Returns (q, p, z, pivots), p the dual."""
    m, k = A.shape
    T = np.zeros((m + 1, k + m + 1))
    T[:m, :k] = A
    T[:m, k:k + m] = np.eye(m)
    T[:m, -1] = 1.0
    T[m, :k] = -1.0
    basis = list(range(k, k + m))

    cap = 50 * (m + k)
    for pivots in range(cap + 1):
        entering = np.flatnonzero(T[m, :-1] < -_PIVOT_EPS)
        if entering.size == 0:
            break
        if pivots == cap:
            raise NumericalFailure(
                f"simplex exceeded {cap} pivots on a {m}x{k} game (degenerate or ill-scaled input)"
            )
        j = int(entering[0])
        col = T[:m, j]
        rows = np.flatnonzero(col > _PIVOT_EPS)
        if rows.size == 0:
            raise NumericalFailure("value LP reported unbounded; matrix shift failed")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + _PIVOT_EPS * max(1.0, abs(best))]
        r = int(min(tied, key=lambda row: basis[row]))

        T[r] /= T[r, j]
        pivot_row = T[r].copy()
        T -= np.outer(T[:, j], pivot_row)
        T[r] = pivot_row
        basis[r] = j

    q = np.zeros(k)
    for r, var in enumerate(basis):
        if var < k:
            q[var] = T[r, -1]
    p = T[m, k:k + m].copy()
    return q, p, float(T[m, -1]), pivots


def _normalize(v: np.ndarray) -> np.ndarray:
    v = np.clip(v, 0.0, None)
    total = v.sum()
    if not total > 0:
        raise NumericalFailure("simplex returned a zero strategy")
    return v / total


def solve(M: MatrixLike, tol_lp: float = TOL_LP) -> MatrixGameSolution:
    game = _as_game(M)
    A = game.M
    s = game.scale

    # pure saddle point
    row_min = A.min(axis=1)
    col_max = A.max(axis=0)
    a = int(row_min.argmax())
    b = int(col_max.argmin())
    if row_min[a] >= col_max[b]:
        x = np.zeros(game.rows)
        y = np.zeros(game.cols)
        x[a] = 1.0
        y[b] = 1.0
        return MatrixGameSolution(value=float(A[a, b]), x=x, y=y, gap=0.0)

    lo = float(A.min())
    q, p, z, pivots = _simplex((A - lo) / s + 1.0)
    if not z > 0:
        raise NumericalFailure("value LP returned a nonpositive objective")
    x = _normalize(p)
    y = _normalize(q)

    worst = float((x @ A).min())
    best = float((A @ y).max())
    gap = best - worst
    if gap > tol_lp * s or gap < -tol_lp * s:
        raise NumericalFailure(
            f"optimality certificate failed: gap {gap:.3e} exceeds {tol_lp * s:.1e} "
            f"on a {game.rows}x{game.cols} game"
        )
    logger.debug("matrix game %dx%d solved in %d pivots (gap %.2e)", game.rows, game.cols, pivots, gap)
    return MatrixGameSolution(value=0.5 * (worst + best), x=x, y=y, gap=max(gap, 0.0), pivots=pivots)


def shift_invariance_check(M: MatrixLike, c: float, tol_lp: float = TOL_LP) -> bool:
    """value(M + c) == value(M) + c, the matrix-level form of additive homogeneity."""
    game = _as_game(M)
    base = solve(game, tol_lp).value
    moved = solve(game.shifted(c), tol_lp).value
    return abs(moved - (base + c)) <= 2 * tol_lp * game.scale
