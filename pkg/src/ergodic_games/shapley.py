"""
ergodic_games.shapley
~~~~~~~~~~~~~~~~~~~~~
Shapley operators and the numerics of the quotient space R^n / Re.

An OperatorHandle wraps a monotone, additively homogeneous self-map of R^n,
either backed by a FiniteGame (coordinate i is the value of the one-shot
matrix game M^{i,x}) or given in closed form. Closed-form handles are probed
for monotonicity and homogeneity before use.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import matrix_game
from .errors import ContractViolation, DimensionError, NumericalFailure, UnboundedGrowth
from .game_model import FiniteGame, Player, check_strategy, perturb

logger = logging.getLogger(__name__)

CONTRACT_TOL = 1e-7
SLICE_TOL = 1e-9
GROWTH_CAP = 1e12


# ──────────────────────────────────────────────────────────────────────────────
# Handles
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class GameBacked:
    game: FiniteGame = field(repr=False)
    tol_lp: float = matrix_game.TOL_LP


@dataclass(frozen=True)
class ClosedForm:
    label: str


@dataclass(frozen=True)
class OperatorHandle:
    n: int
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    kind: Union[GameBacked, ClosedForm]

    def __call__(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionError(f"operator acts on R^{self.n}, got shape {x.shape}")
        return np.asarray(self.fn(x), dtype=float)

    eval = __call__

    @property
    def label(self) -> str:
        return self.kind.label if isinstance(self.kind, ClosedForm) else "game"

    @property
    def game(self) -> Optional[FiniteGame]:
        return self.kind.game if isinstance(self.kind, GameBacked) else None

    def perturbed(self, g: Sequence[float]) -> "OperatorHandle":
        """Handle of g + T."""
        g = np.asarray(g, dtype=float).ravel()
        if g.shape[0] != self.n:
            raise DimensionError(f"perturbation has length {g.shape[0]}, operator acts on R^{self.n}")
        if isinstance(self.kind, GameBacked):
            return game_operator(perturb(self.kind.game, g), self.kind.tol_lp)
        base = self.fn
        return OperatorHandle(self.n, lambda x: g + base(x), ClosedForm(f"g+{self.kind.label}"))


def eval_game_operator(game: FiniteGame, x: Sequence[float], tol_lp: float = matrix_game.TOL_LP) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (game.n,):
        raise DimensionError(f"game has {game.n} states, got vector of shape {x.shape}")
    out = np.empty(game.n)
    for i in range(game.n):
        try:
            out[i] = matrix_game.solve(game.stage_matrix(i, x), tol_lp).value
        except NumericalFailure as exc:
            raise NumericalFailure(str(exc), state=i) from exc
    return out


def game_operator(game: FiniteGame, tol_lp: float = matrix_game.TOL_LP) -> OperatorHandle:
    return OperatorHandle(game.n, lambda x: eval_game_operator(game, x, tol_lp), GameBacked(game, tol_lp))


def fixed_strategy_operator(
    game: FiniteGame,
    strategy: Sequence[Sequence[float]],
    player: Player = Player.MAX,
) -> OperatorHandle:
    """One-player operator obtained by freezing `player`'s stationary strategy.

    The opponent best-responds with pure actions, which is enough against a fixed mixed action.
    """
    strat = check_strategy(game, strategy, player)

    def fn(x: np.ndarray) -> np.ndarray:
        out = np.empty(game.n)
        for i in range(game.n):
            M = game.stage_matrix(i, x)
            if player is Player.MAX:
                out[i] = (strat[i] @ M).min()
            else:
                out[i] = (M @ strat[i]).max()
        return out

    return OperatorHandle(game.n, fn, ClosedForm(f"fixed-{player.value.lower()}"))


# ──────────────────────────────────────────────────────────────────────────────
# Quotient space
# ──────────────────────────────────────────────────────────────────────────────

def hilbert(x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    return float(x.max() - x.min())


def sup_norm(x: Sequence[float]) -> float:
    return float(np.abs(np.asarray(x, dtype=float)).max())


@dataclass(frozen=True, eq=False)
class QuotientVector:
    """Canonical representative of [x]: the translate with min coordinate exactly 0."""

    rep: np.ndarray

    def __post_init__(self):
        rep = np.array(self.rep, dtype=float, copy=True)
        rep.setflags(write=False)
        object.__setattr__(self, "rep", rep)

    def norm(self) -> float:
        return float(self.rep.max())

    def distance(self, other: "QuotientVector") -> float:
        return hilbert(self.rep - other.rep)


def canonicalize(x: Union[Sequence[float], QuotientVector]) -> QuotientVector:
    if isinstance(x, QuotientVector):
        return x
    x = np.asarray(x, dtype=float)
    return QuotientVector(x - x.min())


# ──────────────────────────────────────────────────────────────────────────────
# Value iteration
# ──────────────────────────────────────────────────────────────────────────────

@dataclass
class ValueIterationTrace:
    ks: List[int] = field(default_factory=list)
    values: List[np.ndarray] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ks)

    def __iter__(self):
        return iter(zip(self.ks, self.values, self.residuals))

    def last(self) -> np.ndarray:
        return self.values[-1]


def value_iteration(T: OperatorHandle, K: int, cap: float = GROWTH_CAP) -> ValueIterationTrace:
    """v^0 = 0 and (k+1) v^{k+1} = T(k v^k), so k v^k = T^k(0)."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    trace = ValueIterationTrace()
    w = np.zeros(T.n)
    v_prev = np.zeros(T.n)
    for k in range(1, K + 1):
        w = T(w)
        norm = sup_norm(w)
        if not np.isfinite(norm) or norm > cap:
            raise UnboundedGrowth(k, norm, cap)
        v = w / k
        trace.ks.append(k)
        trace.values.append(v)
        trace.residuals.append(hilbert(v - v_prev))
        v_prev = v
    return trace


# ──────────────────────────────────────────────────────────────────────────────
# Slice spaces
# ──────────────────────────────────────────────────────────────────────────────

def slice_bounds(T: OperatorHandle, x: Sequence[float]) -> Tuple[float, float]:
    """Tightest (alpha, beta) with alpha e + x <= T(x) <= beta e + x."""
    x = np.asarray(x, dtype=float)
    d = T(x) - x
    return float(d.min()), float(d.max())


def in_slice(T: OperatorHandle, x: Sequence[float], alpha: float, beta: float, tol: float = SLICE_TOL) -> bool:
    lo, hi = slice_bounds(T, x)
    return lo >= alpha - tol and hi <= beta + tol


def in_D_alpha(T: OperatorHandle, x: Sequence[float], alpha: float, tol: float = SLICE_TOL) -> bool:
    """||x - T(x)||_H <= alpha."""
    lo, hi = slice_bounds(T, x)
    return hi - lo <= alpha + tol


def recession_probe(T: OperatorHandle, x: Sequence[float], rhos: Sequence[float]) -> List[np.ndarray]:
    """T(rho x) / rho along an increasing schedule; a diagnostic, not a limit."""
    x = np.asarray(x, dtype=float)
    rhos = [float(r) for r in rhos]
    if any(r <= 0 for r in rhos) or any(b <= a for a, b in zip(rhos, rhos[1:])):
        raise ValueError("rho schedule must be positive and increasing")
    return [T(rho * x) / rho for rho in rhos]


# ──────────────────────────────────────────────────────────────────────────────
# Contract probes
# ──────────────────────────────────────────────────────────────────────────────

@dataclass
class ContractReport:
    probes: int
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_contract(
    T: OperatorHandle,
    probes: int = 100,
    seed: int = 0,
    tol: float = CONTRACT_TOL,
    scale: float = 10.0,
) -> ContractReport:
    """Random probes of monotonicity, additive homogeneity and both nonexpansiveness bounds."""
    rng = np.random.default_rng(seed)
    report = ContractReport(probes=probes)
    for t in range(probes):
        x = rng.uniform(-scale, scale, T.n)
        y = x + np.abs(rng.normal(0.0, scale / 4, T.n))
        alpha = rng.uniform(-scale, scale)
        z = rng.uniform(-scale, scale, T.n)
        Tx, Ty, Tz = T(x), T(y), T(z)

        if (Tx > Ty + tol).any():
            report.violations.append(f"probe {t}: monotonicity, T(x) - T(y) = {float((Tx - Ty).max()):.3e}")
        shift = T(x + alpha) - Tx - alpha
        if sup_norm(shift) > tol:
            report.violations.append(f"probe {t}: additive homogeneity off by {sup_norm(shift):.3e}")
        if sup_norm(Tx - Tz) > sup_norm(x - z) + 2 * tol:
            report.violations.append(f"probe {t}: sup-norm expansion")
        if hilbert(Tx - Tz) > hilbert(x - z) + 2 * tol:
            report.violations.append(f"probe {t}: Hilbert seminorm expansion")
    return report


def closed_form(
    label: str,
    n: int,
    fn: Callable[[np.ndarray], np.ndarray],
    *,
    verify: bool = True,
    probes: int = 100,
    seed: int = 0,
) -> OperatorHandle:
    handle = OperatorHandle(n, fn, ClosedForm(label))
    if verify:
        report = check_contract(handle, probes=probes, seed=seed)
        if not report.ok:
            raise ContractViolation(label, report.violations)
        logger.debug("closed-form operator %s passed %d contract probes", label, probes)
    return handle
