"""
ergodic_games.fixtures
~~~~~~~~~~~~~~~~~~~~~~
Reference games and closed-form operators.

  square    T(x) = (x1, x2)                 every state absorbing
  circle    T(x) = (x2, x1)                 deterministic swap
  triangle  T(x) = (max(x1,x2), min(x1,x2)) MAX moves at state 1, MIN at state 2
  gamma     3-state game on the action grid {0, 1/2, 1}, state 3 absorbing
  log_game  2-state perfect-information game with unbounded payoffs (closed form only)

Operator files ({"operator": NAME, "g": [...]}) and game files are both loaded
through `load_operator`.
"""
from __future__ import annotations

from pathlib import Path
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from . import game_model
from .errors import SchemaError
from .game_model import FiniteGame
from .shapley import OperatorHandle, closed_form, game_operator


# ──────────────────────────────────────────────────────────────────────────────
# Games
# ──────────────────────────────────────────────────────────────────────────────

def _with_g(game: FiniteGame, g: Optional[Sequence[float]]) -> FiniteGame:
    return game if g is None else game_model.perturb(game, g)


def t_square_game(g: Optional[Sequence[float]] = None) -> FiniteGame:
    game = game_model.markov_chain_game([[1.0, 0.0], [0.0, 1.0]])
    return _with_g(game, g)


def t_circle_game(g: Optional[Sequence[float]] = None) -> FiniteGame:
    game = game_model.markov_chain_game([[0.0, 1.0], [1.0, 0.0]])
    return _with_g(game, g)


def t_triangle_game(g: Optional[Sequence[float]] = None) -> FiniteGame:
    """State 1: MAX chooses the next state. State 2: MIN chooses it."""
    game = FiniteGame(
        n=2,
        actions_max=(("stay", "move"), ("pass",)),
        actions_min=(("pass",), ("move", "stay")),
        payoff=([[0.0], [0.0]], [[0.0, 0.0]]),
        trans=(
            [[[1.0, 0.0]], [[0.0, 1.0]]],
            [[[1.0, 0.0], [0.0, 1.0]]],
        ),
    )
    return _with_g(game, g)


def gamma_payoff(i: int, a: float, b: float) -> float:
    """r(1,a,b) = ab / (a^3 + b^3), r(2,.) = -r(1,.), r(3,.) = 0, and 0 at the origin."""
    if i == 2 or (a == 0 and b == 0):
        return 0.0
    r = a * b / (a ** 3 + b ** 3)
    return r if i == 0 else -r


def gamma_transition(gamma: float) -> Callable[[int, float, float], Tuple[float, float, float]]:
    def p(i: int, a: float, b: float) -> Tuple[float, float, float]:
        if i == 0:
            return (gamma * a, b * (1 - gamma * a), (1 - b) * (1 - gamma * a))
        if i == 1:
            return (gamma * b, a * (1 - gamma * b), (1 - a) * (1 - gamma * b))
        return (0.0, 0.0, 1.0)

    return p


def gamma_game(
    gamma: float = 0.5,
    grid: Sequence[float] = (0.0, 0.5, 1.0),
    payoffs: bool = True,
) -> FiniteGame:
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    grid = tuple(float(a) for a in grid)
    r = gamma_payoff if payoffs else (lambda i, a, b: 0.0)
    return game_model.from_payoff_function(3, (grid,) * 3, (grid,) * 3, r, gamma_transition(gamma))


GAMES: Dict[str, Callable[..., FiniteGame]] = {
    "t_square": t_square_game,
    "t_circle": t_circle_game,
    "t_triangle": t_triangle_game,
    "gamma": gamma_game,
}


# ──────────────────────────────────────────────────────────────────────────────
# Closed-form operators
# ──────────────────────────────────────────────────────────────────────────────

def log_h(z):
    """sup_{0<p<=1} 2(1-p) + log p + p z  =  1 - log(2-z) for z <= 1, z otherwise."""
    z = np.asarray(z, dtype=float)
    return np.where(z <= 1.0, 1.0 - np.log(2.0 - np.minimum(z, 1.0)), z)


def _log_game(x: np.ndarray) -> np.ndarray:
    h = log_h(x[1] - x[0])
    return np.array([h + x[0], -h + x[1]])


CLOSED_FORMS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "t_square": lambda x: x.copy(),
    "t_circle": lambda x: x[::-1].copy(),
    "t_triangle": lambda x: np.array([x.max(), x.min()]),
    "log_game": _log_game,
}


def operator(name: str, g: Optional[Sequence[float]] = None, verify: bool = True) -> OperatorHandle:
    try:
        fn = CLOSED_FORMS[name]
    except KeyError:
        raise SchemaError(f"unknown closed-form operator '{name}' (known: {sorted(CLOSED_FORMS)})") from None
    handle = closed_form(name, 2, fn, verify=verify)
    return handle if g is None else handle.perturbed(g)


def t_square(g=None) -> OperatorHandle:
    return operator("t_square", g)


def t_circle(g=None) -> OperatorHandle:
    return operator("t_circle", g)


def t_triangle(g=None) -> OperatorHandle:
    return operator("t_triangle", g)


def log_game(g=None) -> OperatorHandle:
    return operator("log_game", g)


# ──────────────────────────────────────────────────────────────────────────────
# Loading
# ──────────────────────────────────────────────────────────────────────────────

def load_operator(path: str | Path, tol_lp: float = 1e-9) -> Tuple[OperatorHandle, Optional[FiniteGame]]:
    """Load a game file or a closed-form operator file. The game is None for closed forms."""
    p = Path(path)
    data = game_model.parse_json_text(p.read_bytes(), source=str(p))
    if isinstance(data, dict) and "operator" in data:
        name = data["operator"]
        g = data.get("g")
        if not isinstance(name, str) or (g is not None and not isinstance(g, list)):
            raise SchemaError(f"{p}: operator files look like {{\"operator\": NAME, \"g\": [..]}}")
        return operator(name, g), None
    game = game_model.from_dict(data, source=str(p))
    return game_operator(game, tol_lp), game
