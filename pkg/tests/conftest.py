from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from ergodic_games import fixtures
from ergodic_games.game_model import FiniteGame

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"


def random_game(
    rng: np.random.Generator,
    n: int,
    actions=(2, 3),
    density: float = 0.5,
    payoff_scale: float = 1.0,
) -> FiniteGame:
    """Random game with sparse transition supports (each row keeps at least one state)."""
    actions_max, actions_min, payoff, trans = [], [], [], []
    for _ in range(n):
        m = int(rng.choice(actions))
        k = int(rng.choice(actions))
        actions_max.append(tuple(range(m)))
        actions_min.append(tuple(range(k)))
        payoff.append(rng.uniform(-payoff_scale, payoff_scale, (m, k)))
        t = np.zeros((m, k, n))
        for a in range(m):
            for b in range(k):
                mask = rng.random(n) < density
                if not mask.any():
                    mask[rng.integers(n)] = True
                w = rng.uniform(0.1, 1.0, int(mask.sum()))
                t[a, b, mask] = w / w.sum()
        trans.append(t)
    return FiniteGame(n, tuple(actions_max), tuple(actions_min), tuple(payoff), tuple(trans))


def matching_pennies_game(n: int = 2) -> FiniteGame:
    """Matching pennies at every state, play stays put."""
    eye = np.eye(n)
    return FiniteGame(
        n,
        tuple(("H", "T") for _ in range(n)),
        tuple(("H", "T") for _ in range(n)),
        tuple(np.array([[1.0, -1.0], [-1.0, 1.0]]) for _ in range(n)),
        tuple(np.broadcast_to(eye[i], (2, 2, n)) for i in range(n)),
    )


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR


@pytest.fixture
def gamma():
    return fixtures.gamma_game()


@pytest.fixture
def triangle():
    return fixtures.t_triangle_game()


@pytest.fixture
def circle():
    return fixtures.t_circle_game()


@pytest.fixture
def circle_g10():
    return fixtures.t_circle_game((1.0, 0.0))


@pytest.fixture
def square():
    return fixtures.t_square_game()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
