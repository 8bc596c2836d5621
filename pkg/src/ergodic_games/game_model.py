"""
ergodic_games.game_model
~~~~~~~~~~~~~~~~~~~~~~~~
Finite zero-sum stochastic games: construction, validation, JSON I/O and
payoff perturbation.

States are 0-based internally and rendered 1-based in every human-facing
string. A FiniteGame is immutable: its tensors are read-only numpy arrays.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import jsonschema
import numpy as np

from .errors import DimensionError, InvalidStrategy, ParseError, SchemaError, ValidationError
from .schemas import load_schema

logger = logging.getLogger(__name__)

Label = Union[str, int, float, bool, None]

ROW_SUM_TOL = 1e-9
TOL_SUPP = 1e-12
# rows closer to 1 than this are left untouched so that save -> load is bit-exact
_RENORM_FLOOR = 1e-12


class Player(str, Enum):
    MAX = "MAX"
    MIN = "MIN"

    @property
    def opponent(self) -> "Player":
        return Player.MIN if self is Player.MAX else Player.MAX


# ──────────────────────────────────────────────────────────────────────────────
# Validation report
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Issue:
    location: Tuple[int, ...]  # (i,), (i, a, b) or (i, a, b, j), 0-based
    message: str

    def where(self) -> str:
        names = ("state", "a", "b", "j")
        return ", ".join(f"{name}={idx + 1}" for name, idx in zip(names, self.location))


@dataclass(frozen=True)
class ValidationReport:
    issues: Tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def describe(self) -> List[Tuple[str, str]]:
        return [(issue.where(), issue.message) for issue in self.issues]


# ──────────────────────────────────────────────────────────────────────────────
# FiniteGame
# ──────────────────────────────────────────────────────────────────────────────

def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


def _as_tensor(raw: Any, shape: Tuple[int, ...], what: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{what}: not a rectangular numeric array ({exc})") from exc
    if arr.size == 0 and 0 in shape:
        return np.zeros(shape)
    if arr.shape != shape:
        raise SchemaError(f"{what}: expected shape {shape}, got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class FiniteGame:
    """The game tuple restricted to finite action sets.

    payoff[i] has shape (m_i, k_i): reward to MAX at state i.
    trans[i]  has shape (m_i, k_i, n): p(. | i, a, b).
    """

    n: int
    actions_max: Tuple[Tuple[Label, ...], ...]
    actions_min: Tuple[Tuple[Label, ...], ...]
    payoff: Tuple[np.ndarray, ...]
    trans: Tuple[np.ndarray, ...]

    def __post_init__(self):
        n = self.n
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise SchemaError(f"n must be a positive integer, got {n!r}")
        for name in ("actions_max", "actions_min", "payoff", "trans"):
            if len(getattr(self, name)) != n:
                raise SchemaError(f"{name} must have one entry per state ({n}), got {len(getattr(self, name))}")

        actions_max = tuple(tuple(labels) for labels in self.actions_max)
        actions_min = tuple(tuple(labels) for labels in self.actions_min)
        payoff, trans = [], []
        for i in range(n):
            m, k = len(actions_max[i]), len(actions_min[i])
            payoff.append(_frozen(_as_tensor(self.payoff[i], (m, k), f"payoff[{i + 1}]")))
            trans.append(_frozen(_as_tensor(self.trans[i], (m, k, n), f"trans[{i + 1}]")))

        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "actions_max", actions_max)
        object.__setattr__(self, "actions_min", actions_min)
        object.__setattr__(self, "payoff", tuple(payoff))
        object.__setattr__(self, "trans", tuple(trans))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteGame):
            return NotImplemented
        return (
            self.n == other.n
            and self.actions_max == other.actions_max
            and self.actions_min == other.actions_min
            and all(np.array_equal(x, y) for x, y in zip(self.payoff, other.payoff))
            and all(np.array_equal(x, y) for x, y in zip(self.trans, other.trans))
        )

    __hash__ = None  # type: ignore[assignment]

    def num_actions(self, i: int) -> Tuple[int, int]:
        return len(self.actions_max[i]), len(self.actions_min[i])

    def payoff_range(self) -> Tuple[float, float]:
        lo = min(float(p.min()) for p in self.payoff if p.size)
        hi = max(float(p.max()) for p in self.payoff if p.size)
        return lo, hi

    def stage_matrix(self, i: int, x: np.ndarray) -> np.ndarray:
        """M^{i,x}[a, b] = r(i,a,b) + sum_l x_l p(l | i,a,b)."""
        return self.payoff[i] + self.trans[i] @ x

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "actions_max": [list(a) for a in self.actions_max],
            "actions_min": [list(b) for b in self.actions_min],
            "payoff": [p.tolist() for p in self.payoff],
            "trans": [t.tolist() for t in self.trans],
        }


def states_label(states: Iterable[int]) -> List[int]:
    """1-based, sorted state labels for reports."""
    return sorted(int(s) + 1 for s in states)


# ──────────────────────────────────────────────────────────────────────────────
# Builders
# ──────────────────────────────────────────────────────────────────────────────

def from_payoff_function(
    n: int,
    actions_max: Sequence[Sequence[Label]],
    actions_min: Sequence[Sequence[Label]],
    r: Callable[[int, Any, Any], float],
    p: Callable[[int, Any, Any], Sequence[float]],
) -> FiniteGame:
    """Discretize a game given by payoff / transition callables on finite action grids."""
    payoff, trans = [], []
    for i in range(n):
        payoff.append([[float(r(i, a, b)) for b in actions_min[i]] for a in actions_max[i]])
        trans.append([[list(p(i, a, b)) for b in actions_min[i]] for a in actions_max[i]])
    return FiniteGame(n, tuple(actions_max), tuple(actions_min), tuple(payoff), tuple(trans))


def markov_chain_game(P: Sequence[Sequence[float]], r: Optional[Sequence[float]] = None) -> FiniteGame:
    """Zero-player game: both players are dummies with a single action per state."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    r = np.zeros(n) if r is None else np.asarray(r, dtype=float)
    return FiniteGame(
        n,
        tuple((0,) for _ in range(n)),
        tuple((0,) for _ in range(n)),
        tuple(np.array([[r[i]]]) for i in range(n)),
        tuple(P[i].reshape(1, 1, n) for i in range(n)),
    )


def mdp_game(rewards: Sequence[Sequence[float]], transitions: Sequence[Sequence[Sequence[float]]]) -> FiniteGame:
    """One-player game controlled by MAX; rewards[i][a], transitions[i][a] is a distribution."""
    n = len(rewards)
    return FiniteGame(
        n,
        tuple(tuple(range(len(rewards[i]))) for i in range(n)),
        tuple((0,) for _ in range(n)),
        tuple(np.asarray(rewards[i], dtype=float).reshape(-1, 1) for i in range(n)),
        tuple(np.asarray(transitions[i], dtype=float).reshape(-1, 1, n) for i in range(n)),
    )


# ──────────────────────────────────────────────────────────────────────────────
# Operations
# ──────────────────────────────────────────────────────────────────────────────

def validate(game: FiniteGame, tol: float = ROW_SUM_TOL) -> ValidationReport:
    issues: List[Issue] = []
    for i in range(game.n):
        m, k = game.num_actions(i)
        if m == 0:
            issues.append(Issue((i,), "MAX has no action"))
        if k == 0:
            issues.append(Issue((i,), "MIN has no action"))

        bad = np.argwhere(~np.isfinite(game.payoff[i]))
        for a, b in bad:
            issues.append(Issue((i, int(a), int(b)), f"payoff {game.payoff[i][a, b]} is not finite"))

        t = game.trans[i]
        for a, b in np.argwhere(~np.isfinite(t).all(axis=2)):
            issues.append(Issue((i, int(a), int(b)), "transition row has non-finite entries"))
        for a, b, j in np.argwhere(t < 0):
            issues.append(Issue((i, int(a), int(b), int(j)), f"negative probability {t[a, b, j]}"))
        sums = t.sum(axis=2)
        for a, b in np.argwhere(np.abs(sums - 1.0) > tol):
            if np.isfinite(sums[a, b]):
                issues.append(Issue((i, int(a), int(b)), f"row sum {sums[a, b]:.12g} ≠ 1"))
    return ValidationReport(tuple(issues))


def support(game: FiniteGame, i: int, a: int, b: int, tol_supp: float = TOL_SUPP) -> FrozenSet[int]:
    if not 0 <= i < game.n:
        raise IndexError(f"state index {i} out of range [0, {game.n})")
    m, k = game.num_actions(i)
    if not 0 <= a < m or not 0 <= b < k:
        raise IndexError(f"action pair ({a}, {b}) out of range at state {i + 1} ({m}x{k})")
    return frozenset(int(j) for j in np.flatnonzero(game.trans[i][a, b] > tol_supp))


def perturb(game: FiniteGame, g: Sequence[float]) -> FiniteGame:
    """Payoff g_i + r(i,a,b) at every state i; transitions unchanged."""
    g = np.asarray(g, dtype=float).ravel()
    if g.shape[0] != game.n:
        raise DimensionError(f"perturbation has length {g.shape[0]}, game has {game.n} states")
    if not np.isfinite(g).all():
        raise DimensionError("perturbation must be finite")
    return FiniteGame(
        game.n,
        game.actions_max,
        game.actions_min,
        tuple(p + g[i] for i, p in enumerate(game.payoff)),
        game.trans,
    )


def check_strategy(
    game: FiniteGame,
    strategy: Sequence[Sequence[float]],
    player: Player,
    tol: float = ROW_SUM_TOL,
) -> Tuple[np.ndarray, ...]:
    """Coerce a stationary strategy (one mixed action per state) and check it lies in the simplices."""
    if len(strategy) != game.n:
        raise InvalidStrategy(f"{player.value} strategy has {len(strategy)} states, game has {game.n}")
    out = []
    for i, row in enumerate(strategy):
        vec = np.asarray(row, dtype=float).ravel()
        m, k = game.num_actions(i)
        size = m if player is Player.MAX else k
        if vec.shape[0] != size:
            raise InvalidStrategy(f"{player.value} strategy at state {i + 1} has {vec.shape[0]} entries, expected {size}")
        if not np.isfinite(vec).all() or (vec < -tol).any() or abs(vec.sum() - 1.0) > tol:
            raise InvalidStrategy(f"{player.value} strategy at state {i + 1} is not a probability vector: {vec.tolist()}")
        vec = np.clip(vec, 0.0, None)
        out.append(vec / vec.sum())
    return tuple(out)


# ──────────────────────────────────────────────────────────────────────────────
# JSON I/O
# ──────────────────────────────────────────────────────────────────────────────

def _reject_constant(token: str):
    raise ParseError(f"non-finite number {token} is not permitted")


def parse_json_text(text: str | bytes, source: str = "<input>") -> Any:
    try:
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        return json.loads(text, parse_constant=_reject_constant)
    except UnicodeDecodeError as exc:
        raise ParseError(f"{source}: not UTF-8 ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: malformed JSON ({exc})") from exc


def _renormalize(trans: List[np.ndarray]) -> int:
    fixed = 0
    for t in trans:
        sums = t.sum(axis=2)
        dev = np.abs(sums - 1.0)
        mask = (dev > _RENORM_FLOOR) & (dev <= ROW_SUM_TOL) & (t >= 0).all(axis=2)
        if mask.any():
            t[mask] = t[mask] / sums[mask][:, None]
            fixed += int(mask.sum())
    return fixed


def from_dict(data: Any, source: str = "<input>") -> FiniteGame:
    try:
        jsonschema.validate(instance=data, schema=load_schema("game"))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{source}: {path}: {exc.message}") from exc

    n = data["n"]
    # draft-07 accepts 2.0 as an integer
    if isinstance(n, bool) or not isinstance(n, int):
        raise SchemaError(f"{source}: n must be an integer, got {n!r}")
    for key in ("actions_max", "actions_min", "payoff", "trans"):
        if len(data[key]) != n:
            raise SchemaError(f"{source}: '{key}' has {len(data[key])} entries, expected n={n}")

    trans = []
    for i in range(n):
        m, k = len(data["actions_max"][i]), len(data["actions_min"][i])
        trans.append(np.array(_as_tensor(data["trans"][i], (m, k, n), f"trans[{i + 1}]"), dtype=float))
    fixed = _renormalize(trans)
    if fixed:
        logger.info("%s: renormalized %d transition row(s) within %.0e of 1", source, fixed, ROW_SUM_TOL)

    game = FiniteGame(
        n,
        tuple(tuple(a) for a in data["actions_max"]),
        tuple(tuple(b) for b in data["actions_min"]),
        tuple(data["payoff"]),
        tuple(trans),
    )
    report = validate(game)
    if not report.ok:
        raise ValidationError(report)
    return game


def load(path: str | Path) -> FiniteGame:
    p = Path(path)
    data = parse_json_text(p.read_bytes(), source=str(p))
    return from_dict(data, source=str(p))


def save(game: FiniteGame, path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(game.to_dict(), allow_nan=False, ensure_ascii=False), encoding="utf-8")
