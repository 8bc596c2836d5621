"""
ergodic_games.dominion
~~~~~~~~~~~~~~~~~~~~~~
Combinatorial ergodicity analysis.

A dominion of MAX is a nonempty set D of states such that every i in D has a
pure MAX action a whose transitions stay in D whatever MIN plays (and
symmetrically for MIN). The game is ergodic iff the players have no disjoint
dominions; the search below enumerates candidate sets exactly, so it is capped
at `enum_cap` states.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from . import solver
from .errors import EmptySet, NoConvergence, TooLarge
from .game_model import TOL_SUPP, FiniteGame, Player, states_label
from .matrix_game import TOL_LP
from .shapley import eval_game_operator, game_operator

logger = logging.getLogger(__name__)

StateSet = FrozenSet[int]

ENUM_CAP = 16
KAPPAS: Tuple[float, ...] = (1e1, 1e2, 1e3, 1e4, 1e5, 1e6)
PLATEAU_TOL = 1e-6
DECAY_RATIO = 0.5
# relative LP round-off allowed on slice evaluations
ROUNDOFF = 1e-13


# ──────────────────────────────────────────────────────────────────────────────
# Result types
# ──────────────────────────────────────────────────────────────────────────────

@dataclass
class DominionReport:
    player: Player
    all_dominions: Optional[List[StateSet]] = None
    cache: Dict[StateSet, bool] = field(default_factory=dict, repr=False)

    def labels(self) -> List[List[int]]:
        return [states_label(d) for d in self.all_dominions or []]


@dataclass(frozen=True)
class ErgodicityVerdict:
    ergodic: bool
    method: str  # "combinatorial" | "slice_probe"
    witness: Optional[Tuple[StateSet, StateSet]] = None  # (D_max, D_min)

    def witness_labels(self) -> Optional[List[List[int]]]:
        if self.witness is None:
            return None
        return [states_label(self.witness[0]), states_label(self.witness[1])]


@dataclass
class CrosscheckReport:
    combinatorial: ErgodicityVerdict
    slice_limit: ErgodicityVerdict
    probe: solver.ProbeResult
    probe_ergodic: bool
    targeted_draws: int = 0
    slice_witness: Optional[Tuple[StateSet, StateSet]] = None

    @property
    def agree(self) -> bool:
        c = self.combinatorial.ergodic
        return c == self.slice_limit.ergodic and c == self.probe_ergodic

    def disagreements(self) -> List[str]:
        out = []
        c = self.combinatorial.ergodic
        if self.slice_limit.ergodic != c:
            out.append(f"slice-limit verdict {self.slice_limit.ergodic} vs combinatorial {c}")
        if self.probe_ergodic != c:
            out.append(f"solvability probe verdict {self.probe_ergodic} vs combinatorial {c}")
        return out


# ──────────────────────────────────────────────────────────────────────────────
# Dominion tests
# ──────────────────────────────────────────────────────────────────────────────

def _leaks(game: FiniteGame, i: int, inside: np.ndarray, tol_supp: float) -> np.ndarray:
    """leaks[a, b] is True when p(. | i,a,b) puts mass > tol_supp outside the set."""
    return (game.trans[i][:, :, ~inside] > tol_supp).any(axis=2)


def _has_safe_action(game: FiniteGame, player: Player, i: int, inside: np.ndarray, tol_supp: float) -> bool:
    leaks = _leaks(game, i, inside, tol_supp)
    if player is Player.MAX:
        return bool((~leaks.any(axis=1)).any())
    return bool((~leaks.any(axis=0)).any())


def _mask(n: int, D: Iterable[int]) -> np.ndarray:
    inside = np.zeros(n, dtype=bool)
    inside[list(D)] = True
    return inside


def is_dominion(game: FiniteGame, player: Player, D: Iterable[int], tol_supp: float = TOL_SUPP) -> bool:
    D = frozenset(D)
    if not D:
        raise EmptySet("a dominion is a nonempty set of states")
    inside = _mask(game.n, D)
    return all(_has_safe_action(game, player, i, inside, tol_supp) for i in D)


def largest_dominion_within(
    game: FiniteGame,
    player: Player,
    S: Iterable[int],
    tol_supp: float = TOL_SUPP,
) -> StateSet:
    """Greatest fixed point: drop states with no action keeping play inside, until stable."""
    current = set(S)
    changed = True
    while changed and current:
        changed = False
        inside = _mask(game.n, current)
        for i in sorted(current):
            if not _has_safe_action(game, player, i, inside, tol_supp):
                current.discard(i)
                changed = True
    return frozenset(current)


def _subsets(n: int) -> Iterator[StateSet]:
    """Nonempty subsets by increasing cardinality, lexicographic within a size."""
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            yield frozenset(combo)


def _check_cap(game: FiniteGame, enum_cap: int) -> None:
    if game.n > enum_cap:
        raise TooLarge(game.n, enum_cap)


def all_dominions(
    game: FiniteGame,
    player: Player,
    enum_cap: int = ENUM_CAP,
    tol_supp: float = TOL_SUPP,
) -> DominionReport:
    _check_cap(game, enum_cap)
    report = DominionReport(player=player, all_dominions=[])
    for D in _subsets(game.n):
        ok = is_dominion(game, player, D, tol_supp)
        report.cache[D] = ok
        if ok:
            report.all_dominions.append(D)
    return report


def disjoint_dominions(
    game: FiniteGame,
    enum_cap: int = ENUM_CAP,
    first: Player = Player.MIN,
    tol_supp: float = TOL_SUPP,
) -> ErgodicityVerdict:
    """Search for a dominion of `first` whose complement holds a dominion of the other player."""
    _check_cap(game, enum_cap)
    everything = frozenset(range(game.n))
    other = first.opponent
    for D in _subsets(game.n):
        if not is_dominion(game, first, D, tol_supp):
            continue
        W = largest_dominion_within(game, other, everything - D, tol_supp)
        if W:
            witness = (W, D) if first is Player.MIN else (D, W)
            logger.info(
                "disjoint dominions found: MAX %s, MIN %s",
                states_label(witness[0]), states_label(witness[1]),
            )
            return ErgodicityVerdict(ergodic=False, method="combinatorial", witness=witness)
    return ErgodicityVerdict(ergodic=True, method="combinatorial")


# ──────────────────────────────────────────────────────────────────────────────
# Analytic side: asymptotics of T along kappa e_{[n] \ D}
# ──────────────────────────────────────────────────────────────────────────────

def _support_view(game: FiniteGame, tol_supp: float) -> Tuple[FiniteGame, float]:
    """The game with transition entries <= tol_supp zeroed, and the kappa scale for it.

    The scale (span(r) + 1) / p_min puts the schedule past the point where any
    leaking action with mass >= p_min can still beat a safe one on payoff.
    """
    trans = [np.where(t > tol_supp, t, 0.0) for t in game.trans]
    positive = [t[t > 0] for t in trans]
    p_min = min((float(p.min()) for p in positive if p.size), default=1.0)
    lo, hi = game.payoff_range()
    scale = max(1.0, (hi - lo + 1.0) / p_min)
    if all(np.array_equal(t, s) for t, s in zip(trans, game.trans)):
        return game, scale
    view = FiniteGame(game.n, game.actions_max, game.actions_min, game.payoff, tuple(trans))
    return view, scale


def slice_limit_test(
    game: FiniteGame,
    D: Iterable[int],
    player: Player,
    kappas: Sequence[float] = KAPPAS,
    plateau_tol: float = PLATEAU_TOL,
    decay_ratio: float = DECAY_RATIO,
    tol_lp: float = TOL_LP,
    tol_supp: float = TOL_SUPP,
) -> bool:
    """Whether T_i(kappa e_{[n]\\D}) stays bounded on D as kappa -> -inf (MAX) or +inf (MIN).

    On a geometric schedule an unbounded coordinate moves linearly, so its drift
    grows by the schedule ratio from one step to the next; a bounded one settles
    like 1/kappa and its drift shrinks by the same ratio. The last two drifts
    decide: bounded iff d_last <= floor + decay_ratio * d_prev, where the floor
    is plateau_tol plus the LP round-off at the largest kappa.
    """
    D = frozenset(D)
    if not D:
        raise EmptySet("slice_limit_test needs a nonempty set")
    if len(kappas) < 3:
        raise ValueError("slice_limit_test needs at least three kappa values")
    outside = ~_mask(game.n, D)
    if not outside.any():
        return True
    view, scale = _support_view(game, tol_supp)
    sign = -1.0 if player is Player.MAX else 1.0
    idx = sorted(D)
    schedule = [float(k) * scale for k in kappas[-3:]]
    evals = [eval_game_operator(view, np.where(outside, sign * k, 0.0), tol_lp)[idx] for k in schedule]
    d_prev = np.abs(evals[1] - evals[0])
    d_last = np.abs(evals[2] - evals[1])
    floor = plateau_tol + ROUNDOFF * schedule[-1]
    return bool((d_last <= floor + decay_ratio * d_prev).all())


def slice_limit_dominions(game: FiniteGame, player: Player, enum_cap: int = ENUM_CAP, **kwargs) -> List[StateSet]:
    _check_cap(game, enum_cap)
    return [D for D in _subsets(game.n) if slice_limit_test(game, D, player, **kwargs)]


def slice_limit_verdict(
    game: FiniteGame, enum_cap: int = ENUM_CAP, **kwargs
) -> Tuple[ErgodicityVerdict, Optional[Tuple[StateSet, StateSet]]]:
    """Ergodic iff no disjoint pair (I, J) passes the slice-limit test for MAX resp. MIN."""
    maxes = slice_limit_dominions(game, Player.MAX, enum_cap, **kwargs)
    mins = slice_limit_dominions(game, Player.MIN, enum_cap, **kwargs)
    for I in maxes:
        for J in mins:
            if not I & J:
                return ErgodicityVerdict(ergodic=False, method="slice_probe"), (I, J)
    return ErgodicityVerdict(ergodic=True, method="slice_probe"), None


# ──────────────────────────────────────────────────────────────────────────────
# Three-way crosscheck
# ──────────────────────────────────────────────────────────────────────────────

def targeted_perturbations(
    game: FiniteGame,
    witness: Tuple[StateSet, StateSet],
    count: int,
    seed: int,
) -> List[np.ndarray]:
    """Perturbations that reward MAX on D_max and punish on D_min beyond the payoff span."""
    lo, hi = game.payoff_range()
    c = (hi - lo) + 1.0
    base = c * (_mask(game.n, witness[0]).astype(float) - _mask(game.n, witness[1]).astype(float))
    rng = np.random.default_rng(seed)
    return [base * (1.0 + t / 10.0) + rng.uniform(-0.1, 0.1, game.n) for t in range(count)]


def ergodicity_crosscheck(
    game: FiniteGame,
    enum_cap: int = ENUM_CAP,
    num_perturbations: int = 20,
    seed: int = 0,
    extra_draws: int = 50,
    solver_options: Optional[dict] = None,
    slice_options: Optional[dict] = None,
    threads: int = 1,
) -> CrosscheckReport:
    combinatorial = disjoint_dominions(game, enum_cap)
    slice_verdict, slice_witness = slice_limit_verdict(game, enum_cap, **(slice_options or {}))

    T = game_operator(game)
    options = dict(solver_options or {})
    probe = solver.solvability_probe(T, num_perturbations, seed, threads=threads, **options)
    probe_ergodic = probe.fraction == 1.0

    targeted = 0
    if not combinatorial.ergodic and probe_ergodic:
        # uniform draws may all land on solvable g; aim at the witness
        for g in targeted_perturbations(game, combinatorial.witness, extra_draws, seed):
            targeted += 1
            try:
                solver.solve_ergodic(T.perturbed(g), **options)
            except NoConvergence:
                probe_ergodic = False
                break

    report = CrosscheckReport(
        combinatorial=combinatorial,
        slice_limit=slice_verdict,
        probe=probe,
        probe_ergodic=probe_ergodic,
        targeted_draws=targeted,
        slice_witness=slice_witness,
    )
    for issue in report.disagreements():
        logger.warning("ergodicity crosscheck disagreement: %s", issue)
    return report
