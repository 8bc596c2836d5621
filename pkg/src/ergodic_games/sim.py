"""
ergodic_games.sim
~~~~~~~~~~~~~~~~~
Monte Carlo play under stationary strategies, the exact k-stage payoff by
expectation recursion, and best-response (exploitability) values.

Episodes run vectorized in chunks of fixed size; each chunk draws from its own
stream spawned off the master seed, so results depend on (seed, chunk) only,
never on the number of worker threads.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .game_model import FiniteGame, Player, check_strategy
from .shapley import fixed_strategy_operator, sup_norm, value_iteration

logger = logging.getLogger(__name__)

CHUNK = 1024


@dataclass(frozen=True)
class SimulationResult:
    initial_state: int
    horizon: int
    episodes: int
    mean_payoff: float
    stderr: float
    seed: int


def _sample_rows(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    """One categorical draw per row of `probs`."""
    cdf = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0]) * cdf[:, -1]
    idx = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def _run_chunk(game, sigma, tau, i0: int, k: int, size: int, rng: np.random.Generator) -> np.ndarray:
    states = np.full(size, i0, dtype=np.int64)
    totals = np.zeros(size)
    for _ in range(k):
        nxt = np.empty_like(states)
        for i in np.unique(states):
            sel = np.flatnonzero(states == i)
            m, kk = game.num_actions(int(i))
            a = rng.choice(m, size=sel.size, p=sigma[i])
            b = rng.choice(kk, size=sel.size, p=tau[i])
            totals[sel] += game.payoff[i][a, b]
            nxt[sel] = _sample_rows(rng, game.trans[i][a, b])
        states = nxt
    return totals / k


def simulate(
    game: FiniteGame,
    sigma: Sequence[Sequence[float]],
    tau: Sequence[Sequence[float]],
    i0: int,
    k: int,
    episodes: int,
    seed: int,
    chunk: int = CHUNK,
    threads: int = 1,
) -> SimulationResult:
    sigma = check_strategy(game, sigma, Player.MAX)
    tau = check_strategy(game, tau, Player.MIN)
    if k < 1 or episodes < 1:
        raise ValueError("horizon and episodes must be >= 1")
    if not 0 <= i0 < game.n:
        raise IndexError(f"initial state {i0 + 1} out of range 1..{game.n}")

    sizes = [min(chunk, episodes - start) for start in range(0, episodes, chunk)]
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(len(sizes))]
    jobs = list(zip(sizes, streams))

    def work(job: Tuple[int, np.random.Generator]) -> np.ndarray:
        size, rng = job
        return _run_chunk(game, sigma, tau, i0, k, size, rng)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads, thread_name_prefix="sim") as pool:
            parts = list(pool.map(work, jobs))
    else:
        parts = [work(job) for job in jobs]

    samples = np.concatenate(parts)
    mean = math.fsum(samples) / episodes
    if episodes > 1:
        var = math.fsum((samples - mean) ** 2) / (episodes - 1)
        stderr = math.sqrt(var / episodes)
    else:
        stderr = 0.0
    logger.info("simulated %d episodes of length %d from state %d: mean %.6g (stderr %.2g)",
                episodes, k, i0 + 1, mean, stderr)
    return SimulationResult(i0, k, episodes, mean, stderr, seed)


def expected_payoff(
    game: FiniteGame,
    sigma: Sequence[Sequence[float]],
    tau: Sequence[Sequence[float]],
    i0: int,
    k: int,
) -> float:
    """Exact k-stage average payoff by a backward pass over the induced Markov chain."""
    sigma = check_strategy(game, sigma, Player.MAX)
    tau = check_strategy(game, tau, Player.MIN)
    r = np.array([sigma[i] @ game.payoff[i] @ tau[i] for i in range(game.n)])
    P = np.array([np.einsum("a,abj,b->j", sigma[i], game.trans[i], tau[i]) for i in range(game.n)])
    V = np.zeros(game.n)
    for _ in range(k):
        V = r + P @ V
    return float(V[i0]) / k


def exploitability(
    game: FiniteGame,
    strategy: Sequence[Sequence[float]],
    i0: int,
    k: int,
    fixed: Player = Player.MAX,
) -> float:
    """k-stage value of the best response against a fixed stationary strategy.

    fixed=MAX: the lowest average payoff MIN can hold sigma to.
    fixed=MIN: the highest average payoff MAX can extract against tau.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    trace = value_iteration(fixed_strategy_operator(game, strategy, fixed), k)
    return float(trace.last()[i0])


def uniform_value_bounds(lam: float, epsilon: float, u: Sequence[float], k: int) -> Tuple[float, float]:
    """lambda -/+ (epsilon + 2 ||u|| / k): what the stationary strategies guarantee at horizon k."""
    slack = epsilon + 2.0 * sup_norm(u) / k
    return lam - slack, lam + slack


def exploitability_table(game, pair, lam: float, u, k: int) -> List[dict]:
    """Both best-response values per initial state against the bounds."""
    lo, hi = uniform_value_bounds(lam, pair.epsilon, u, k)
    rows = []
    for i in range(game.n):
        vs_sigma = exploitability(game, pair.sigma, i, k, Player.MAX)
        vs_tau = exploitability(game, pair.tau, i, k, Player.MIN)
        rows.append({
            "state": i + 1,
            "best_response_vs_sigma": vs_sigma,
            "best_response_vs_tau": vs_tau,
            "lower_bound": lo,
            "upper_bound": hi,
            "holds": vs_sigma >= lo and vs_tau <= hi,
        })
    return rows
