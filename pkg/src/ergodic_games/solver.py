"""
ergodic_games.solver
~~~~~~~~~~~~~~~~~~~~
The ergodic equation T(u) = lambda e + u.

solve_ergodic runs the averaged iteration u <- (1-theta) u + theta T(u) in the
quotient space (canonical representative min u = 0). Its Hilbert residual
||T(u) - u||_H never increases, so a residual that stops shrinking cannot
reach tol: the iteration stops early with NoConvergence instead of burning
max_iter.

NoConvergence is not a non-ergodicity verdict. The dominion module is the
authority on that.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import matrix_game
from .errors import NoConvergence
from .game_model import FiniteGame
from .shapley import OperatorHandle, QuotientVector, canonicalize, hilbert, sup_norm

logger = logging.getLogger(__name__)

TOL = 1e-8
MAX_ITER = 200_000
THETA = 0.5
STALL_WINDOW = 2000
STALL_RATIO = 1e-3
MONOTONE_SLACK = 1e-12


# ──────────────────────────────────────────────────────────────────────────────
# Result types
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ErgodicSolution:
    lam: float
    u: QuotientVector
    residual: float
    iterations: int
    trace: Optional[List[float]] = field(default=None, repr=False)
    monotone: bool = True

    @property
    def bias(self) -> np.ndarray:
        return self.u.rep


@dataclass(frozen=True)
class StrategyPair:
    sigma: Tuple[np.ndarray, ...]
    tau: Tuple[np.ndarray, ...]
    epsilon: float
    # per state: (min_b (sigma_i^T M)_b, max_a (M tau_i)_a, T_i(u))
    certificates: Tuple[Tuple[float, float, float], ...] = field(default=(), repr=False)

    def certified(self) -> bool:
        return all(lo >= t - self.epsilon and hi <= t + self.epsilon for lo, hi, t in self.certificates)


@dataclass
class ProbeFailure:
    g: np.ndarray
    residual: float
    iterations: int


@dataclass
class ProbeResult:
    trials: int
    seed: int
    successes: int = 0
    failures: List[ProbeFailure] = field(default_factory=list)
    lambdas: List[Optional[float]] = field(default_factory=list)
    perturbations: List[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def fraction(self) -> float:
        return self.successes / self.trials if self.trials else 0.0


@dataclass
class UniquenessResult:
    unique: bool
    representatives: List[QuotientVector]
    lambdas: List[float]
    seed: int

    @property
    def label(self) -> str:
        return "Unique" if self.unique else "MultipleFound"


# ──────────────────────────────────────────────────────────────────────────────
# Ergodic equation
# ──────────────────────────────────────────────────────────────────────────────

def _lambda_estimate(r: np.ndarray) -> float:
    return 0.5 * (float(r.max()) + float(r.min()))


def solve_ergodic(
    T: OperatorHandle,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
    theta: float = THETA,
    u0: Optional[Sequence[float]] = None,
    stall_window: int = STALL_WINDOW,
    stall_ratio: float = STALL_RATIO,
    keep_trace: bool = True,
) -> ErgodicSolution:
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    u = canonicalize(np.zeros(T.n) if u0 is None else u0).rep
    trace: List[float] = []
    best = (np.inf, u)
    prev = np.inf
    monotone = True

    for it in range(max_iter + 1):
        Tu = T(u)
        r = Tu - u
        res = hilbert(r)
        trace.append(res)
        if res < best[0]:
            best = (res, u)
        if res > prev + MONOTONE_SLACK + 4 * matrix_game.TOL_LP * max(1.0, sup_norm(u)):
            if monotone:
                logger.warning("residual increased at iteration %d: %.3e -> %.3e", it, prev, res)
            monotone = False
        prev = res

        if res <= tol:
            lam = _lambda_estimate(r)
            logger.info("ergodic equation solved: lambda=%.12g residual=%.2e iterations=%d", lam, res, it)
            return ErgodicSolution(
                lam=lam,
                u=canonicalize(u),
                residual=res,
                iterations=it,
                trace=trace if keep_trace else None,
                monotone=monotone,
            )
        if it == max_iter:
            break
        if stall_window and it >= stall_window:
            earlier = trace[it - stall_window]
            if res > earlier * (1.0 - stall_ratio):
                raise NoConvergence(
                    f"residual stalled over {stall_window} iterations",
                    residual=best[0], iterations=it, best_u=canonicalize(best[1]), trace=trace,
                )
        u = canonicalize((1.0 - theta) * u + theta * Tu).rep
        logger.debug("iteration %d residual %.3e", it, res)

    raise NoConvergence(
        f"no convergence within max_iter={max_iter}",
        residual=best[0], iterations=max_iter, best_u=canonicalize(best[1]), trace=trace,
    )


def check_solution(T: OperatorHandle, lam: float, u: Sequence[float], tol: float = TOL) -> bool:
    u = u.rep if isinstance(u, QuotientVector) else np.asarray(u, dtype=float)
    return sup_norm(T(u) - lam - u) <= tol


def extract_strategies(
    game: FiniteGame,
    u: Sequence[float],
    epsilon: float = 0.0,
    tol_lp: float = matrix_game.TOL_LP,
) -> StrategyPair:
    """Optimal mixed actions of the one-shot games M^{i,u}, with their guarantees attached."""
    u = u.rep if isinstance(u, QuotientVector) else np.asarray(u, dtype=float)
    sigma, tau, certs = [], [], []
    scale = 1.0
    for i in range(game.n):
        M = game.stage_matrix(i, u)
        sol = matrix_game.solve(M, tol_lp)
        lo, hi = sol.guarantees(M)
        sigma.append(sol.x)
        tau.append(sol.y)
        certs.append((lo, hi, sol.value))
        scale = max(scale, float(M.max() - M.min()))
    eps = max(float(epsilon), 2 * tol_lp * scale)
    return StrategyPair(tuple(sigma), tuple(tau), eps, tuple(certs))


# ──────────────────────────────────────────────────────────────────────────────
# Probes
# ──────────────────────────────────────────────────────────────────────────────

def _streams(seed: int, count: int) -> List[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads, thread_name_prefix="ergodic") as pool:
        return list(pool.map(fn, items))


def solvability_probe(
    T: OperatorHandle,
    num_perturbations: int = 20,
    seed: int = 0,
    box: float = 1.0,
    threads: int = 1,
    **solve_options,
) -> ProbeResult:
    """Try the ergodic equation for g + T with g uniform in [-box, box]^n."""
    draws = [rng.uniform(-box, box, T.n) for rng in _streams(seed, num_perturbations)]

    def attempt(g: np.ndarray):
        try:
            return solve_ergodic(T.perturbed(g), keep_trace=False, **solve_options)
        except NoConvergence as exc:
            return exc

    outcomes = _map(attempt, draws, threads)
    result = ProbeResult(trials=num_perturbations, seed=seed, perturbations=draws)
    for g, out in zip(draws, outcomes):
        if isinstance(out, NoConvergence):
            result.failures.append(ProbeFailure(g=g, residual=out.residual, iterations=out.iterations))
            result.lambdas.append(None)
        else:
            result.successes += 1
            result.lambdas.append(out.lam)
    logger.info("solvability probe: %d/%d perturbations solvable (seed %d)",
                result.successes, num_perturbations, seed)
    return result


def uniqueness_probe(
    T: OperatorHandle,
    g: Optional[Sequence[float]] = None,
    num_starts: int = 10,
    seed: int = 0,
    start_radius: float = 10.0,
    threads: int = 1,
    **solve_options,
) -> UniquenessResult:
    """Solve from several random starts and cluster the canonical biases.

    One-sided: several clusters prove non-uniqueness, one cluster only means
    no second solution was found.
    """
    target = T if g is None else T.perturbed(g)
    tol = solve_options.get("tol", TOL)
    starts = [rng.uniform(-start_radius, start_radius, T.n) for rng in _streams(seed, num_starts)]
    solutions = _map(lambda u0: solve_ergodic(target, u0=u0, **solve_options), starts, threads)

    reps: List[QuotientVector] = []
    lams: List[float] = []
    for sol in solutions:
        lams.append(sol.lam)
        if all(sol.u.distance(rep) > 100 * tol for rep in reps):
            reps.append(sol.u)
    logger.info("uniqueness probe: %d cluster(s) from %d starts", len(reps), num_starts)
    return UniquenessResult(unique=len(reps) == 1, representatives=reps, lambdas=lams, seed=seed)
