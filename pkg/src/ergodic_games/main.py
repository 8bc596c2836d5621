"""
ergodic_games.main
~~~~~~~~~~~~~~~~~~
Command-line entry point.

  ergodic-games validate     --game FILE
  ergodic-games analyze      --game FILE [--enum-cap N] [--out report.json]
  ergodic-games solve        --game FILE [--tol T] [--theta X] [--out solution.json]
  ergodic-games iterate      --game FILE --steps K [--out trace.csv]
  ergodic-games simulate     --game FILE --strategies FILE --state I [--out sim.json]
  ergodic-games perturb      --game FILE [--trials N] [--seed S] [--out probe.json]
  ergodic-games uniqueness   --game FILE [--starts N] [--seed S]
  ergodic-games matrix-solve --matrix FILE

Exit codes: 0 success, 1 usage / parse / validation errors, 2 expected
mathematical failures (NoConvergence, TooLarge, ...). Failures still produce
a JSON document, with an "error" section instead of "result".
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import jsonschema

from . import __version__, game_model, report
from .config import RootConfig, load_config
from .dominion import all_dominions, disjoint_dominions, ergodicity_crosscheck
from .errors import ErgodicGamesError, IoError, NoConvergence, SchemaError, UsageError
from .fixtures import load_operator
from .game_model import FiniteGame, Player
from .matrix_game import solve as solve_matrix
from .report import RunManifest
from .schemas import validate_document
from .shapley import OperatorHandle, value_iteration
from .sim import expected_payoff, simulate
from .solver import check_solution, extract_strategies, solvability_probe, solve_ergodic, uniqueness_probe
from .utils.jsonlog import log_run

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"

Result = Tuple[Dict[str, Any], str]


# ──────────────────────────────────────────────────────────────────────────────
# Parser
# ──────────────────────────────────────────────────────────────────────────────

class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; here that status means a math failure."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="YAML config file")
    common.add_argument("--out", type=str, default=None, help="output file (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("-q", "--quiet", action="store_true")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--tol", type=float, default=None)
    solver.add_argument("--theta", type=float, default=None)
    solver.add_argument("--max-iter", type=int, default=None)

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=None)

    parser = _Parser(prog="ergodic-games", description="Ergodicity and uniform values of zero-sum stochastic games")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", parents=[common], help="check a game file")
    p.add_argument("--game", required=True)

    p = sub.add_parser("analyze", parents=[common, solver, seeded], help="ergodicity verdict and dominions")
    p.add_argument("--game", required=True)
    p.add_argument("--enum-cap", type=int, default=None)
    p.add_argument("--trials", type=int, default=None, help="solvability-probe perturbations")
    p.add_argument("--skip-crosscheck", action="store_true")

    p = sub.add_parser("solve", parents=[common, solver], help="solve T(u) = lambda e + u")
    p.add_argument("--game", required=True)
    p.add_argument("--enum-cap", type=int, default=None)

    p = sub.add_parser("iterate", parents=[common], help="value iteration trace T^k(0)/k")
    p.add_argument("--game", required=True)
    p.add_argument("--steps", type=int, required=True)

    p = sub.add_parser("simulate", parents=[common, seeded], help="Monte Carlo play of stationary strategies")
    p.add_argument("--game", required=True)
    p.add_argument("--strategies", required=True)
    p.add_argument("--state", type=int, required=True, help="initial state (1-based)")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--episodes", type=int, default=None)

    p = sub.add_parser("perturb", parents=[common, solver, seeded], help="solvability probe over random g")
    p.add_argument("--game", required=True)
    p.add_argument("--trials", type=int, default=None)

    p = sub.add_parser("uniqueness", parents=[common, solver, seeded], help="bias uniqueness probe")
    p.add_argument("--game", required=True)
    p.add_argument("--starts", type=int, default=None)

    p = sub.add_parser("matrix-solve", parents=[common], help="solve one matrix game")
    p.add_argument("--matrix", required=True)
    p.add_argument("--tol", type=float, default=None)
    return parser


def _setup_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, datefmt=LOG_DATEFMT, stream=sys.stderr)
    logging.getLogger("ergodic_games").setLevel(level)


def _effective_config(args: argparse.Namespace) -> RootConfig:
    cfg = load_config(args.config, required=args.config is not None)
    get = lambda name: getattr(args, name, None)  # noqa: E731
    tol = get("tol")
    return cfg.with_overrides(
        solver__tol=tol if args.command != "matrix-solve" else None,
        matrix_game__tol_lp=tol if args.command == "matrix-solve" else None,
        solver__theta=get("theta"),
        solver__max_iter=get("max_iter"),
        dominion__enum_cap=get("enum_cap"),
        probe__seed=get("seed"),
        probe__trials=get("trials"),
        probe__uniqueness_starts=get("starts"),
        sim__seed=get("seed"),
        sim__horizon=get("horizon"),
        sim__episodes=get("episodes"),
    )


# ──────────────────────────────────────────────────────────────────────────────
# Helpers
# ──────────────────────────────────────────────────────────────────────────────

def _solver_options(cfg: RootConfig) -> Dict[str, Any]:
    s = cfg.solver
    return {
        "tol": s.tol,
        "max_iter": s.max_iter,
        "theta": s.theta,
        "stall_window": s.stall_window,
        "stall_ratio": s.stall_ratio,
    }


def _slice_options(cfg: RootConfig) -> Dict[str, Any]:
    d = cfg.dominion
    return {
        "kappas": d.kappas,
        "plateau_tol": d.plateau_tol,
        "decay_ratio": d.decay_ratio,
        "tol_supp": d.tol_supp,
        "tol_lp": cfg.matrix_game.tol_lp,
    }


def _operator(args, cfg: RootConfig, manifest: RunManifest) -> Tuple[OperatorHandle, Optional[FiniteGame]]:
    manifest.input_hash = report.file_hash(args.game)
    return load_operator(args.game, cfg.matrix_game.tol_lp)


def _game(args, cfg: RootConfig, manifest: RunManifest) -> FiniteGame:
    _, game = _operator(args, cfg, manifest)
    if game is None:
        raise SchemaError(f"{args.command} needs a game file, {args.game} holds a closed-form operator")
    return game


def _read_strategies(path: str) -> Tuple[List[Any], List[Any]]:
    """Accepts {"sigma", "tau"} or a whole `solve` output document."""
    data = game_model.parse_json_text(Path(path).read_bytes(), source=path)
    if isinstance(data, dict) and isinstance(data.get("result"), dict):
        data = data["result"].get("strategies") or {}
    if not isinstance(data, dict) or "sigma" not in data or "tau" not in data:
        raise SchemaError(f"{path}: expected an object with 'sigma' and 'tau'")
    return data["sigma"], data["tau"]


# ──────────────────────────────────────────────────────────────────────────────
# Commands
# ──────────────────────────────────────────────────────────────────────────────

def cmd_validate(args, cfg: RootConfig, manifest: RunManifest) -> Result:
    manifest.input_hash = report.file_hash(args.game)
    game = game_model.load(args.game)
    result = report.validation_doc(game_model.validate(game))
    result["n"] = game.n
    logger.info("%s: %d state(s), valid", args.game, game.n)
    return result, "validation"


def cmd_analyze(args, cfg: RootConfig, manifest: RunManifest) -> Result:
    game = _game(args, cfg, manifest)
    d = cfg.dominion
    verdict = disjoint_dominions(game, d.enum_cap, tol_supp=d.tol_supp)
    reports = [all_dominions(game, player, d.enum_cap, d.tol_supp) for player in Player]
    crosscheck = None
    if not args.skip_crosscheck:
        manifest.seeds = [cfg.probe.seed]
        crosscheck = ergodicity_crosscheck(
            game,
            d.enum_cap,
            num_perturbations=cfg.probe.trials,
            seed=cfg.probe.seed,
            solver_options=_solver_options(cfg),
            slice_options=_slice_options(cfg),
            threads=cfg.runtime.threads,
        )
    logger.info("analyze: ergodic=%s witness=%s", verdict.ergodic, verdict.witness_labels())
    return report.analyze_doc(verdict, reports, crosscheck), "analyze"


def cmd_solve(args, cfg: RootConfig, manifest: RunManifest) -> Result:
    T, game = _operator(args, cfg, manifest)
    try:
        sol = solve_ergodic(T, **_solver_options(cfg))
    except NoConvergence as exc:
        # a failed solve says nothing about ergodicity; show the combinatorial verdict next to it
        if game is not None and game.n <= cfg.dominion.enum_cap:
            verdict = disjoint_dominions(game, cfg.dominion.enum_cap, tol_supp=cfg.dominion.tol_supp)
            exc.context = {"dominion_verdict": report.verdict_doc(verdict)}
        raise
    pair = None
    if game is not None:
        pair = extract_strategies(game, sol.u, tol_lp=cfg.matrix_game.tol_lp)
    result = report.solution_doc(sol, pair)
    result["verified"] = check_solution(T, sol.lam, sol.u, max(cfg.solver.tol, 1e-7))
    return result, "solution"


def cmd_iterate(args, cfg: RootConfig, manifest: RunManifest) -> Result:
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    T, _ = _operator(args, cfg, manifest)
    trace = value_iteration(T, args.steps)
    result: Dict[str, Any] = {"steps": args.steps, "final": report.plain(trace.last())}
    if args.out:
        result["rows"] = report.write_trace_csv(trace, args.out)
        result["csv"] = str(args.out)
    else:
        result["rows"] = len(trace)
        result["trace"] = [{"k": k, "v": report.plain(v), "residual": res} for k, v, res in trace]
    return result, "iterate"


def cmd_simulate(args, cfg: RootConfig, manifest: RunManifest) -> Result:
    game = _game(args, cfg, manifest)
    if not 1 <= args.state <= game.n:
        raise UsageError(f"--state must lie in 1..{game.n}, got {args.state}")
    sigma, tau = _read_strategies(args.strategies)
    s = cfg.sim
    manifest.seeds = [s.seed]
    sim = simulate(game, sigma, tau, args.state - 1, s.horizon, s.episodes, s.seed,
                   chunk=s.chunk, threads=cfg.runtime.threads)
    exact = expected_payoff(game, sigma, tau, args.state - 1, s.horizon)
    return report.simulation_doc(sim, exact), "simulation"


def cmd_perturb(args, cfg: RootConfig, manifest: RunManifest) -> Result:
    T, _ = _operator(args, cfg, manifest)
    p = cfg.probe
    manifest.seeds = [p.seed]
    probe = solvability_probe(T, p.trials, p.seed, box=p.box, threads=cfg.runtime.threads, **_solver_options(cfg))
    return report.probe_doc(probe), "probe"


def cmd_uniqueness(args, cfg: RootConfig, manifest: RunManifest) -> Result:
    T, _ = _operator(args, cfg, manifest)
    p = cfg.probe
    manifest.seeds = [p.seed]
    result = uniqueness_probe(
        T,
        num_starts=p.uniqueness_starts,
        seed=p.seed,
        start_radius=p.start_radius,
        threads=cfg.runtime.threads,
        **_solver_options(cfg),
    )
    return report.uniqueness_doc(result), "uniqueness"


def cmd_matrix_solve(args, cfg: RootConfig, manifest: RunManifest) -> Result:
    manifest.input_hash = report.file_hash(args.matrix)
    data = game_model.parse_json_text(Path(args.matrix).read_bytes(), source=args.matrix)
    if isinstance(data, dict):
        data = data.get("matrix")
    if not isinstance(data, list):
        raise SchemaError(f"{args.matrix}: expected a list of rows or {{\"matrix\": [...]}}")
    sol = solve_matrix(data, cfg.matrix_game.tol_lp)
    return report.matrix_doc(sol), "matrix"


COMMANDS: Dict[str, Callable[..., Result]] = {
    "validate": cmd_validate,
    "analyze": cmd_analyze,
    "solve": cmd_solve,
    "iterate": cmd_iterate,
    "simulate": cmd_simulate,
    "perturb": cmd_perturb,
    "uniqueness": cmd_uniqueness,
    "matrix-solve": cmd_matrix_solve,
}


# ──────────────────────────────────────────────────────────────────────────────
# Dispatch
# ──────────────────────────────────────────────────────────────────────────────

def _document_path(args) -> Optional[str]:
    out = getattr(args, "out", None)
    if out and args.command == "iterate":
        return out + ".manifest.json"
    return out


def _emit(doc: Dict[str, Any], path: Optional[str]) -> None:
    if path:
        report.write_json(doc, path)
    else:
        print(report.dumps(doc))


def _run_log_path(cfg: Optional[RootConfig], out: Optional[str]) -> Optional[Path]:
    if cfg is not None and cfg.runtime.run_log:
        return Path(cfg.runtime.run_log)
    if out:
        return Path(out).parent / "runs.jsonl"
    return None


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    started = time.perf_counter()
    manifest = RunManifest(command="?")
    cfg: Optional[RootConfig] = None
    args = None
    try:
        args = build_parser().parse_args(argv)
        manifest.command = args.command
        _setup_logging(args.verbose, args.quiet)
        try:
            cfg = _effective_config(args)
        except (ValueError, FileNotFoundError) as exc:
            raise UsageError(str(exc)) from exc
        manifest.parameters = {
            **{k: v for k, v in vars(args).items() if k not in ("verbose", "quiet")},
            "config": asdict(cfg),
        }
        logger.info("ergodic-games %s: %s", args.command, getattr(args, "game", None) or getattr(args, "matrix", ""))
        try:
            result, schema = COMMANDS[args.command](args, cfg, manifest)
        except ErgodicGamesError:
            raise
        except OSError as exc:
            raise IoError(str(exc)) from exc
        except (ValueError, IndexError) as exc:
            raise UsageError(str(exc)) from exc
        manifest.wall_time = time.perf_counter() - started
        doc = report.document(manifest, result)
        validate_document(doc, schema)
        code = 0
    except ErgodicGamesError as exc:
        manifest.wall_time = time.perf_counter() - started
        doc = report.error_doc(manifest, exc, **getattr(exc, "context", {}))
        code = exc.exit_code
        log = logger.warning if code == 2 else logger.error
        log("%s failed: %s", manifest.command, exc)
    except jsonschema.ValidationError as exc:
        # an output document that breaks its own schema is a bug, not a user error
        logger.error("output document does not match its schema: %s", exc.message)
        raise

    out = _document_path(args) if args is not None else None
    _emit(doc, out)
    run_log = _run_log_path(cfg, getattr(args, "out", None))
    if run_log is not None:
        log_run(run_log, doc["manifest"], code)
    logger.info("%s finished with exit code %d in %.3fs", manifest.command, code, manifest.wall_time)
    return code


def main() -> int:
    return dispatch()


if __name__ == "__main__":
    raise SystemExit(main())
