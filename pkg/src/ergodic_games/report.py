"""
ergodic_games.report
~~~~~~~~~~~~~~~~~~~~
Output documents for the CLI.

Every document is {"manifest": ..., "result": ...} (or "error" instead of
"result"); state labels are 1-based; floats use the shortest round-trip repr,
so reloading gives back the exact doubles.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .dominion import CrosscheckReport, DominionReport, ErgodicityVerdict
from .errors import ErgodicGamesError
from .game_model import ValidationReport, states_label
from .matrix_game import MatrixGameSolution
from .shapley import ValueIterationTrace
from .sim import SimulationResult
from .solver import ErgodicSolution, ProbeResult, StrategyPair, UniquenessResult


@dataclass
class RunManifest:
    command: str
    version: str = __version__
    input_hash: Optional[str] = None
    seeds: List[int] = field(default_factory=list)
    wall_time: float = 0.0
    parameters: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return plain(asdict(self))


def file_hash(path: str | Path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def plain(obj: Any) -> Any:
    """numpy / set / tuple values -> JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(plain(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


# ──────────────────────────────────────────────────────────────────────────────
# Result sections
# ──────────────────────────────────────────────────────────────────────────────

def validation_doc(report: ValidationReport) -> Dict[str, Any]:
    return {
        "ok": report.ok,
        "issues": [{"location": loc, "message": msg} for loc, msg in report.describe()],
    }


def matrix_doc(sol: MatrixGameSolution) -> Dict[str, Any]:
    return plain({"value": sol.value, "x": sol.x, "y": sol.y, "gap": sol.gap, "pivots": sol.pivots})


def strategies_doc(pair: StrategyPair) -> Dict[str, Any]:
    return plain({
        "sigma": list(pair.sigma),
        "tau": list(pair.tau),
        "epsilon": pair.epsilon,
        "certified": pair.certified(),
    })


def solution_doc(sol: ErgodicSolution, pair: Optional[StrategyPair] = None) -> Dict[str, Any]:
    return plain({
        "lambda": sol.lam,
        "u": sol.u.rep,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "monotone": sol.monotone,
        "strategies": strategies_doc(pair) if pair is not None else None,
    })


def verdict_doc(verdict: ErgodicityVerdict) -> Dict[str, Any]:
    return {"ergodic": verdict.ergodic, "method": verdict.method, "witness": verdict.witness_labels()}


def analyze_doc(
    verdict: ErgodicityVerdict,
    reports: Sequence[DominionReport],
    crosscheck: Optional[CrosscheckReport] = None,
) -> Dict[str, Any]:
    doc: Dict[str, Any] = verdict_doc(verdict)
    doc["dominions"] = {r.player.value: r.labels() for r in reports}
    if crosscheck is not None:
        doc["crosscheck"] = plain({
            "combinatorial": crosscheck.combinatorial.ergodic,
            "slice_limit": crosscheck.slice_limit.ergodic,
            "slice_witness": (
                [states_label(s) for s in crosscheck.slice_witness] if crosscheck.slice_witness else None
            ),
            "solvability_probe": crosscheck.probe_ergodic,
            "probe_fraction": crosscheck.probe.fraction,
            "probe_seed": crosscheck.probe.seed,
            "targeted_draws": crosscheck.targeted_draws,
            "agree": crosscheck.agree,
            "disagreements": crosscheck.disagreements(),
        })
    return doc


def probe_doc(probe: ProbeResult) -> Dict[str, Any]:
    failed = {id(f.g): f for f in probe.failures}
    draws = []
    for g, lam in zip(probe.perturbations, probe.lambdas):
        f = failed.get(id(g))
        draws.append({
            "g": g,
            "solvable": f is None,
            "lambda": lam,
            "residual": f.residual if f is not None else None,
        })
    return plain({
        "trials": probe.trials,
        "seed": probe.seed,
        "successes": probe.successes,
        "fraction": probe.fraction,
        "draws": draws,
    })


def uniqueness_doc(result: UniquenessResult) -> Dict[str, Any]:
    return plain({
        "verdict": result.label,
        "representatives": [rep.rep for rep in result.representatives],
        "lambdas": result.lambdas,
        "seed": result.seed,
    })


def simulation_doc(sim: SimulationResult, exact: Optional[float] = None) -> Dict[str, Any]:
    return plain({
        "initial_state": sim.initial_state + 1,
        "horizon": sim.horizon,
        "episodes": sim.episodes,
        "mean_payoff": sim.mean_payoff,
        "stderr": sim.stderr,
        "seed": sim.seed,
        "exact_payoff": exact,
    })


def error_doc(manifest: RunManifest, exc: ErgodicGamesError, **extra: Any) -> Dict[str, Any]:
    err = exc.to_dict()
    err.update(extra)
    return {"manifest": manifest.to_dict(), "error": plain(err)}


def document(manifest: RunManifest, result: Any) -> Dict[str, Any]:
    return {"manifest": manifest.to_dict(), "result": plain(result)}


# ──────────────────────────────────────────────────────────────────────────────
# Writers
# ──────────────────────────────────────────────────────────────────────────────

def dumps(doc: Any) -> str:
    return json.dumps(plain(doc), indent=2, allow_nan=False, ensure_ascii=False)


def write_json(doc: Any, path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(dumps(doc) + "\n", encoding="utf-8")


def write_trace_csv(trace: ValueIterationTrace, path: str | Path) -> int:
    """One row per k: k, v^k_1..v^k_n, hilbert(v^k - v^{k-1}). Returns the row count."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    n = len(trace.values[0]) if trace.values else 0
    with p.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["k", *[f"v{i + 1}" for i in range(n)], "residual"])
        for k, v, res in trace:
            writer.writerow([k, *[repr(float(c)) for c in v], repr(float(res))])
    return len(trace)
