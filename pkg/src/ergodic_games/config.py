"""
ergodic_games.config
~~~~~~~~~~~~~~~~~~~~
Config loader.

  - Every section is optional; missing keys fall back to the dataclass defaults
  - Values written as "env:NAME" are resolved from the environment
  - ERGODIC_GAMES_THREADS caps runtime.threads when set
  - CLI flags are applied on top with `with_overrides`
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml

THREADS_ENV = "ERGODIC_GAMES_THREADS"


# ──────────────────────────────────────────────────────────────────────────────
# ENV resolution
# ──────────────────────────────────────────────────────────────────────────────

def _env_resolve(val: Any) -> Any:
    if isinstance(val, str) and val.strip().lower().startswith("env:"):
        key = val.split(":", 1)[1].strip()
        return os.getenv(key, "")
    return val


def _deep_resolve(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _deep_resolve(_env_resolve(v)) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_deep_resolve(_env_resolve(v)) for v in obj]
    return _env_resolve(obj)


# ──────────────────────────────────────────────────────────────────────────────
# Config models
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class MatrixGameConfig:
    tol_lp: float = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    max_iter: int = 200_000
    theta: float = 0.5
    stall_window: int = 2000
    stall_ratio: float = 1e-3


@dataclass(frozen=True)
class ProbeConfig:
    trials: int = 20
    seed: int = 0
    box: float = 1.0
    uniqueness_starts: int = 10
    start_radius: float = 10.0


@dataclass(frozen=True)
class DominionConfig:
    enum_cap: int = 16
    tol_supp: float = 1e-12
    kappas: Tuple[float, ...] = (1e1, 1e2, 1e3, 1e4, 1e5, 1e6)
    plateau_tol: float = 1e-6
    decay_ratio: float = 0.5


@dataclass(frozen=True)
class SimConfig:
    episodes: int = 10_000
    horizon: int = 100
    seed: int = 0
    chunk: int = 1024


@dataclass(frozen=True)
class RuntimeConfig:
    threads: int = field(default_factory=lambda: max(1, min(8, os.cpu_count() or 1)))
    run_log: Optional[str] = None


@dataclass(frozen=True)
class RootConfig:
    matrix_game: MatrixGameConfig = field(default_factory=MatrixGameConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    dominion: DominionConfig = field(default_factory=DominionConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)

    def with_overrides(self, **flags: Any) -> "RootConfig":
        """Apply CLI flags given as section__key=value; None values are ignored."""
        sections: Dict[str, Dict[str, Any]] = {}
        for name, value in flags.items():
            if value is None:
                continue
            section, key = name.split("__", 1)
            sections.setdefault(section, {})[key] = value
        cfg = self
        for section, values in sections.items():
            cfg = replace(cfg, **{section: replace(getattr(cfg, section), **values)})
        _sanity_check(cfg)
        return cfg


# ──────────────────────────────────────────────────────────────────────────────
# Loader
# ──────────────────────────────────────────────────────────────────────────────

def _section(raw: Dict[str, Any], name: str) -> Dict[str, Any]:
    val = raw.get(name) or {}
    if not isinstance(val, dict):
        raise ValueError(f"config section '{name}' must be a mapping")
    return val


def _threads_capped_by_env(threads: int) -> int:
    val = os.getenv(THREADS_ENV, "").strip()
    if not val:
        return threads
    try:
        cap = int(val)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {val!r}")
    return min(threads, cap)


def load_config(path: str | Path | None = None, *, required: bool = False) -> RootConfig:
    raw: Dict[str, Any] = {}
    if path is not None:
        p = Path(path)
        if p.exists():
            raw = yaml.safe_load(p.read_text()) or {}
        elif required:
            raise FileNotFoundError(f"Config not found: {p}")
    if not isinstance(raw, dict):
        raise ValueError("config root must be a mapping")
    raw = _deep_resolve(raw)

    # ── MATRIX GAME ──────────────────────────────────────────────────────────
    mg_raw = _section(raw, "matrix_game")
    mg_cfg = MatrixGameConfig(tol_lp=float(mg_raw.get("tol_lp", 1e-9)))

    # ── SOLVER ───────────────────────────────────────────────────────────────
    s_raw = _section(raw, "solver")
    solver_cfg = SolverConfig(
        tol=float(s_raw.get("tol", 1e-8)),
        max_iter=int(s_raw.get("max_iter", 200_000)),
        theta=float(s_raw.get("theta", 0.5)),
        stall_window=int(s_raw.get("stall_window", 2000)),
        stall_ratio=float(s_raw.get("stall_ratio", 1e-3)),
    )

    # ── PROBES ───────────────────────────────────────────────────────────────
    p_raw = _section(raw, "probe")
    probe_cfg = ProbeConfig(
        trials=int(p_raw.get("trials", 20)),
        seed=int(p_raw.get("seed", 0)),
        box=float(p_raw.get("box", 1.0)),
        uniqueness_starts=int(p_raw.get("uniqueness_starts", 10)),
        start_radius=float(p_raw.get("start_radius", 10.0)),
    )

    # ── DOMINIONS ────────────────────────────────────────────────────────────
    d_raw = _section(raw, "dominion")
    kappas = d_raw.get("kappas") or DominionConfig.kappas
    dominion_cfg = DominionConfig(
        enum_cap=int(d_raw.get("enum_cap", 16)),
        tol_supp=float(d_raw.get("tol_supp", 1e-12)),
        kappas=tuple(float(k) for k in kappas),
        plateau_tol=float(d_raw.get("plateau_tol", 1e-6)),
        decay_ratio=float(d_raw.get("decay_ratio", 0.5)),
    )

    # ── SIMULATION ───────────────────────────────────────────────────────────
    sim_raw = _section(raw, "sim")
    sim_cfg = SimConfig(
        episodes=int(sim_raw.get("episodes", 10_000)),
        horizon=int(sim_raw.get("horizon", 100)),
        seed=int(sim_raw.get("seed", 0)),
        chunk=int(sim_raw.get("chunk", 1024)),
    )

    # ── RUNTIME ──────────────────────────────────────────────────────────────
    rt_raw = _section(raw, "runtime")
    threads_raw = rt_raw.get("threads")
    threads = int(threads_raw) if threads_raw not in (None, "") else RuntimeConfig().threads
    runtime_cfg = RuntimeConfig(
        threads=_threads_capped_by_env(threads),
        run_log=(str(rt_raw["run_log"]) if rt_raw.get("run_log") else None),
    )

    cfg = RootConfig(
        matrix_game=mg_cfg,
        solver=solver_cfg,
        probe=probe_cfg,
        dominion=dominion_cfg,
        sim=sim_cfg,
        runtime=runtime_cfg,
    )
    _sanity_check(cfg)
    return cfg


# ── SANITY CHECKS ─────────────────────────────────────────────────────────────

def _sanity_check(cfg: RootConfig) -> None:
    if not 0.0 < cfg.solver.theta <= 1.0:
        raise ValueError(f"solver.theta must lie in (0, 1], got {cfg.solver.theta}")
    for key, val in (
        ("matrix_game.tol_lp", cfg.matrix_game.tol_lp),
        ("solver.tol", cfg.solver.tol),
        ("dominion.tol_supp", cfg.dominion.tol_supp),
        ("dominion.plateau_tol", cfg.dominion.plateau_tol),
    ):
        if not val > 0:
            raise ValueError(f"{key} must be positive, got {val}")
    if cfg.solver.max_iter < 1:
        raise ValueError("solver.max_iter must be >= 1")
    if cfg.dominion.enum_cap < 1:
        raise ValueError("dominion.enum_cap must be >= 1")
    kappas = cfg.dominion.kappas
    if len(kappas) < 3 or kappas[0] <= 0 or any(b <= a for a, b in zip(kappas, kappas[1:])):
        raise ValueError(f"dominion.kappas must be at least three increasing positive values, got {list(kappas)}")
    if not 0.0 < cfg.dominion.decay_ratio < 1.0:
        raise ValueError(f"dominion.decay_ratio must lie in (0, 1), got {cfg.dominion.decay_ratio}")
    if cfg.runtime.threads < 1:
        raise ValueError(f"runtime.threads must be >= 1 (check {THREADS_ENV})")
    if cfg.sim.chunk < 1:
        raise ValueError("sim.chunk must be >= 1")
