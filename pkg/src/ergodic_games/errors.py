"""
ergodic_games.errors
~~~~~~~~~~~~~~~~~~~~
Exception hierarchy.

Every error knows the CLI exit code it maps to:
  1 = usage / parse / validation problems
  2 = mathematically expected failures (no convergence, enumeration cap, ...)
"""
from __future__ import annotations

from typing import Any, Dict, List, Optional


class ErgodicGamesError(Exception):
    exit_code = 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


# ── Input errors (exit 1) ─────────────────────────────────────────────────────

class UsageError(ErgodicGamesError):
    """Bad command line or configuration."""


class IoError(ErgodicGamesError):
    pass


class ParseError(ErgodicGamesError):
    """File is not valid JSON (or contains NaN / Infinity)."""


class SchemaError(ErgodicGamesError):
    """JSON is well-formed but keys or tensor shapes are wrong."""


class ValidationError(ErgodicGamesError):
    def __init__(self, report):
        self.report = report
        lines = [f"{loc}: {msg}" for loc, msg in report.describe()]
        head = f"game failed validation ({len(lines)} issue(s))"
        super().__init__(head + ("\n  " + "\n  ".join(lines[:10]) if lines else ""))

    def to_dict(self) -> Dict[str, Any]:
        d = super().to_dict()
        d["issues"] = [{"location": loc, "message": msg} for loc, msg in self.report.describe()]
        return d


class DimensionError(ErgodicGamesError, ValueError):
    pass


class EmptySet(ErgodicGamesError, ValueError):
    pass


class InvalidStrategy(ErgodicGamesError, ValueError):
    pass


class ContractViolation(ErgodicGamesError):
    """An operator failed the monotonicity / additive-homogeneity probes."""

    def __init__(self, label: str, violations: List[str]):
        self.label = label
        self.violations = violations
        super().__init__(
            f"operator '{label}' is not monotone and additively homogeneous: "
            + "; ".join(violations[:3])
        )


# ── Expected failures (exit 2) ────────────────────────────────────────────────

class NumericalFailure(ErgodicGamesError):
    exit_code = 2

    def __init__(self, message: str, state: Optional[int] = None):
        self.state = state
        if state is not None:
            message = f"state {state + 1}: {message}"
        super().__init__(message)


class UnboundedGrowth(ErgodicGamesError):
    exit_code = 2

    def __init__(self, k: int, norm: float, cap: float):
        self.k = k
        self.norm = norm
        super().__init__(f"|k v^k| = {norm:.6g} exceeds {cap:.0e} at k={k}")


class TooLarge(ErgodicGamesError):
    exit_code = 2

    def __init__(self, n: int, cap: int):
        self.n = n
        self.cap = cap
        super().__init__(
            f"{n} states exceed enum_cap={cap}: the dominion search enumerates "
            f"all 2^n state subsets (raise --enum-cap at your own risk)"
        )


class NoConvergence(ErgodicGamesError):
    exit_code = 2

    def __init__(self, message: str, residual: float, iterations: int,
                 best_u=None, trace: Optional[List[float]] = None):
        self.residual = residual
        self.iterations = iterations
        self.best_u = best_u
        self.trace = trace or []
        super().__init__(f"{message} (best residual {residual:.6g} after {iterations} iterations)")

    def to_dict(self) -> Dict[str, Any]:
        d = super().to_dict()
        d["residual"] = self.residual
        d["iterations"] = self.iterations
        d["trace"] = list(self.trace)
        return d
