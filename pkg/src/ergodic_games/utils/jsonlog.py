"""
ergodic_games.utils.jsonlog
~~~~~~~~~~~~~~~~~~~~~~~~~~~
JSON-lines run log. One line per CLI run: the run manifest plus the exit
code and a UTC timestamp. Writers take an exclusive lock, readers a shared one,
so concurrent crosscheck scripts can share one log file.
"""
from __future__ import annotations

import json
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

import portalocker

from ..schemas import validate_document

LOCK_TIMEOUT = 5


def now_iso() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def append_jsonl(path: str | Path, event: Dict[str, Any]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    event = dict(event)
    event.setdefault("ts", now_iso())
    line = json.dumps(event, ensure_ascii=False, allow_nan=False)
    with portalocker.Lock(str(path), "a", timeout=LOCK_TIMEOUT, encoding="utf-8") as f:
        f.write(line + "\n")


def read_jsonl(path: str | Path) -> List[Dict[str, Any]]:
    p = Path(path)
    if not p.exists():
        return []
    flags = portalocker.LOCK_SH | portalocker.LOCK_NB
    with portalocker.Lock(str(p), "r", timeout=LOCK_TIMEOUT, flags=flags, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def log_run(path: str | Path, manifest: Dict[str, Any], exit_code: int) -> None:
    """Append a run event; the manifest part must match the manifest schema."""
    validate_document(manifest, "manifest")
    append_jsonl(path, {"event": "run", "exit_code": exit_code, **manifest})


def read_runs(path: str | Path, command: Optional[str] = None) -> List[Dict[str, Any]]:
    """Run events in file order, optionally only those of one subcommand."""
    events = [e for e in read_jsonl(path) if e.get("event") == "run"]
    if command is not None:
        events = [e for e in events if e.get("command") == command]
    return events
