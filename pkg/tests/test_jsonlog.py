import jsonschema
import pytest

from ergodic_games.report import RunManifest
from ergodic_games.utils.jsonlog import append_jsonl, log_run, read_jsonl, read_runs


def test_append_and_read(tmp_path):
    path = tmp_path / "logs" / "runs.jsonl"
    append_jsonl(path, {"event": "run", "exit_code": 0})
    append_jsonl(path, {"event": "run", "exit_code": 2, "ts": "fixed"})
    rows = read_jsonl(path)
    assert [r["exit_code"] for r in rows] == [0, 2]
    assert rows[0]["ts"].endswith("Z")
    assert rows[1]["ts"] == "fixed"


def test_missing_log_reads_empty(tmp_path):
    assert read_jsonl(tmp_path / "none.jsonl") == []
    assert read_runs(tmp_path / "none.jsonl") == []


def test_event_is_not_mutated(tmp_path):
    event = {"event": "run"}
    append_jsonl(tmp_path / "runs.jsonl", event)
    assert event == {"event": "run"}


def test_log_run_filters_by_command(tmp_path):
    path = tmp_path / "runs.jsonl"
    log_run(path, RunManifest(command="solve", seeds=[1]).to_dict(), 0)
    log_run(path, RunManifest(command="analyze").to_dict(), 2)
    append_jsonl(path, {"event": "note"})
    assert [e["command"] for e in read_runs(path)] == ["solve", "analyze"]
    (event,) = read_runs(path, command="analyze")
    assert event["exit_code"] == 2


def test_log_run_rejects_partial_manifests(tmp_path):
    with pytest.raises(jsonschema.ValidationError):
        log_run(tmp_path / "runs.jsonl", {"command": "solve"}, 0)
