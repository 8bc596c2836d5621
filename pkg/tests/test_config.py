import pytest

from ergodic_games.config import THREADS_ENV, RootConfig, load_config


@pytest.fixture(autouse=True)
def _no_threads_env(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)


def test_defaults_without_file():
    cfg = load_config(None)
    assert cfg.solver.tol == 1e-8
    assert cfg.solver.theta == 0.5
    assert cfg.solver.stall_window == 2000
    assert cfg.dominion.enum_cap == 16
    assert cfg.dominion.kappas == (1e1, 1e2, 1e3, 1e4, 1e5, 1e6)
    assert cfg.matrix_game.tol_lp == 1e-9
    assert cfg.runtime.threads >= 1


def test_missing_file_is_fine_unless_required(tmp_path):
    assert load_config(tmp_path / "nope.yaml") == load_config(None)
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "nope.yaml", required=True)


def test_yaml_sections(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(
        "solver:\n"
        "  tol: 1.0e-6\n"
        "  max_iter: 500\n"
        "dominion:\n"
        "  kappas: [10, 100, 1000]\n"
        "runtime:\n"
        "  threads: 3\n"
        "  run_log: logs/runs.jsonl\n"
    )
    cfg = load_config(path)
    assert cfg.solver.tol == 1e-6
    assert cfg.solver.max_iter == 500
    assert cfg.solver.theta == 0.5
    assert cfg.dominion.kappas == (10.0, 100.0, 1000.0)
    assert cfg.runtime.threads == 3
    assert cfg.runtime.run_log == "logs/runs.jsonl"


def test_env_values_are_resolved(tmp_path, monkeypatch):
    monkeypatch.setenv("EG_RUN_LOG", "/tmp/eg/runs.jsonl")
    path = tmp_path / "config.yaml"
    path.write_text("runtime:\n  run_log: env:EG_RUN_LOG\n")
    assert load_config(path).runtime.run_log == "/tmp/eg/runs.jsonl"


def test_threads_env_caps_the_file_value(tmp_path, monkeypatch):
    path = tmp_path / "config.yaml"
    path.write_text("runtime:\n  threads: 3\n")
    monkeypatch.setenv(THREADS_ENV, "6")
    assert load_config(path).runtime.threads == 3
    monkeypatch.setenv(THREADS_ENV, "2")
    assert load_config(path).runtime.threads == 2
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ValueError):
        load_config(path)


@pytest.mark.parametrize("body", [
    "solver:\n  theta: 0\n",
    "solver:\n  theta: 1.5\n",
    "solver:\n  tol: -1\n",
    "dominion:\n  kappas: [10]\n",
    "dominion:\n  kappas: [10, 1000, 100]\n",
    "dominion:\n  decay_ratio: 1.0\n",
    "runtime:\n  threads: 0\n",
    "solver: 3\n",
    "- a\n- b\n",
])
def test_bad_values_are_rejected(tmp_path, body):
    path = tmp_path / "config.yaml"
    path.write_text(body)
    with pytest.raises(ValueError):
        load_config(path)


def test_overrides():
    cfg = RootConfig().with_overrides(solver__tol=1e-4, probe__seed=None, sim__seed=7)
    assert cfg.solver.tol == 1e-4
    assert cfg.probe.seed == 0
    assert cfg.sim.seed == 7
    assert RootConfig().solver.tol == 1e-8
    with pytest.raises(ValueError):
        RootConfig().with_overrides(solver__theta=2.0)


def test_example_config_loads():
    from conftest import FIXTURES_DIR

    cfg = load_config(FIXTURES_DIR.parent / "config.example.yaml", required=True)
    assert cfg.dominion.kappas[-1] == 1e6
