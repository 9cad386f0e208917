import os
import time

from Dtascope.app.config import Config
from Dtascope.scheduler import resolve_n_jobs, run_parallel


def _slow_square(value, delay):
    time.sleep(delay)
    return value * value


def test_explicit_worker_count_wins(monkeypatch):
    monkeypatch.setattr(Config, "DTA_THREADS", 3)
    assert resolve_n_jobs(5) == 5


def test_worker_count_from_environment_config(monkeypatch):
    monkeypatch.setattr(Config, "DTA_THREADS", 3)
    assert resolve_n_jobs() == 3


def test_worker_count_defaults_to_cores(monkeypatch):
    monkeypatch.setattr(Config, "DTA_THREADS", None)
    assert resolve_n_jobs() == (os.cpu_count() or 1)
    assert resolve_n_jobs(0) == (os.cpu_count() or 1)


def test_results_keep_task_order():
    # later tasks finish first
    tasks = [(value, 0.05 * (4 - value)) for value in range(5)]
    assert run_parallel(_slow_square, tasks, n_jobs=1) == [0, 1, 4, 9, 16]
    assert run_parallel(_slow_square, tasks, n_jobs=3) == [0, 1, 4, 9, 16]


def test_no_tasks():
    assert run_parallel(_slow_square, [], n_jobs=2) == []
