from collections.abc import Generator

import pytest

from ignorance_toolkit.config import Config
from ignorance_toolkit.parallel import JobRunner


@pytest.fixture(autouse=True)
def reset_config_singleton() -> Generator[None, None, None]:
    Config._instance = None
    Config._initialized = False
    yield
    Config._instance = None
    Config._initialized = False


def square(x: int) -> int:
    return x * x


def test_inline_map_keeps_order() -> None:
    runner = JobRunner(1, progress=False)
    assert runner.map(square, [3, 1, 2]) == [9, 1, 4]


def test_inline_map_stops_early() -> None:
    seen: list[int] = []

    def record(x: int) -> int:
        seen.append(x)
        return x

    runner = JobRunner(1, progress=False)
    assert runner.map(record, [1, 2, 3, 4], stop=lambda r: r == 2) == [1, 2]  # noqa: PLR2004
    assert seen == [1, 2]


def test_pool_map_keeps_order_and_runs_everything() -> None:
    runner = JobRunner(2, progress=False)
    tasks = list(range(12))
    # stop is ignored by the pool: every task runs
    assert runner.map(square, tasks, stop=lambda r: r > 0) == [x * x for x in tasks]


def test_jobs_default_from_config() -> None:
    Config({"jobs": 3})
    assert JobRunner(progress=False).jobs == 3  # noqa: PLR2004
    assert JobRunner(5, progress=False).jobs == 5  # noqa: PLR2004


def test_empty_and_single_task() -> None:
    runner = JobRunner(4, progress=False)
    assert runner.map(square, []) == []
    assert runner.map(square, [7]) == [49]  # noqa: PLR2004
