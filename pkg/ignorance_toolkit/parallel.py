from __future__ import annotations

import asyncio
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import cast

from tqdm import tqdm

from .config import setting
from .logger import get_logger

logger = get_logger(__name__)


class JobRunner:
    """Order-preserving map of a picklable function over independent tasks.

    With one job the tasks run inline and may stop early. With more jobs they run
    in a process pool driven from an event loop; every task runs and results come
    back in task order, so reductions over them do not depend on the job count.
    """

    def __init__(
        self,
        jobs: int | None = None,
        *,
        progress: bool = True,
        desc: str = "jobs",
        unit: str = "job",
    ) -> None:
        self.jobs: int = setting("jobs", jobs)
        self.progress = progress
        self.desc = desc
        self.unit = unit

    def _bar(self, total: int) -> tqdm[object]:
        # tqdm disables itself when stderr is not a terminal if disable is None
        return tqdm(
            total=total,
            desc=self.desc,
            unit=self.unit,
            leave=False,
            disable=None if self.progress else True,
        )

    def map[T, R](
        self,
        func: Callable[[T], R],
        tasks: Sequence[T],
        *,
        stop: Callable[[R], bool] | None = None,
    ) -> list[R]:
        """Apply ``func`` to every task.

        Args:
            func: top-level function (it is pickled for worker processes)
            tasks: task arguments, in the order results should be reported
            stop: inline mode only; stop after the first result it accepts

        Returns:
            Results in task order; shorter than ``tasks`` only after an early stop.
        """
        if self.jobs <= 1 or len(tasks) <= 1:
            return self._map_inline(func, tasks, stop)
        logger.debug("Running %d %s across %d workers", len(tasks), self.unit, self.jobs)
        return asyncio.run(self._map_pool(func, tasks))

    def _map_inline[T, R](
        self,
        func: Callable[[T], R],
        tasks: Sequence[T],
        stop: Callable[[R], bool] | None,
    ) -> list[R]:
        results: list[R] = []
        with self._bar(len(tasks)) as bar:
            for task in tasks:
                result = func(task)
                results.append(result)
                bar.update(1)
                if stop is not None and stop(result):
                    break
        return results

    async def _map_pool[T, R](self, func: Callable[[T], R], tasks: Sequence[T]) -> list[R]:
        loop = asyncio.get_running_loop()
        results: list[R | None] = [None] * len(tasks)
        sem = asyncio.Semaphore(self.jobs)

        with ProcessPoolExecutor(max_workers=self.jobs) as pool, self._bar(len(tasks)) as bar:

            async def worker(index: int, task: T) -> None:
                async with sem:
                    results[index] = await loop.run_in_executor(pool, func, task)
                bar.update(1)

            async with asyncio.TaskGroup() as group:
                for index, task in enumerate(tasks):
                    group.create_task(worker(index, task))

        # every slot is filled once the task group exits without error
        return cast("list[R]", results)
