import abc
import collections.abc
import concurrent.futures
from typing import TypeVar

TItem = TypeVar("TItem")
TResult = TypeVar("TResult")


class TrialRunner(abc.ABC):
    __slots__ = ()

    @abc.abstractmethod
    def map(
        self, func: collections.abc.Callable[[TItem], TResult], items: collections.abc.Iterable[TItem]
    ) -> list[TResult]: ...

    @property
    @abc.abstractmethod
    def threads(self) -> int: ...


def sequential_runner() -> TrialRunner:
    return SequentialTrialRunner()


def parallel_runner(*, threads: int = 4) -> TrialRunner:
    return ParallelTrialRunner(threads=threads)


def runner_for_threads(threads: int) -> TrialRunner:
    if threads < 1:
        raise RuntimeError("Threads count should be >= 1")
    if threads == 1:
        return sequential_runner()
    return parallel_runner(threads=threads)


class SequentialTrialRunner(TrialRunner):
    __slots__ = ()

    def map(
        self, func: collections.abc.Callable[[TItem], TResult], items: collections.abc.Iterable[TItem]
    ) -> list[TResult]:
        return [func(item) for item in items]

    @property
    def threads(self) -> int:
        return 1

    def __repr__(self) -> str:
        return "<SequentialTrialRunner>"


class ParallelTrialRunner(TrialRunner):
    __slots__ = ("__threads",)

    def __init__(self, *, threads: int):
        if threads < 1:
            raise RuntimeError("Threads count should be >= 1")

        self.__threads = threads

    def map(
        self, func: collections.abc.Callable[[TItem], TResult], items: collections.abc.Iterable[TItem]
    ) -> list[TResult]:
        items = list(items)
        if len(items) <= 1:
            return [func(item) for item in items]
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.__threads) as executor:
            # results come back in submission order whatever the completion order is
            return list(executor.map(func, items))

    @property
    def threads(self) -> int:
        return self.__threads

    def __repr__(self) -> str:
        return f"<ParallelTrialRunner [{self.__threads}]>"
