# Memoized views of (possibly infinite) enumerations

from __future__ import annotations

from collections.abc import Iterable, Iterator
from typing import Generic, TypeVar

from .errors import BudgetExhaustedError

T = TypeVar("T")


class MemoizedEnumeration(Generic[T]):
    """Random access into an iterator, pulling only as far as needed.

    Elements are cached in order together with a reverse index, so
    ``index_of`` on an already seen element is a dict lookup.
    """

    def __init__(self, source: Iterable[T], search_budget: int = 100_000) -> None:
        self._source: Iterator[T] = iter(source)
        self._items: list[T] = []
        self._positions: dict[T, int] = {}
        self._exhausted = False
        self.search_budget = search_budget

    def _pull(self) -> bool:
        if self._exhausted:
            return False
        try:
            item = next(self._source)
        except StopIteration:
            self._exhausted = True
            return False
        self._positions[item] = len(self._items)
        self._items.append(item)
        return True

    def get(self, n: int) -> T | None:
        """The n-th element, or None when the enumeration is shorter."""
        while len(self._items) <= n:
            if not self._pull():
                return None
        return self._items[n]

    def __getitem__(self, n: int) -> T:
        item = self.get(n)
        if item is None:
            raise IndexError(f"Enumeration has fewer than {n + 1} elements")
        return item

    def prefix(self, n: int) -> list[T]:
        self.get(n - 1)
        return self._items[:n]

    def index_of(self, item: T) -> int:
        """Position of ``item``, pulling at most ``search_budget`` new elements.

        Raises:
            BudgetExhaustedError: if the item does not show up within budget
            LookupError: if the enumeration ends without it
        """
        pulled = 0
        while item not in self._positions:
            if pulled >= self.search_budget:
                raise BudgetExhaustedError(
                    f"{item} not found within {self.search_budget} further elements"
                )
            if not self._pull():
                raise LookupError(f"{item} does not occur in the enumeration")
            pulled += 1
        return self._positions[item]

    def __iter__(self) -> Iterator[T]:
        n = 0
        while (item := self.get(n)) is not None:
            yield item
            n += 1

    @property
    def seen(self) -> int:
        return len(self._items)

    @property
    def exhausted(self) -> bool:
        return self._exhausted
