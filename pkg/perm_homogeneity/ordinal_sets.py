# Exact calculus of countable sets of ordinals below w^w
#
# IntervalSet   normalized finite union of half-open intervals [lo,hi)
# ResidueSet    interval pieces filtered by a residue pattern on the finite part
# PredicateSet  a carrier plus a decidable membership test (prefix-certified)

from __future__ import annotations

from abc import ABC, abstractmethod
from bisect import bisect_right
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass
from itertools import count, islice, pairwise
from math import lcm

from .errors import BudgetExhaustedError
from .ordinals import (
    OMEGA,
    ONE,
    ZERO,
    Ordinal,
    coerce,
    ord_add,
    ord_left_sub,
    ordinals_of_height,
)

DEFAULT_SEARCH_BUDGET = 100_000


class OrdinalSetError(ValueError):
    """Raised for out-of-range positions and points outside a set."""


@dataclass(frozen=True, slots=True)
class Residues:
    """A set of residue classes modulo ``modulus``, stored in reduced form."""

    modulus: int
    classes: frozenset[int]

    @classmethod
    def of(cls, modulus: int, classes: Iterable[int]) -> Residues:
        if modulus < 1:
            raise OrdinalSetError(f"Residue modulus must be positive: {modulus}")
        reduced = frozenset(c % modulus for c in classes)
        if not reduced:
            return _NO_RESIDUES
        for divisor in range(1, modulus + 1):
            if modulus % divisor:
                continue
            if all((r in reduced) == (r % divisor in reduced) for r in range(modulus)):
                return cls(divisor, frozenset(c for c in reduced if c < divisor))
        raise AssertionError("unreachable: the modulus divides itself")

    @classmethod
    def all(cls) -> Residues:
        return _ALL_RESIDUES

    @classmethod
    def none(cls) -> Residues:
        return _NO_RESIDUES

    @property
    def is_all(self) -> bool:
        return len(self.classes) == self.modulus

    @property
    def is_empty(self) -> bool:
        return not self.classes

    def admits(self, n: int) -> bool:
        return n % self.modulus in self.classes

    def lifted(self, modulus: int) -> frozenset[int]:
        return frozenset(r for r in range(modulus) if r % self.modulus in self.classes)

    def combine(self, other: Residues, op: Callable[[bool, bool], bool]) -> Residues:
        modulus = lcm(self.modulus, other.modulus)
        mine, theirs = self.lifted(modulus), other.lifted(modulus)
        return Residues.of(
            modulus, [r for r in range(modulus) if op(r in mine, r in theirs)]
        )

    def count(self, start: int, stop: int) -> int:
        """Number of admitted naturals in [start, stop)."""
        if stop <= start:
            return 0
        cycles, extra = divmod(stop - start, self.modulus)
        tail_start = start + cycles * self.modulus
        return cycles * len(self.classes) + sum(
            1 for n in range(tail_start, tail_start + extra) if self.admits(n)
        )

    def nth_from(self, start: int, k: int) -> int:
        """The k-th (0-indexed) admitted natural that is >= start."""
        offsets = [o for o in range(self.modulus) if self.admits(start + o)]
        cycles, index = divmod(k, len(offsets))
        return start + cycles * self.modulus + offsets[index]

    def __str__(self) -> str:
        if self.is_all:
            return ""
        return f"%{self.modulus}=" + ",".join(str(c) for c in sorted(self.classes))


_ALL_RESIDUES = Residues(1, frozenset({0}))
_NO_RESIDUES = Residues(1, frozenset())

Piece = tuple[Ordinal, Ordinal, Residues]


class OrdinalSet(ABC):
    """A countable set of ordinals with decidable membership."""

    @abstractmethod
    def __contains__(self, x: object) -> bool: ...

    @abstractmethod
    def next_at_or_after(self, x: Ordinal) -> Ordinal | None:
        """Least element >= x in ambient order, or None."""

    @property
    @abstractmethod
    def bound(self) -> Ordinal:
        """An ordinal strictly above every element."""

    @abstractmethod
    def known_size(self) -> int | None:
        """Exact size when the set is known to be finite, otherwise None."""

    @abstractmethod
    def is_infinite(self) -> bool: ...

    def iter_ambient(self, start: Ordinal | int = ZERO) -> Iterator[Ordinal]:
        """Elements >= start in ambient order.

        For sets of type above w only an w-prefix is ever reached.
        """
        current = self.next_at_or_after(coerce(start))
        while current is not None:
            yield current
            current = self.next_at_or_after(current + ONE)

    def iter_canonical(self) -> Iterator[Ordinal]:
        """The canonical w-enumeration: ascending height, ties in ambient order."""
        size = self.known_size()
        if size == 0:
            return
        produced = 0
        bound = self.bound
        top = bound.leading_exponent
        for h in count():
            batch = []
            for k in range(h + 1):
                limits = (ZERO,) if k == 0 else ordinals_of_height(k, 1, top)
                for limit in limits:
                    if not limit < bound:
                        continue
                    x = ord_add(limit, Ordinal.of(h - k))
                    if x in self:
                        batch.append(x)
            for x in sorted(batch):
                yield x
                produced += 1
                if size is not None and produced >= size:
                    return

    def first(self, n: int) -> list[Ordinal]:
        return list(islice(self.iter_canonical(), n))

    def min(self) -> Ordinal | None:
        return self.next_at_or_after(ZERO)

    def issubset(self, other: OrdinalSet, horizon: int = 200) -> bool:
        """Exact for residue sets, prefix-certified otherwise."""
        if isinstance(self, ResidueSet) and isinstance(other, ResidueSet):
            return ResidueSet.difference(self, other).is_empty()
        return all(x in other for x in islice(self.iter_canonical(), horizon))

    def __and__(self, other: OrdinalSet) -> OrdinalSet:
        if isinstance(self, ResidueSet) and isinstance(other, ResidueSet):
            return ResidueSet.intersection(self, other)
        return PredicateSet(
            _exact_hull(self) & _exact_hull(other),
            lambda x: x in self and x in other,
            f"({self})&({other})",
        )

    def __or__(self, other: OrdinalSet) -> OrdinalSet:
        if isinstance(self, ResidueSet) and isinstance(other, ResidueSet):
            return ResidueSet.union(self, other)
        return PredicateSet(
            _exact_hull(self) | _exact_hull(other),
            lambda x: x in self or x in other,
            f"({self})|({other})",
        )

    def __sub__(self, other: OrdinalSet) -> OrdinalSet:
        if isinstance(self, ResidueSet) and isinstance(other, ResidueSet):
            return ResidueSet.difference(self, other)
        return PredicateSet(
            _exact_hull(self),
            lambda x: x in self and x not in other,
            f"({self})-({other})",
        )


def _exact_hull(s: OrdinalSet) -> ResidueSet:
    while isinstance(s, PredicateSet):
        s = s.carrier
    if not isinstance(s, ResidueSet):
        raise OrdinalSetError(f"No exact carrier for {s}")
    return s


class ResidueSet(OrdinalSet):
    """Disjoint sorted pieces ``(lo, hi, residues)``.

    A point x of [lo, hi) belongs when ``residues`` admits ``x.finite_part``.
    Pieces with a proper residue pattern always end at a limit and their first
    w-block is infinite; finite stretches are expanded into explicit points.
    """

    __slots__ = ("_los", "_pieces")

    def __init__(self, pieces: Iterable[Piece] = ()) -> None:
        self._set_pieces(_normalize(sorted(pieces, key=lambda p: p[0])))

    def _set_pieces(self, pieces: list[Piece]) -> None:
        self._pieces: tuple[Piece, ...] = tuple(pieces)
        self._los = [p[0] for p in self._pieces]

    @classmethod
    def from_pieces(cls, raw: Iterable[Piece]) -> ResidueSet:
        """Union of possibly overlapping raw pieces."""
        result: ResidueSet = IntervalSet.empty()
        for lo, hi, residues in raw:
            result = ResidueSet.union(result, _make(_normalize([(lo, hi, residues)])))
        return result

    @property
    def pieces(self) -> tuple[Piece, ...]:
        return self._pieces

    @property
    def bound(self) -> Ordinal:
        return self._pieces[-1][1] if self._pieces else ZERO

    def is_empty(self) -> bool:
        return not self._pieces

    def _piece_index(self, x: Ordinal) -> int | None:
        index = bisect_right(self._los, x) - 1
        if index >= 0 and x < self._pieces[index][1]:
            return index
        return None

    def __contains__(self, x: object) -> bool:
        if not isinstance(x, Ordinal):
            return False
        index = self._piece_index(x)
        if index is None:
            return False
        return self._pieces[index][2].admits(x.finite_part)

    def next_at_or_after(self, x: Ordinal) -> Ordinal | None:
        index = bisect_right(self._los, x) - 1
        if index >= 0 and x < self._pieces[index][1]:
            lo, hi, residues = self._pieces[index]
            if residues.is_all:
                return x
            candidate = ord_add(x.limit_part, Ordinal.of(residues.nth_from(x.finite_part, 0)))
            if candidate < hi:
                return candidate
        for lo, _hi, residues in self._pieces[index + 1 :]:
            return _first_of_piece(lo, residues)
        return None

    def order_type(self) -> Ordinal:
        total = ZERO
        for lo, hi, _ in self._pieces:
            total = ord_add(total, ord_left_sub(lo, hi))
        return total

    def known_size(self) -> int | None:
        order_type = self.order_type()
        return order_type.finite_part if order_type.is_finite else None

    def is_infinite(self) -> bool:
        return not self.order_type().is_finite

    def element_at(self, p: Ordinal | int) -> Ordinal:
        remaining = coerce(p)
        for lo, hi, residues in self._pieces:
            length = ord_left_sub(lo, hi)
            if remaining < length:
                return _piece_element(lo, residues, remaining)
            remaining = ord_left_sub(length, remaining)
        raise OrdinalSetError(f"Position {p} is beyond the order type of {self}")

    def position_of(self, x: Ordinal | int) -> Ordinal:
        x = coerce(x)
        index = self._piece_index(x)
        if index is None or x not in self:
            raise OrdinalSetError(f"{x} is not an element of {self}")
        offset = ZERO
        for lo, hi, _ in self._pieces[:index]:
            offset = ord_add(offset, ord_left_sub(lo, hi))
        lo, _hi, residues = self._pieces[index]
        if residues.is_all:
            return ord_add(offset, ord_left_sub(lo, x))
        limit = x.limit_part
        if limit == lo.limit_part:
            inner = Ordinal.of(residues.count(lo.finite_part, x.finite_part))
        else:
            inner = ord_add(
                ord_left_sub(lo, limit), Ordinal.of(residues.count(0, x.finite_part))
            )
        return ord_add(offset, inner)

    def order_type_below(self, a: Ordinal) -> Ordinal:
        """Order type of the elements below a."""
        if a.is_zero:
            return ZERO
        return ResidueSet.intersection(self, IntervalSet.interval(ZERO, a)).order_type()

    def iter_canonical(self) -> Iterator[Ordinal]:
        first = self.min()
        if first is None:
            return iter(())
        if self.bound <= ord_add(first.limit_part, OMEGA):
            # one w-block: canonical order is ambient order
            return self.iter_ambient(first)
        return super().iter_canonical()

    @staticmethod
    def union(a: ResidueSet, b: ResidueSet) -> ResidueSet:
        return _make(_combine(a, b, lambda p, q: p or q))

    @staticmethod
    def intersection(a: ResidueSet, b: ResidueSet) -> ResidueSet:
        return _make(_combine(a, b, lambda p, q: p and q))

    @staticmethod
    def difference(a: ResidueSet, b: ResidueSet) -> ResidueSet:
        return _make(_combine(a, b, lambda p, q: p and not q))

    @staticmethod
    def symmetric_difference(a: ResidueSet, b: ResidueSet) -> ResidueSet:
        return _make(_combine(a, b, lambda p, q: p != q))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResidueSet):
            return NotImplemented
        if self._pieces == other._pieces:
            return True
        return ResidueSet.symmetric_difference(self, other).is_empty()

    def __hash__(self) -> int:
        return hash(self.order_type())

    def __str__(self) -> str:
        if not self._pieces:
            return "{}"
        return "|".join(f"[{lo},{hi}){residues}" for lo, hi, residues in self._pieces)

    def __repr__(self) -> str:
        return f"{type(self).__name__}('{self}')"


class IntervalSet(ResidueSet):
    """A normalized finite union of half-open ordinal intervals."""

    __slots__ = ()

    def __init__(self, intervals: Iterable[tuple[Ordinal | int, Ordinal | int]] = ()) -> None:
        spans = sorted(
            (coerce(lo), coerce(hi)) for lo, hi in intervals if coerce(lo) < coerce(hi)
        )
        merged: list[list[Ordinal]] = []
        for lo, hi in spans:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        self._set_pieces([(lo, hi, _ALL_RESIDUES) for lo, hi in merged])

    @classmethod
    def empty(cls) -> IntervalSet:
        return cls()

    @classmethod
    def interval(cls, lo: Ordinal | int, hi: Ordinal | int) -> IntervalSet:
        return cls([(lo, hi)])

    @classmethod
    def initial(cls, hi: Ordinal | int) -> IntervalSet:
        """The initial segment [0, hi)."""
        return cls([(ZERO, hi)])

    @classmethod
    def points(cls, points: Iterable[Ordinal | int]) -> IntervalSet:
        return cls([(coerce(p), coerce(p) + ONE) for p in points])

    @property
    def intervals(self) -> tuple[tuple[Ordinal, Ordinal], ...]:
        return tuple((lo, hi) for lo, hi, _ in self._pieces)


def _make(pieces: list[Piece]) -> ResidueSet:
    result: ResidueSet
    if all(residues.is_all for _, _, residues in pieces):
        result = IntervalSet.__new__(IntervalSet)
    else:
        result = ResidueSet.__new__(ResidueSet)
    result._set_pieces(pieces)
    return result


def _first_of_piece(lo: Ordinal, residues: Residues) -> Ordinal:
    if residues.is_all:
        return lo
    return ord_add(lo.limit_part, Ordinal.of(residues.nth_from(lo.finite_part, 0)))


def _piece_element(lo: Ordinal, residues: Residues, p: Ordinal) -> Ordinal:
    unfiltered = ord_add(lo, p)
    if residues.is_all:
        return unfiltered
    limit = unfiltered.limit_part
    if limit == lo.limit_part:
        return ord_add(limit, Ordinal.of(residues.nth_from(lo.finite_part, p.to_int())))
    return ord_add(limit, Ordinal.of(residues.nth_from(0, unfiltered.finite_part)))


def _normalize(pieces: Iterable[Piece]) -> list[Piece]:
    expanded: list[Piece] = []
    for lo, hi, residues in pieces:
        if residues.is_empty or not lo < hi:
            continue
        if residues.is_all:
            expanded.append((lo, hi, residues))
            continue
        lo_limit, hi_limit = lo.limit_part, hi.limit_part
        if lo_limit == hi_limit:
            expanded.extend(_explicit_points(lo_limit, lo.finite_part, hi.finite_part, residues))
            continue
        expanded.append((lo, hi_limit, residues))
        expanded.extend(_explicit_points(hi_limit, 0, hi.finite_part, residues))
    expanded.sort(key=lambda p: p[0])
    merged: list[Piece] = []
    for piece in expanded:
        if merged and merged[-1][1] == piece[0] and merged[-1][2] == piece[2]:
            merged[-1] = (merged[-1][0], piece[1], piece[2])
        else:
            merged.append(piece)
    return merged


def _explicit_points(limit: Ordinal, start: int, stop: int, residues: Residues) -> list[Piece]:
    points = []
    for n in range(start, stop):
        if residues.admits(n):
            point = ord_add(limit, Ordinal.of(n))
            points.append((point, point + ONE, _ALL_RESIDUES))
    return points


def _residues_at(s: ResidueSet, x: Ordinal) -> Residues:
    index = s._piece_index(x)
    return _NO_RESIDUES if index is None else s.pieces[index][2]


def _combine(a: ResidueSet, b: ResidueSet, op: Callable[[bool, bool], bool]) -> list[Piece]:
    cuts = sorted({p for s in (a, b) for lo, hi, _ in s.pieces for p in (lo, hi)})
    combined: list[Piece] = []
    for lo, hi in pairwise(cuts):
        residues = _residues_at(a, lo).combine(_residues_at(b, lo), op)
        if not residues.is_empty:
            combined.append((lo, hi, residues))
    return _normalize(combined)


class PredicateSet(OrdinalSet):
    """A subset of an exact carrier cut out by a membership test.

    Enumeration filters the carrier and gives up with BudgetExhaustedError
    after ``search_budget`` consecutive rejected candidates, so finite or
    sparse predicate sets fail loudly instead of hanging. Ambient search only
    explores the w-prefix of the carrier.
    """

    def __init__(
        self,
        carrier: OrdinalSet,
        predicate: Callable[[Ordinal], bool],
        label: str,
        search_budget: int = DEFAULT_SEARCH_BUDGET,
    ) -> None:
        self.carrier = carrier
        self.predicate = predicate
        self.label = label
        self.search_budget = search_budget

    def __contains__(self, x: object) -> bool:
        return isinstance(x, Ordinal) and x in self.carrier and self.predicate(x)

    def next_at_or_after(self, x: Ordinal) -> Ordinal | None:
        return next(self._filtered(self.carrier.iter_ambient(x)), None)

    def iter_canonical(self) -> Iterator[Ordinal]:
        return self._filtered(self.carrier.iter_canonical())

    def _filtered(self, candidates: Iterator[Ordinal]) -> Iterator[Ordinal]:
        misses = 0
        for candidate in candidates:
            if self.predicate(candidate):
                misses = 0
                yield candidate
                continue
            misses += 1
            if misses >= self.search_budget:
                raise BudgetExhaustedError(
                    f"No element of {self.label} within {self.search_budget} candidates"
                )

    @property
    def bound(self) -> Ordinal:
        return self.carrier.bound

    def known_size(self) -> int | None:
        return None

    def is_infinite(self, horizon: int = 200) -> bool:
        """Prefix-certified: at least ``horizon`` elements can be found."""
        try:
            return len(self.first(horizon)) == horizon
        except BudgetExhaustedError:
            return False

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PredicateSet({self.label!r})"


def iset_order_type(s: ResidueSet) -> Ordinal:
    return s.order_type()


def iset_element_at(s: ResidueSet, p: Ordinal | int) -> Ordinal:
    return s.element_at(p)


def iset_position_of(s: ResidueSet, x: Ordinal | int) -> Ordinal:
    return s.position_of(x)
