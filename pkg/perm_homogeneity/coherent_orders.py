# Orders of type at most w on family members that agree piecewise
#
# A_beta is split into the pieces A_beta & D_i with
# D_i = A_{beta_i} - (A_{beta_0} | ... | A_{beta_{i-1}}) for the listed
# indices beta_i of I_beta, plus the leftover outside every A_{beta_i}.
# Piece i is ordered as A_{beta_i} orders it, the leftover canonically, and
# the pieces are interleaved round-robin: the n-th element of every piece
# before the (n+1)-th of any.

from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass, field
from itertools import combinations, islice

from mashumaro import DataClassDictMixin

from .lazy_enumeration import MemoizedEnumeration
from .nice_family import FamilyError, NiceFamily
from .ordinal_sets import IntervalSet, ResidueSet
from .ordinals import Ordinal, coerce

logger = logging.getLogger(__name__)

MAX_PARTITION_DEPTH = 64


class OrderWitnessError(FamilyError):
    """The witnesses contradict the order construction."""


@dataclass
class MemberReport(DataClassDictMixin):
    index: int
    pieces: int
    leftover: str
    leftover_flagged: bool


@dataclass
class OrdersReport(DataClassDictMixin):
    members: list[MemberReport] = field(default_factory=list)

    @property
    def flagged(self) -> list[int]:
        return [m.index for m in self.members if m.leftover_flagged]


class CoherentOrders:
    """Rank functions for every member of a family, computed on demand."""

    def __init__(self, family: NiceFamily) -> None:
        self.family = family
        self._pieces: dict[int, list[tuple[int | None, ResidueSet]]] = {}
        self._streams: dict[int, MemoizedEnumeration[Ordinal]] = {}

    def pieces(self, beta: int) -> list[tuple[int | None, ResidueSet]]:
        """(beta_i, A_beta & D_i) for each listed index, then (None, leftover)."""
        if beta not in self._pieces:
            a_beta = self.family.member(beta)
            covered: ResidueSet = IntervalSet.empty()
            found: list[tuple[int | None, ResidueSet]] = []
            for zeta in self.family.index_sets[beta]:
                a_zeta = self.family.member(zeta)
                found.append(
                    (zeta, ResidueSet.difference(ResidueSet.intersection(a_beta, a_zeta), covered))
                )
                covered = ResidueSet.union(covered, a_zeta)
            found.append((None, ResidueSet.difference(a_beta, covered)))
            self._pieces[beta] = found
        return self._pieces[beta]

    def leftover(self, beta: int) -> ResidueSet:
        return self.pieces(beta)[-1][1]

    def _piece_stream(self, source: int | None, piece: ResidueSet) -> Iterator[Ordinal]:
        size = piece.known_size()
        if source is None:
            return piece.iter_canonical()
        matching = (x for x in self.stream(source) if x in piece)
        return matching if size is None else islice(matching, size)

    def _round_robin(self, beta: int) -> Iterator[Ordinal]:
        pieces = [
            (MemoizedEnumeration(self._piece_stream(source, piece)), piece.known_size())
            for source, piece in self.pieces(beta)
            if not piece.is_empty()
        ]
        n = 0
        while any(size is None or n < size for _, size in pieces):
            for enumeration, size in pieces:
                if size is None or n < size:
                    yield enumeration[n]
            n += 1

    def stream(self, beta: int) -> MemoizedEnumeration[Ordinal]:
        """A_beta in rank order."""
        if beta not in self._streams:
            self.family.member(beta)
            self._streams[beta] = MemoizedEnumeration(self._round_robin(beta))
        return self._streams[beta]

    def rank(self, beta: int, x: Ordinal | int) -> int:
        x = coerce(x)
        if x not in self.family.member(beta):
            raise OrderWitnessError(f"{x} is not in A_{beta}")
        return self.stream(beta).index_of(x)

    def element(self, beta: int, n: int) -> Ordinal:
        return self.stream(beta)[n]

    def first(self, beta: int, n: int) -> list[Ordinal]:
        return self.stream(beta).prefix(n)

    def report(self) -> OrdersReport:
        report = OrdersReport()
        for beta in range(len(self.family)):
            pieces = self.pieces(beta)
            leftover = pieces[-1][1]
            report.members.append(
                MemberReport(
                    index=beta,
                    pieces=sum(1 for _, p in pieces if not p.is_empty()),
                    leftover=str(leftover),
                    leftover_flagged=bool(self.family.index_sets[beta]) and not leftover.is_empty(),
                )
            )
        return report


def build_orders(family: NiceFamily) -> CoherentOrders:
    orders = CoherentOrders(family)
    flagged = orders.report().flagged
    if flagged:
        logger.warning("members with points outside every listed earlier member: %s", flagged)
    return orders


def partition_pair(orders: CoherentOrders, alpha: int, beta: int) -> list[ResidueSet]:
    """A finite partition of A_alpha & A_beta on whose pieces the two rank
    orders agree.

    Raises:
        OrderWitnessError: for missing witnesses, points of the intersection
            outside the listed earlier members, or runaway recursion
    """
    return _partition(orders, alpha, beta, 0)


def _partition(orders: CoherentOrders, alpha: int, beta: int, depth: int) -> list[ResidueSet]:
    family = orders.family
    if depth > MAX_PARTITION_DEPTH:
        raise OrderWitnessError(f"Partition recursion deeper than {MAX_PARTITION_DEPTH}")
    if alpha == beta:
        member = family.member(alpha)
        return [] if member.is_empty() else [member]
    if alpha > beta:
        alpha, beta = beta, alpha
    meet = ResidueSet.intersection(family.member(alpha), family.member(beta))
    if meet.is_empty():
        return []
    witness = family.cover_witness(alpha, beta)
    if witness is None:
        raise OrderWitnessError(f"No cover witness for A_{alpha} & A_{beta}")
    listed = family.index_sets[beta]
    last = max(listed.index(zeta) for zeta in witness) if witness else -1
    pieces = orders.pieces(beta)
    if not ResidueSet.intersection(meet, pieces[-1][1]).is_empty():
        raise OrderWitnessError(
            f"A_{alpha} & A_{beta} meets the leftover of A_{beta}"
        )
    result: list[ResidueSet] = []
    for position, (source, piece) in enumerate(pieces[: last + 1]):
        assert source is not None
        local = ResidueSet.intersection(meet, piece)
        if local.is_empty():
            continue
        for cell in _partition(orders, alpha, source, depth + 1):
            refined = ResidueSet.intersection(local, cell)
            if not refined.is_empty():
                result.append(refined)
        logger.debug("partition (%d,%d) piece %d via %d", alpha, beta, position, source)
    return result


def partition_is_exact(orders: CoherentOrders, alpha: int, beta: int, pieces: list[ResidueSet]) -> bool:
    meet = ResidueSet.intersection(orders.family.member(alpha), orders.family.member(beta))
    union: ResidueSet = IntervalSet.empty()
    for piece in pieces:
        if not ResidueSet.intersection(union, piece).is_empty():
            return False
        union = ResidueSet.union(union, piece)
    return union == meet


def order_disagreements(
    orders: CoherentOrders, alpha: int, beta: int, piece: ResidueSet, sample: int = 15
) -> list[tuple[Ordinal, Ordinal]]:
    """Pairs among the first ``sample`` points of the piece ordered differently
    by the two ranks."""
    points = piece.first(sample)
    bad = []
    for x, y in combinations(points, 2):
        by_alpha = orders.rank(alpha, x) < orders.rank(alpha, y)
        by_beta = orders.rank(beta, x) < orders.rank(beta, y)
        if by_alpha != by_beta:
            bad.append((x, y))
    return bad
