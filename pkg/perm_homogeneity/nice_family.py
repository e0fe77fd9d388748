# Indexed families of ordinal sets with finite intersection witnesses
#
# For beta, I_beta lists earlier indices. For alpha < beta a cover witness
# J_{alpha,beta} is a subset of I_beta whose members cover the intersection
# of A_alpha and A_beta; a strong witness zeta gives the intersection exactly
# as A_zeta & A_beta.

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from mashumaro import DataClassDictMixin

from .notation import parse_interval_set
from .ordinal_sets import IntervalSet, ResidueSet
from .ordinals import Ordinal

logger = logging.getLogger(__name__)


class FamilyError(ValueError):
    """A family or its witnesses are malformed."""


@dataclass(frozen=True)
class NiceFamily:
    members: tuple[ResidueSet, ...]
    index_sets: tuple[tuple[int, ...], ...]
    covers: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)
    strong: dict[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.index_sets) != len(self.members):
            raise FamilyError(
                f"{len(self.members)} members but {len(self.index_sets)} index sets"
            )
        for beta, indices in enumerate(self.index_sets):
            for zeta in indices:
                if not 0 <= zeta < beta:
                    raise FamilyError(f"I_{beta} contains {zeta}, which is not below {beta}")

    def __len__(self) -> int:
        return len(self.members)

    def member(self, index: int) -> ResidueSet:
        if not 0 <= index < len(self.members):
            raise FamilyError(f"No member with index {index}")
        return self.members[index]

    def cover_witness(self, alpha: int, beta: int) -> tuple[int, ...] | None:
        """J_{alpha,beta}, derived from the strong witness when only that is given."""
        if (alpha, beta) in self.covers:
            return self.covers[alpha, beta]
        if (alpha, beta) in self.strong:
            return (self.strong[alpha, beta],)
        return None

    def to_catalog(self) -> FamilyCatalog:
        return FamilyCatalog(
            members=[str(m) for m in self.members],
            index_sets=[list(indices) for indices in self.index_sets],
            covers=[[a, b, *j] for (a, b), j in sorted(self.covers.items())],
            strong=[[a, b, z] for (a, b), z in sorted(self.strong.items())],
        )


@dataclass
class FamilyCatalog(DataClassDictMixin):
    """JSON form of a family: members as set strings, witnesses as index arrays.

    ``covers`` rows are ``[alpha, beta, *J]``; ``strong`` rows ``[alpha, beta, zeta]``.
    """

    members: list[str]
    index_sets: list[list[int]]
    covers: list[list[int]] = field(default_factory=list)
    strong: list[list[int]] = field(default_factory=list)

    def to_family(self) -> NiceFamily:
        for row in (*self.covers, *self.strong):
            if len(row) < 2:
                raise FamilyError(f"Witness row needs alpha and beta: {row}")
        return NiceFamily(
            members=tuple(parse_interval_set(m) for m in self.members),
            index_sets=tuple(tuple(i) for i in self.index_sets),
            covers={(row[0], row[1]): tuple(row[2:]) for row in self.covers},
            strong={(row[0], row[1]): row[2] for row in self.strong},
        )


def load_family(path: Path) -> NiceFamily:
    with path.open(encoding="utf-8") as f:
        return FamilyCatalog.from_dict(json.load(f)).to_family()


def save_family(family: NiceFamily, path: Path) -> None:
    path.write_text(
        json.dumps(family.to_catalog().to_dict(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


@dataclass
class Violation(DataClassDictMixin):
    alpha: int
    beta: int
    kind: str
    detail: str


@dataclass
class N2Report(DataClassDictMixin):
    pairs_checked: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def check_n2(family: NiceFamily) -> N2Report:
    """Check every cover and strong witness with exact set arithmetic."""
    report = N2Report()
    for beta in range(len(family)):
        a_beta = family.members[beta]
        allowed = set(family.index_sets[beta])
        for alpha in range(beta):
            report.pairs_checked += 1
            meet = ResidueSet.intersection(family.members[alpha], a_beta)
            witness = family.cover_witness(alpha, beta)
            if witness is None:
                if not meet.is_empty():
                    report.violations.append(
                        Violation(alpha, beta, "missing", f"no witness for {meet}")
                    )
                continue
            outside = [zeta for zeta in witness if zeta not in allowed]
            if outside:
                report.violations.append(
                    Violation(alpha, beta, "index", f"{outside} not in I_{beta}")
                )
                continue
            covered: ResidueSet = IntervalSet.empty()
            for zeta in witness:
                covered = ResidueSet.union(covered, family.members[zeta])
            uncovered = ResidueSet.difference(meet, covered)
            if not uncovered.is_empty():
                report.violations.append(
                    Violation(alpha, beta, "cover", f"{uncovered} is not covered")
                )
            if (alpha, beta) in family.strong:
                zeta = family.strong[alpha, beta]
                if ResidueSet.intersection(family.members[zeta], a_beta) != meet:
                    report.violations.append(
                        Violation(alpha, beta, "strong", f"A_{zeta} gives a different trace")
                    )
    logger.info(
        "checked %d pairs, %d violations", report.pairs_checked, len(report.violations)
    )
    return report


def trace(family: NiceFamily, x: ResidueSet) -> frozenset[ResidueSet]:
    """The sets A & X for A in the family."""
    return frozenset(ResidueSet.intersection(a, x) for a in family.members)


def itrace(family: NiceFamily, x: ResidueSet) -> frozenset[ResidueSet]:
    """Intersections of nonempty finite subfamilies, each cut down to X."""
    found = set(trace(family, x))
    frontier = set(found)
    while frontier:
        fresh = set()
        for a in frontier:
            for b in list(found):
                meet = ResidueSet.intersection(a, b)
                if meet not in found:
                    fresh.add(meet)
        found |= fresh
        frontier = fresh
    return frozenset(found)


def check_cofinality_proxy(
    family: NiceFamily, point_sets: Iterable[Sequence[Ordinal]]
) -> list[tuple[Ordinal, ...]]:
    """The given finite point sets that no single member covers."""
    uncovered = []
    for points in point_sets:
        if not any(all(p in member for p in points) for member in family.members):
            uncovered.append(tuple(points))
    return uncovered


def check_locally_small(family: NiceFamily, bound: int) -> dict[int, int]:
    """Members whose trace has more than ``bound`` distinct sets, with the count."""
    return {
        index: size
        for index, member in enumerate(family.members)
        if (size := len(trace(family, member))) > bound
    }


def _grid(k: int, depth: int) -> list[Ordinal]:
    # nonzero ordinals below w^k with every coefficient at most depth
    if depth == 0:
        return []
    grid = [Ordinal()]
    for exponent in range(k - 1, -1, -1):
        grid = [
            Ordinal((*point.terms, (exponent, c))) if c else point
            for point in grid
            for c in range(depth + 1)
        ]
    return sorted(point for point in grid if not point.is_zero)


def clopen_family(k: int, depth: int) -> NiceFamily:
    """Clopen interval sets of [0, w^k] restricted to [0, w^k), with strong witnesses.

    Members are the intervals (a, b] for grid points a < b, plus [0, b],
    written half-open as [a+1, b+1). Intersections of such intervals are again
    such intervals, so every pair has an exact strong witness. Members are
    listed by order type, then by notation.
    """
    if k < 1:
        raise FamilyError(f"k must be at least 1, got {k}")
    top = Ordinal.power(k)
    whole = IntervalSet.initial(top)
    grid = _grid(k, depth)
    starts = [Ordinal(), *(a.successor() for a in grid)]
    stops = [*(b.successor() for b in grid), top]
    found = {
        ResidueSet.intersection(IntervalSet.interval(lo, hi), whole)
        for lo in starts
        for hi in stops
        if lo < hi
    }
    found.discard(IntervalSet.empty())
    members = sorted(found, key=lambda m: (m.order_type(), str(m)))
    strong: dict[tuple[int, int], int] = {}
    for beta, alpha in ((b, a) for b in range(len(members)) for a in range(b)):
        meet = ResidueSet.intersection(members[alpha], members[beta])
        if meet.is_empty():
            continue
        strong[alpha, beta] = next(
            zeta
            for zeta in range(beta)
            if ResidueSet.intersection(members[zeta], members[beta]) == meet
        )
    index_sets = tuple(tuple(range(beta)) for beta in range(len(members)))
    logger.info("clopen family k=%d depth=%d has %d members", k, depth, len(members))
    return NiceFamily(tuple(members), index_sets, {}, strong)


def family_subsets(family: NiceFamily, index: int, limit: int = 3) -> frozenset[ResidueSet]:
    """Intersections with member ``index`` of at most ``limit`` other members."""
    member = family.member(index)
    found = set()
    for size in range(1, limit + 1):
        for combo in combinations(range(len(family)), size):
            meet: ResidueSet = member
            for other in combo:
                meet = ResidueSet.intersection(meet, family.members[other])
            found.add(meet)
    return frozenset(found)
