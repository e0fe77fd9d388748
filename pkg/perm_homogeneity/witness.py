# The block witness y and why finitely many monotone maps cannot cover it
#
# With b_0 < b_1 < ... enumerating B, block i is {b_k : 2^i <= k < 2^(i+1)}
# and y(b_(2^i+j)) = b_(2^(i+1)-j). So y reverses each block after shifting
# it up by one slot: decreasing inside blocks, increasing across them. A
# monotone map agrees with y in at most one point of all but one block.

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from itertools import count

from mashumaro import DataClassDictMixin

from .errors import BudgetExhaustedError
from .injections import PartialInjection
from .lazy_enumeration import MemoizedEnumeration
from .monotone import RankOrder
from .ordinal_sets import OrdinalSet, PredicateSet
from .ordinals import Ordinal

logger = logging.getLogger(__name__)


class WitnessY(PartialInjection):
    """y on B, given the increasing enumeration of B and a membership test.

    dom(y) is {b_k : k >= 1} and ran(y) is {b_k : k >= 2}.
    """

    def __init__(self, base: OrdinalSet, enumeration: MemoizedEnumeration[Ordinal]) -> None:
        self.base = base
        self.enumeration = enumeration

    @classmethod
    def from_subset(cls, subset: OrdinalSet, order: RankOrder) -> WitnessY:
        return cls(subset, order.restricted(subset))

    @classmethod
    def even_ranks(cls, order: RankOrder) -> WitnessY:
        """The default choice of B: elements of even rank."""
        base = PredicateSet(
            order.carrier, lambda x: order.rank(x) % 2 == 0, f"even-ranks({order.label})"
        )
        evens = (order.element(2 * k) for k in count())
        return cls(base, MemoizedEnumeration(_until_missing(evens)))

    def b(self, k: int) -> Ordinal:
        return self.enumeration[k]

    def index(self, x: Ordinal) -> int | None:
        if x not in self.base:
            return None
        return self.enumeration.index_of(x)

    def apply(self, x: Ordinal) -> Ordinal | None:
        k = self.index(x)
        if k is None or k < 1:
            return None
        i = k.bit_length() - 1
        j = k - (1 << i)
        return self.enumeration.get((1 << (i + 1)) - j)

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        k = self.index(y)
        if k is None or k < 2:
            return None
        i = (k - 1).bit_length() - 1
        j = (1 << (i + 1)) - k
        return self.enumeration.get((1 << i) + j)

    def iter_domain(self) -> Iterator[Ordinal]:
        k = 1
        while (x := self.enumeration.get(k)) is not None:
            yield x
            k += 1

    def block(self, i: int) -> list[tuple[int, Ordinal, Ordinal]]:
        """(k, b_k, y(b_k)) for the 2^i slots of block i."""
        rows = []
        for k in range(1 << i, 1 << (i + 1)):
            x = self.b(k)
            image = self.apply(x)
            assert image is not None
            rows.append((k, x, image))
        return rows


def _until_missing(points: Iterator[Ordinal]) -> Iterator[Ordinal]:
    try:
        yield from points
    except IndexError:
        return


def y_witness(b: OrdinalSet | None, order: RankOrder) -> WitnessY:
    """The block witness on B, by default the even-rank elements of the member."""
    return WitnessY.even_ranks(order) if b is None else WitnessY.from_subset(b, order)


@dataclass
class BlockAgreements(DataClassDictMixin):
    counts: list[int]
    special_blocks: list[int]

    @property
    def claim_holds(self) -> bool:
        """At most one block where the map agrees with y twice or more."""
        return len(self.special_blocks) <= 1


def block_agreements(c: PartialInjection, y: WitnessY, m: int) -> BlockAgreements:
    counts = []
    for i in range(m):
        counts.append(sum(1 for _, x, image in y.block(i) if c.apply(x) == image))
    return BlockAgreements(counts, [i for i, a in enumerate(counts) if a >= 2])


@dataclass
class EscapeCertificate(DataClassDictMixin):
    block: int
    index: int
    point: str
    image: str
    skipped_blocks: list[int] = field(default_factory=list)


def monotone_escape(
    maps: Sequence[PartialInjection], y: WitnessY, threshold: int, max_blocks: int
) -> EscapeCertificate:
    """A y-pair (b_k, y(b_k)) with k >= threshold that no map in ``maps`` produces.

    Blocks are scanned in ascending order. A block is usable once it has
    more slots than there are maps and no map agrees with y twice in it;
    each map then covers at most one of its slots.

    Raises:
        BudgetExhaustedError: if no pair is found in the first ``max_blocks`` blocks
    """
    n = len(maps)
    skipped = []
    for i in range(max_blocks):
        if (1 << i) <= n or (1 << (i + 1)) <= threshold:
            continue
        rows = y.block(i)
        if any(
            sum(1 for _, x, image in rows if c.apply(x) == image) >= 2 for c in maps
        ):
            skipped.append(i)
            continue
        for k, x, image in rows:
            if k < threshold:
                continue
            if all(c.apply(x) != image for c in maps):
                logger.debug("escape in block %d at slot %d", i, k)
                return EscapeCertificate(i, k, str(x), str(image), skipped)
    raise BudgetExhaustedError(
        f"No uncovered y-pair beyond slot {threshold} in {max_blocks} blocks"
    )
