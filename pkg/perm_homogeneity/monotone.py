# Piecewise monotone permutations of a family member
#
# Everything here is measured in a rank order: an enumeration of the member
# of type at most w. The n-th element of X is the n-th element of X met when
# walking the member in rank order.

from __future__ import annotations

import logging
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import islice

from mashumaro import DataClassDictMixin

from .coherent_orders import CoherentOrders, partition_pair
from .errors import BudgetExhaustedError
from .injections import ExtendedPermutation, IdentityInjection, PartialInjection
from .lazy_enumeration import MemoizedEnumeration
from .ordinal_sets import OrdinalSet, PredicateSet, ResidueSet
from .ordinals import Ordinal

logger = logging.getLogger(__name__)

DEFAULT_HORIZON = 500


class MonotoneMatchError(ValueError):
    """Two sets cannot be matched monotonically."""


class RankOrder:
    """A set together with an enumeration of it of type at most w."""

    def __init__(
        self,
        carrier: OrdinalSet,
        enumeration: MemoizedEnumeration[Ordinal],
        label: str,
        search_budget: int = 100_000,
    ) -> None:
        self.carrier = carrier
        self.enumeration = enumeration
        self.label = label
        self.search_budget = search_budget

    @classmethod
    def canonical(cls, carrier: OrdinalSet) -> RankOrder:
        """The canonical enumeration; ambient order on subsets of one w-block."""
        return cls(carrier, MemoizedEnumeration(carrier.iter_canonical()), f"canonical({carrier})")

    @classmethod
    def of_member(cls, orders: CoherentOrders, beta: int) -> RankOrder:
        return cls(orders.family.member(beta), orders.stream(beta), f"rank_{beta}")

    def rank(self, x: Ordinal) -> int:
        if x not in self.carrier:
            raise MonotoneMatchError(f"{x} is not in {self.carrier}")
        return self.enumeration.index_of(x)

    def element(self, n: int) -> Ordinal:
        return self.enumeration[n]

    def first(self, n: int) -> list[Ordinal]:
        return self.enumeration.prefix(n)

    def restricted(self, subset: OrdinalSet) -> MemoizedEnumeration[Ordinal]:
        """The elements of ``subset`` in this order."""
        size = subset.known_size() if isinstance(subset, ResidueSet) else None
        filtered = self._filter(subset)
        return MemoizedEnumeration(filtered if size is None else islice(filtered, size))

    def _filter(self, subset: OrdinalSet) -> Iterator[Ordinal]:
        misses = 0
        for x in self.enumeration:
            if x in subset:
                misses = 0
                yield x
                continue
            misses += 1
            if misses >= self.search_budget:
                raise BudgetExhaustedError(
                    f"No further element of {subset} in {self.label} within budget"
                )


class MonotoneMatch(PartialInjection):
    """The n-th element of X (in rank order) goes to the n-th element of Y."""

    def __init__(self, x: OrdinalSet, y: OrdinalSet, order: RankOrder) -> None:
        self.x = x
        self.y = y
        self.order = order
        self._source = order.restricted(x)
        self._target = order.restricted(y)
        x_size = x.known_size() if isinstance(x, ResidueSet) else None
        y_size = y.known_size() if isinstance(y, ResidueSet) else None
        exact = isinstance(x, ResidueSet) and isinstance(y, ResidueSet)
        if exact and x_size != y_size:
            raise MonotoneMatchError(
                f"Cannot match {x} with {y}: sizes {x_size} and {y_size} differ"
            )

    def apply(self, point: Ordinal) -> Ordinal | None:
        if point not in self.x:
            return None
        return self._target.get(self._source.index_of(point))

    def apply_inverse(self, point: Ordinal) -> Ordinal | None:
        if point not in self.y:
            return None
        return self._source.get(self._target.index_of(point))

    def iter_domain(self) -> Iterator[Ordinal]:
        return iter(self._source)


@dataclass
class MonotonePiece:
    """A map that is increasing (direction 1) or decreasing (-1) in ``order``
    on ``domain``, with ``image`` its image."""

    domain: OrdinalSet
    image: OrdinalSet
    direction: int
    map: PartialInjection
    member: int | None = None

    def inverted(self) -> MonotonePiece:
        return MonotonePiece(self.image, self.domain, self.direction, self.map.inverse(), self.member)


class PiecewiseInjection(PartialInjection):
    def __init__(self, pieces: Sequence[MonotonePiece]) -> None:
        self.pieces = list(pieces)

    def apply(self, x: Ordinal) -> Ordinal | None:
        for piece in self.pieces:
            if x in piece.domain:
                return piece.map.apply(x)
        return None

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        for piece in self.pieces:
            if y in piece.image:
                return piece.map.apply_inverse(y)
        return None

    def iter_domain(self) -> Iterator[Ordinal]:
        iterators = [piece.map.iter_domain() for piece in self.pieces]
        while iterators:
            for it in list(iterators):
                x = next(it, None)
                if x is None:
                    iterators.remove(it)
                else:
                    yield x


class HomogeneousMap(ExtendedPermutation):
    """A piecewise monotone permutation of a member, extended by the identity."""

    def __init__(
        self,
        pieces: Sequence[MonotonePiece],
        order: RankOrder,
        ambient: Ordinal,
        member_index: int | None = None,
    ) -> None:
        super().__init__(PiecewiseInjection(pieces), order.carrier, ambient)
        self.pieces = list(pieces)
        self.order = order
        self.member_index = member_index

    def inverse_pieces(self) -> list[MonotonePiece]:
        return [piece.inverted() for piece in self.pieces]


def monotone_match(x: OrdinalSet, y: OrdinalSet, order: RankOrder) -> MonotoneMatch:
    return MonotoneMatch(x, y, order)


def _coinfinite(order: RankOrder, subset: OrdinalSet, horizon: int) -> bool:
    rest = order.carrier - subset
    if isinstance(rest, ResidueSet):
        return rest.is_infinite()
    try:
        return len(order.restricted(rest).prefix(horizon)) == horizon
    except BudgetExhaustedError:
        return False


def homog_map(
    x: OrdinalSet,
    y: OrdinalSet,
    order: RankOrder,
    ambient: Ordinal | None = None,
    member_index: int | None = None,
    horizon: int = 50,
) -> HomogeneousMap:
    """A two-piece permutation of the member with g[X] = Y.

    Raises:
        MonotoneMatchError: if a complement is finite (prefix-certified for
            sets that are not exact)
    """
    carrier = order.carrier
    top = ambient if ambient is not None else carrier.bound
    if isinstance(x, ResidueSet) and isinstance(y, ResidueSet) and x == y:
        identity = IdentityInjection(carrier)
        return HomogeneousMap(
            [MonotonePiece(carrier, carrier, 1, identity, member_index)], order, top, member_index
        )
    for subset in (x, y):
        if not _coinfinite(order, subset, horizon):
            raise MonotoneMatchError(f"{carrier} - {subset} is not infinite")
    x_rest, y_rest = carrier - x, carrier - y
    pieces = [
        MonotonePiece(x, y, 1, monotone_match(x, y, order), member_index),
        MonotonePiece(x_rest, y_rest, 1, monotone_match(x_rest, y_rest, order), member_index),
    ]
    logger.debug("homogeneous map %s -> %s in %s", x, y, order.label)
    return HomogeneousMap(pieces, order, top, member_index)


@dataclass
class HomogAudit(DataClassDictMixin):
    prefix: int
    injective: bool
    maps_x_onto_y: bool
    maps_rest_onto_rest: bool

    @property
    def passed(self) -> bool:
        return self.injective and self.maps_x_onto_y and self.maps_rest_onto_rest


def audit_homog_map(
    g: HomogeneousMap, x: OrdinalSet, y: OrdinalSet, n: int = DEFAULT_HORIZON
) -> HomogAudit:
    """Check g on rank prefixes: the first n of X go onto the first n of Y,
    and likewise for the complements."""
    order = g.order
    points = order.first(n)
    images = [g.apply(p) for p in points]
    injective = None not in images and len(set(images)) == len(images)
    carrier = order.carrier

    def onto(source: OrdinalSet, target: OrdinalSet) -> bool:
        firsts = order.restricted(source).prefix(n)
        expected = order.restricted(target).prefix(len(firsts))
        return [g.apply(p) for p in firsts] == expected

    return HomogAudit(
        prefix=n,
        injective=injective,
        maps_x_onto_y=onto(x, y),
        maps_rest_onto_rest=onto(carrier - x, carrier - y),
    )


@dataclass
class _Route:
    member: int
    direction: int
    steps: list[tuple[int, MonotonePiece | None, ResidueSet | None]] = field(default_factory=list)


class _RoutePredicate:
    def __init__(
        self,
        word: Sequence[tuple[str, int]],
        generators: Mapping[str, HomogeneousMap],
        route: _Route,
        final_cell: ResidueSet,
    ) -> None:
        self.word = word
        self.generators = generators
        self.route = route
        self.final_cell = final_cell

    def __call__(self, x: Ordinal) -> bool:
        point: Ordinal | None = x
        for (name, exponent), (_, piece, cell) in zip(
            reversed(self.word), self.route.steps, strict=True
        ):
            assert point is not None
            g = self.generators[name]
            if piece is None:
                if point in g.carrier:
                    return False
                continue
            if cell is None or point not in cell or point not in piece.domain:
                return False
            point = g.apply(point) if exponent == 1 else g.apply_inverse(point)
            if point is None:
                return False
        return point is not None and point in self.final_cell


class WordMap(PartialInjection):
    """A word of homogeneous maps, rightmost factor first."""

    def __init__(self, word: Sequence[tuple[str, int]], generators: Mapping[str, HomogeneousMap]) -> None:
        self.word = list(word)
        self.generators = generators

    def apply(self, x: Ordinal) -> Ordinal | None:
        point: Ordinal | None = x
        for name, exponent in reversed(self.word):
            if point is None:
                return None
            g = self.generators[name]
            point = g.apply(point) if exponent == 1 else g.apply_inverse(point)
        return point

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        point: Ordinal | None = y
        for name, exponent in self.word:
            if point is None:
                return None
            g = self.generators[name]
            point = g.apply_inverse(point) if exponent == 1 else g.apply(point)
        return point

    def iter_domain(self) -> Iterator[Ordinal]:
        if not self.word:
            return iter(())
        return self.generators[self.word[-1][0]].iter_domain()


class _RestrictedMap(PartialInjection):
    def __init__(self, inner: PartialInjection, domain: OrdinalSet) -> None:
        self.inner = inner
        self.domain = domain

    def apply(self, x: Ordinal) -> Ordinal | None:
        return self.inner.apply(x) if x in self.domain else None

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        x = self.inner.apply_inverse(y)
        return x if x is not None and x in self.domain else None

    def iter_domain(self) -> Iterator[Ordinal]:
        return self.domain.iter_canonical()


def word_monotone_decompose(
    word: Sequence[tuple[str, int]],
    generators: Mapping[str, HomogeneousMap],
    orders: CoherentOrders,
    target: int,
) -> list[MonotonePiece]:
    """Monotone pieces (in the rank order of member ``target``) covering the
    part of the word's graph inside A_target x A_target.

    A point's route picks, factor by factor from the right, either "outside
    the factor's member" or one of its pieces together with a cell of the
    coherence partition between the member the point currently sits in and
    the factor's member. A final cell brings the image back to A_target.

    Raises:
        MonotoneMatchError: if a generator has no member index
    """
    for name, _ in word:
        if generators[name].member_index is None:
            raise MonotoneMatchError(f"Generator {name} carries no member certificate")
    home = orders.family.member(target)
    word_map = WordMap(word, generators)
    found: list[MonotonePiece] = []

    def explore(depth: int, route: _Route, current: ResidueSet) -> None:
        if depth == len(word):
            for cell in partition_pair(orders, route.member, target):
                final = ResidueSet.intersection(cell, current)
                if final.is_empty():
                    continue
                predicate = _RoutePredicate(word, generators, route, final)
                domain = PredicateSet(home, predicate, f"route{len(found)}")
                image = PredicateSet(
                    home,
                    lambda y, d=domain: (x := word_map.apply_inverse(y)) is not None and x in d,
                    f"image{len(found)}",
                )
                found.append(
                    MonotonePiece(domain, image, route.direction, _RestrictedMap(word_map, domain), target)
                )
            return
        name, exponent = word[len(word) - 1 - depth]
        g = generators[name]
        beta = g.member_index
        assert beta is not None
        member = orders.family.member(beta)
        outside = ResidueSet.difference(current, member)
        if not outside.is_empty():
            explore(depth + 1, _extend(route, beta, None, None, route.member, 1), outside)
        pieces = g.pieces if exponent == 1 else g.inverse_pieces()
        for cell in partition_pair(orders, route.member, beta):
            local = ResidueSet.intersection(cell, current)
            if local.is_empty():
                continue
            for piece in pieces:
                image = piece.image
                landing = image if isinstance(image, ResidueSet) else member
                explore(
                    depth + 1,
                    _extend(route, beta, piece, local, beta, piece.direction),
                    landing,
                )

    explore(0, _Route(target, 1), home)
    logger.debug("word of %d factors decomposed into %d pieces", len(word), len(found))
    return found


def _extend(
    route: _Route,
    beta: int,
    piece: MonotonePiece | None,
    cell: ResidueSet | None,
    member: int,
    direction: int,
) -> _Route:
    return _Route(member, route.direction * direction, [*route.steps, (beta, piece, cell)])


def coverage_gaps(
    word: Sequence[tuple[str, int]],
    generators: Mapping[str, HomogeneousMap],
    pieces: Sequence[MonotonePiece],
    order: RankOrder,
    n: int = 200,
) -> list[Ordinal]:
    """Points among the first n of the member whose word pair lands in the
    member but in no piece."""
    word_map = WordMap(word, generators)
    gaps = []
    for x in order.first(n):
        image = word_map.apply(x)
        if image is None or image not in order.carrier:
            continue
        if not any(x in piece.domain and piece.map.apply(x) == image for piece in pieces):
            gaps.append(x)
    return gaps


def monotonicity_violations(
    piece: MonotonePiece, order: RankOrder, n: int = 60
) -> list[tuple[Ordinal, Ordinal]]:
    """Pairs among the first n points of the member inside the piece whose
    images are ordered against the piece's direction."""
    points = [x for x in order.first(n) if x in piece.domain]
    bad = []
    for i, x in enumerate(points):
        for y in points[i + 1 :]:
            gx, gy = piece.map.apply(x), piece.map.apply(y)
            if gx is None or gy is None:
                continue
            increasing = order.rank(gx) < order.rank(gy)
            if increasing != (piece.direction == 1):
                bad.append((x, y))
    return bad
