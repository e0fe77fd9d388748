# Partial injections on ordinals
#
# Composition is always "rightmost applied first": compose(f, g)(x) = f(g(x)).
# Finite maps are immutable values. Lazy maps answer per point and memoize
# through MemoizedInjection so an answer never changes once given.

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Iterable, Iterator
from itertools import islice

from .ordinal_sets import IntervalSet, OrdinalSet, PredicateSet
from .ordinals import OMEGA, Ordinal, coerce


class InjectionError(ValueError):
    """A map is not injective or not a permutation where one is required."""


class PartialInjection(ABC):
    """An injective partial map on ordinals, evaluable in both directions."""

    @abstractmethod
    def apply(self, x: Ordinal) -> Ordinal | None:
        """Image of x, or None when x is outside the domain."""

    @abstractmethod
    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        """Preimage of y, or None when y is outside the range."""

    @abstractmethod
    def iter_domain(self) -> Iterator[Ordinal]:
        """Domain points in a fixed deterministic order."""

    def __call__(self, x: Ordinal | int) -> Ordinal | None:
        return self.apply(coerce(x))

    def in_domain(self, x: Ordinal) -> bool:
        return self.apply(x) is not None

    def in_range(self, y: Ordinal) -> bool:
        return self.apply_inverse(y) is not None

    def moves(self, x: Ordinal) -> bool:
        image = self.apply(x)
        return image is not None and image != x

    def inverse(self) -> PartialInjection:
        return InverseInjection(self)

    def graph_prefix(self, n: int) -> list[tuple[Ordinal, Ordinal]]:
        pairs = []
        for x in islice(self.iter_domain(), n):
            image = self.apply(x)
            if image is not None:
                pairs.append((x, image))
        return pairs


class FiniteInjection(PartialInjection):
    """A finite injective map stored as a forward and a backward dict."""

    __slots__ = ("_backward", "_forward")

    def __init__(self, forward: dict[Ordinal, Ordinal]) -> None:
        backward = {y: x for x, y in forward.items()}
        if len(backward) != len(forward):
            raise InjectionError(f"Map is not injective: {_format_pairs(forward)}")
        self._forward = dict(forward)
        self._backward = backward

    @classmethod
    def from_pairs(
        cls, pairs: Iterable[tuple[Ordinal | int, Ordinal | int]]
    ) -> FiniteInjection:
        forward: dict[Ordinal, Ordinal] = {}
        for x, y in pairs:
            x, y = coerce(x), coerce(y)
            if x in forward and forward[x] != y:
                raise InjectionError(f"{x} is mapped to both {forward[x]} and {y}")
            forward[x] = y
        return cls(forward)

    @classmethod
    def empty(cls) -> FiniteInjection:
        return cls({})

    @classmethod
    def identity(cls, points: Iterable[Ordinal | int]) -> FiniteInjection:
        return cls.from_pairs((p, p) for p in points)

    @classmethod
    def swap(cls, a: Ordinal | int, b: Ordinal | int) -> FiniteInjection:
        return cls.from_pairs([(a, b), (b, a)])

    @classmethod
    def cycle(cls, *points: Ordinal | int) -> FiniteInjection:
        return cls.from_pairs(zip(points, (*points[1:], points[0]), strict=True))

    def apply(self, x: Ordinal) -> Ordinal | None:
        return self._forward.get(x)

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        return self._backward.get(y)

    def iter_domain(self) -> Iterator[Ordinal]:
        return iter(sorted(self._forward))

    def domain(self) -> frozenset[Ordinal]:
        return frozenset(self._forward)

    def range(self) -> frozenset[Ordinal]:
        return frozenset(self._backward)

    def pairs(self) -> list[tuple[Ordinal, Ordinal]]:
        return sorted(self._forward.items())

    def extended(self, x: Ordinal, y: Ordinal) -> FiniteInjection:
        """A copy with the pair x -> y added."""
        if x in self._forward:
            raise InjectionError(f"{x} is already in the domain")
        if y in self._backward:
            raise InjectionError(f"{y} is already in the range")
        forward = dict(self._forward)
        forward[x] = y
        return FiniteInjection(forward)

    def union(self, other: FiniteInjection) -> FiniteInjection:
        return FiniteInjection.from_pairs([*self.pairs(), *other.pairs()])

    def inverse(self) -> FiniteInjection:
        return FiniteInjection(self._backward)

    def is_permutation(self) -> bool:
        return self._forward.keys() == self._backward.keys()

    def to_json(self) -> list[list[str]]:
        return [[str(x), str(y)] for x, y in self.pairs()]

    def __len__(self) -> int:
        return len(self._forward)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteInjection):
            return NotImplemented
        return self._forward == other._forward

    def __hash__(self) -> int:
        return hash(frozenset(self._forward.items()))

    def __str__(self) -> str:
        return _format_pairs(self._forward)

    def __repr__(self) -> str:
        return f"FiniteInjection('{self}')"


def _format_pairs(forward: dict[Ordinal, Ordinal]) -> str:
    return ",".join(f"{x}>{y}" for x, y in sorted(forward.items()))


class IdentityInjection(PartialInjection):
    def __init__(self, carrier: OrdinalSet) -> None:
        self.carrier = carrier

    def apply(self, x: Ordinal) -> Ordinal | None:
        return x if x in self.carrier else None

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        return self.apply(y)

    def iter_domain(self) -> Iterator[Ordinal]:
        return self.carrier.iter_canonical()


class ExtendedPermutation(PartialInjection):
    """``base`` on ``carrier`` and the identity on the rest of [0, ambient)."""

    def __init__(self, base: PartialInjection, carrier: OrdinalSet, ambient: Ordinal) -> None:
        self.base = base
        self.carrier = carrier
        self.ambient = ambient

    def apply(self, x: Ordinal) -> Ordinal | None:
        if not x < self.ambient:
            return None
        if x in self.carrier:
            return self.base.apply(x)
        return x

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        if not y < self.ambient:
            return None
        if y in self.carrier:
            return self.base.apply_inverse(y)
        return y

    def iter_domain(self) -> Iterator[Ordinal]:
        return IntervalSet.initial(self.ambient).iter_canonical()

    def inverse(self) -> ExtendedPermutation:
        return ExtendedPermutation(invert(self.base), self.carrier, self.ambient)


class ComposedInjection(PartialInjection):
    """``outer`` after ``inner``."""

    def __init__(self, outer: PartialInjection, inner: PartialInjection) -> None:
        self.outer = outer
        self.inner = inner

    def apply(self, x: Ordinal) -> Ordinal | None:
        middle = self.inner.apply(x)
        return None if middle is None else self.outer.apply(middle)

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        middle = self.outer.apply_inverse(y)
        return None if middle is None else self.inner.apply_inverse(middle)

    def iter_domain(self) -> Iterator[Ordinal]:
        return (x for x in self.inner.iter_domain() if self.apply(x) is not None)


class InverseInjection(PartialInjection):
    def __init__(self, inner: PartialInjection) -> None:
        self.inner = inner

    def apply(self, x: Ordinal) -> Ordinal | None:
        return self.inner.apply_inverse(x)

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        return self.inner.apply(y)

    def iter_domain(self) -> Iterator[Ordinal]:
        return (
            image for x in self.inner.iter_domain() if (image := self.inner.apply(x)) is not None
        )

    def inverse(self) -> PartialInjection:
        return self.inner


class RestrictedInjection(PartialInjection):
    """Pairs of ``inner`` with both coordinates in ``square``."""

    def __init__(self, inner: PartialInjection, square: OrdinalSet) -> None:
        self.inner = inner
        self.square = square

    def apply(self, x: Ordinal) -> Ordinal | None:
        if x not in self.square:
            return None
        image = self.inner.apply(x)
        return image if image is not None and image in self.square else None

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        if y not in self.square:
            return None
        preimage = self.inner.apply_inverse(y)
        return preimage if preimage is not None and preimage in self.square else None

    def iter_domain(self) -> Iterator[Ordinal]:
        return (x for x in self.square.iter_canonical() if self.apply(x) is not None)


class PairSwap(PartialInjection):
    """The fixed-point-free involution 2k <-> 2k+1 on the naturals below ``bound``."""

    def __init__(self, bound: Ordinal = OMEGA) -> None:
        if bound > OMEGA:
            raise InjectionError(f"PairSwap acts on naturals only, got bound {bound}")
        self.bound = bound

    def apply(self, x: Ordinal) -> Ordinal | None:
        if not (x.is_finite and x < self.bound):
            return None
        image = Ordinal.of(x.finite_part ^ 1)
        return image if image < self.bound else None

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        return self.apply(y)

    def iter_domain(self) -> Iterator[Ordinal]:
        return (x for x in IntervalSet.initial(self.bound).iter_ambient() if self.in_domain(x))


class MemoizedInjection(PartialInjection):
    """Remembers every answered query, positive and negative.

    ``snapshot`` returns the positive answers as a finite map, which is what
    traces store.
    """

    def __init__(self, inner: PartialInjection, name: str = "") -> None:
        self.inner = inner
        self.name = name
        self._forward: dict[Ordinal, Ordinal | None] = {}
        self._backward: dict[Ordinal, Ordinal | None] = {}

    def apply(self, x: Ordinal) -> Ordinal | None:
        if x not in self._forward:
            image = self.inner.apply(x)
            self._forward[x] = image
            if image is not None:
                self._backward[image] = x
        return self._forward[x]

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        if y not in self._backward:
            preimage = self.inner.apply_inverse(y)
            self._backward[y] = preimage
            if preimage is not None:
                self._forward[preimage] = y
        return self._backward[y]

    def iter_domain(self) -> Iterator[Ordinal]:
        return self.inner.iter_domain()

    def snapshot(self) -> FiniteInjection:
        pairs = {x: y for x, y in self._forward.items() if y is not None}
        pairs.update({x: y for y, x in self._backward.items() if x is not None})
        return FiniteInjection(pairs)

    def queried(self) -> int:
        return len(self._forward) + len(self._backward)


def compose(outer: PartialInjection, inner: PartialInjection) -> PartialInjection:
    if isinstance(outer, FiniteInjection) and isinstance(inner, FiniteInjection):
        return FiniteInjection(
            {
                x: image
                for x, middle in inner.pairs()
                if (image := outer.apply(middle)) is not None
            }
        )
    return ComposedInjection(outer, inner)


def invert(f: PartialInjection) -> PartialInjection:
    return f.inverse()


def restrict_square(f: PartialInjection, square: OrdinalSet) -> PartialInjection:
    """The pairs of f with both coordinates in ``square``."""
    if isinstance(f, FiniteInjection):
        return FiniteInjection(
            {x: y for x, y in f.pairs() if x in square and y in square}
        )
    return RestrictedInjection(f, square)


def extend_identity(f: FiniteInjection, ambient: Ordinal) -> ExtendedPermutation:
    """f on its domain and the identity elsewhere below ``ambient``.

    Raises:
        InjectionError: if f does not permute its own domain inside [0, ambient)
    """
    if not f.is_permutation():
        raise InjectionError(f"{f} is not a permutation of its domain")
    outside = [x for x in f.domain() if not x < ambient]
    if outside:
        raise InjectionError(f"{min(outside)} lies outside [0,{ambient})")
    return ExtendedPermutation(f, IntervalSet.points(f.domain()), ambient)


def support(f: PartialInjection) -> OrdinalSet:
    """Moved points: exact for finite maps, a per-point test otherwise."""
    if isinstance(f, FiniteInjection):
        return IntervalSet.points(x for x, y in f.pairs() if x != y)
    if isinstance(f, ExtendedPermutation) and isinstance(f.base, FiniteInjection):
        return support(f.base)
    carrier = f.carrier if isinstance(f, ExtendedPermutation) else IntervalSet.initial(OMEGA)
    return PredicateSet(_exact(carrier), f.moves, f"supp({type(f).__name__})")


def _exact(carrier: OrdinalSet) -> OrdinalSet:
    while isinstance(carrier, PredicateSet):
        carrier = carrier.carrier
    return carrier


def complete_to_permutation(p: FiniteInjection) -> FiniteInjection:
    """Close p into a permutation of dom(p) | ran(p).

    The end of every open chain is sent back to the chain's start.
    """
    forward = dict(p.pairs())
    for start in p.domain() - p.range():
        end = start
        while (image := p.apply(end)) is not None:
            end = image
        forward[end] = start
    return FiniteInjection(forward)
