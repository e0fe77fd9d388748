# The canonical order isomorphism between two sets of equal order type

from __future__ import annotations

from collections.abc import Iterator

from .injections import PartialInjection
from .ordinal_sets import IntervalSet, OrdinalSetError, PredicateSet, ResidueSet
from .ordinals import Ordinal, coerce


class OrderIsoError(ValueError):
    """Raised when two sets have different order types or a point is outside."""


class OrderIso(PartialInjection):
    """The unique order-preserving bijection ``source -> target``.

    A point is sent to the element of ``target`` at the same position.
    """

    def __init__(self, source: ResidueSet, target: ResidueSet) -> None:
        if source.order_type() != target.order_type():
            raise OrderIsoError(
                f"Order types differ: {source} has {source.order_type()}, "
                f"{target} has {target.order_type()}"
            )
        self.source = source
        self.target = target

    @classmethod
    def identity(cls, s: ResidueSet) -> OrderIso:
        return cls(s, s)

    @classmethod
    def empty(cls) -> OrderIso:
        return cls(IntervalSet.empty(), IntervalSet.empty())

    @property
    def name(self) -> str:
        return f"rho({self.source};{self.target})"

    def is_identity(self) -> bool:
        return self.source == self.target

    def apply(self, x: Ordinal) -> Ordinal | None:
        if x not in self.source:
            return None
        if self.is_identity():
            return x
        return self.target.element_at(self.source.position_of(x))

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        if y not in self.target:
            return None
        if self.is_identity():
            return y
        return self.source.element_at(self.target.position_of(y))

    def iter_domain(self) -> Iterator[Ordinal]:
        return self.source.iter_canonical()

    def inverse(self) -> OrderIso:
        return OrderIso(self.target, self.source)

    def image(self, s: ResidueSet) -> ResidueSet:
        """The exact image of ``s`` (an interval set) under this iso.

        Elements of ``source`` inside [a, b) occupy the position range
        [tp(source below a), tp(source below b)), and those positions pick
        out an interval of ``target``.
        """
        if not isinstance(s, IntervalSet):
            raise OrderIsoError(f"Exact images are only computed for interval sets: {s}")
        total = self.target.order_type()
        spans = []
        for lo, hi in s.intervals:
            first = self.source.order_type_below(lo)
            last = self.source.order_type_below(hi)
            if not first < last:
                continue
            start = self.target.element_at(first)
            stop = self.target.bound if last == total else self.target.element_at(last)
            spans.append((start, stop))
        return ResidueSet.intersection(self.target, IntervalSet(spans))

    def image_lazy(self, s: object) -> PredicateSet:
        """Image of an arbitrary set, by membership of the preimage."""
        return PredicateSet(
            self.target,
            lambda y: (x := self.apply_inverse(y)) is not None and x in s,  # type: ignore[operator]
            f"{self.name}[{s}]",
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OrderIso):
            return NotImplemented
        return self.source == other.source and self.target == other.target

    def __hash__(self) -> int:
        return hash((self.source, self.target))

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"OrderIso('{self.source}', '{self.target}')"


def rho_apply(c0: ResidueSet, c1: ResidueSet, x: Ordinal | int) -> Ordinal:
    x = coerce(x)
    image = OrderIso(c0, c1).apply(x)
    if image is None:
        raise OrderIsoError(f"{x} is not an element of {c0}")
    return image


def rho_compose(rho1: OrderIso, rho0: OrderIso) -> OrderIso:
    """The canonical iso equal to rho1 after rho0 wherever both are defined.

    With rho0: A0 -> A0* and rho1: A1 -> A1*, the result runs from
    rho0^-1[A0* & A1] to rho1[A0* & A1]. Disjoint isos compose to the empty iso.

    Raises:
        OrderIsoError: if A0* & A1 is not an interval set, since exact images
            are only computed for interval sets
    """
    middle = ResidueSet.intersection(rho0.target, rho1.source)
    if middle.is_empty():
        return OrderIso.empty()
    if not isinstance(middle, IntervalSet):
        raise OrderIsoError(f"Composition through a non-interval set: {middle}")
    try:
        return OrderIso(rho0.inverse().image(middle), rho1.image(middle))
    except OrdinalSetError as e:
        raise OrderIsoError(f"Cannot compose {rho1} with {rho0}: {e}") from e
