# Terms over a registry of partial injections and the indeterminate x
#
# A term is a sequence of atoms evaluated right to left: the rightmost atom
# is applied first. x stands for the map under construction; the empty term
# is the identity.

from __future__ import annotations

import logging
from collections.abc import Callable, Collection, Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import Enum
from functools import cache
from itertools import combinations, count

from .errors import BudgetExhaustedError
from .injections import PartialInjection
from .lazy_enumeration import MemoizedEnumeration
from .ordinal_sets import OrdinalSet
from .ordinals import OMEGA, Ordinal, coerce

logger = logging.getLogger(__name__)

DEFAULT_TERM_BOUND = 10


class UnregisteredNameError(LookupError):
    """A term mentions a function that no registry entry provides."""


class TermBoundError(ValueError):
    """A term is longer than the configured bound."""


class AtomKind(Enum):
    SYM = "sym"
    SYM_INV = "sym_inv"
    X = "x"
    X_INV = "x_inv"


_INVERTED = {
    AtomKind.SYM: AtomKind.SYM_INV,
    AtomKind.SYM_INV: AtomKind.SYM,
    AtomKind.X: AtomKind.X_INV,
    AtomKind.X_INV: AtomKind.X,
}


@dataclass(frozen=True, slots=True)
class Atom:
    kind: AtomKind
    name: str = ""

    @property
    def is_indeterminate(self) -> bool:
        return self.kind in (AtomKind.X, AtomKind.X_INV)

    @property
    def is_inverse(self) -> bool:
        return self.kind in (AtomKind.SYM_INV, AtomKind.X_INV)

    def inverted(self) -> Atom:
        return Atom(_INVERTED[self.kind], self.name)

    def __str__(self) -> str:
        base = "x" if self.is_indeterminate else self.name
        return f"{base}^-1" if self.is_inverse else base


X = Atom(AtomKind.X)
X_INV = Atom(AtomKind.X_INV)


def sym(name: str) -> Atom:
    return Atom(AtomKind.SYM, name)


def sym_inv(name: str) -> Atom:
    return Atom(AtomKind.SYM_INV, name)


@dataclass(frozen=True, slots=True)
class Term:
    atoms: tuple[Atom, ...] = ()

    @classmethod
    def of(cls, *atoms: Atom) -> Term:
        return cls(tuple(atoms))

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.atoms)

    def __add__(self, other: Term) -> Term:
        """Concatenation: ``(s + t)`` applies t first, then s."""
        return Term(self.atoms + other.atoms)

    def inverse(self) -> Term:
        return Term(tuple(atom.inverted() for atom in reversed(self.atoms)))

    @property
    def is_function_term(self) -> bool:
        """True when the term mentions neither x nor x^-1."""
        return not any(atom.is_indeterminate for atom in self.atoms)

    def names(self) -> frozenset[str]:
        return frozenset(atom.name for atom in self.atoms if not atom.is_indeterminate)

    def __str__(self) -> str:
        return ".".join(str(atom) for atom in self.atoms) if self.atoms else "id"


IDENTITY = Term()


def term_sort_key(term: Term) -> tuple[int, str]:
    return (len(term), str(term))


@dataclass(frozen=True)
class TermContext:
    """An immutable registry of named partial injections.

    ``carriers`` records the base domain of generators that act as the
    identity outside it. ``resolver`` supplies atoms that are created on
    demand (canonical isos named ``rho(S;T)``), and ``extra_names`` lists such
    atoms in a fixed order for term enumeration.
    """

    registry: Mapping[str, PartialInjection] = field(default_factory=dict)
    carriers: Mapping[str, OrdinalSet] = field(default_factory=dict)
    ambient: Ordinal = OMEGA
    resolver: Callable[[str], PartialInjection | None] | None = None
    extra_names: MemoizedEnumeration[str] | None = None

    def lookup(self, name: str) -> PartialInjection:
        if name in self.registry:
            return self.registry[name]
        if self.resolver is not None:
            resolved = self.resolver(name)
            if resolved is not None:
                return resolved
        raise UnregisteredNameError(f"Unregistered function: {name}")

    def is_registered(self, name: str) -> bool:
        try:
            self.lookup(name)
        except UnregisteredNameError:
            return False
        return True

    def with_entry(
        self, name: str, f: PartialInjection, carrier: OrdinalSet | None = None
    ) -> TermContext:
        registry = {**self.registry, name: f}
        carriers = dict(self.carriers)
        if carrier is not None:
            carriers[name] = carrier
        return TermContext(registry, carriers, self.ambient, self.resolver, self.extra_names)

    def with_resolver(
        self,
        resolver: Callable[[str], PartialInjection | None],
        extra_names: MemoizedEnumeration[str] | None = None,
    ) -> TermContext:
        return TermContext(self.registry, self.carriers, self.ambient, resolver, extra_names)

    def name_at(self, index: int) -> str | None:
        """The index-th function name: registry order, then the extra names."""
        names = list(self.registry)
        if index < len(names):
            return names[index]
        if self.extra_names is None:
            return None
        return self.extra_names.get(index - len(names))


def _step(atom: Atom, g: PartialInjection | None, point: Ordinal, ctx: TermContext) -> Ordinal | None:
    if atom.is_indeterminate:
        if g is None:
            return None
        return g.apply_inverse(point) if atom.is_inverse else g.apply(point)
    f = ctx.lookup(atom.name)
    return f.apply_inverse(point) if atom.is_inverse else f.apply(point)


def term_eval(
    t: Term, g: PartialInjection | None, alpha: Ordinal | int, ctx: TermContext
) -> Ordinal | None:
    """Apply the atoms of t right to left, reading x as g.

    Returns None as soon as a step leaves the relevant domain.
    """
    point: Ordinal | None = coerce(alpha)
    for atom in reversed(t.atoms):
        point = _step(atom, g, point, ctx)
        if point is None:
            return None
    return point


def term_eval_inverse(
    t: Term, g: PartialInjection | None, alpha: Ordinal | int, ctx: TermContext
) -> Ordinal | None:
    return term_eval(t.inverse(), g, alpha, ctx)


def evaluation_path(
    t: Term, g: PartialInjection | None, alpha: Ordinal | int, ctx: TermContext
) -> list[Ordinal]:
    """The points visited while evaluating t, starting with alpha."""
    path = [coerce(alpha)]
    for atom in reversed(t.atoms):
        point = _step(atom, g, path[-1], ctx)
        if point is None:
            break
        path.append(point)
    return path


def subterm_closure(
    terms: Iterable[Term], bound: int = DEFAULT_TERM_BOUND
) -> frozenset[Term]:
    """All subsequences of the given terms, the empty term included.

    Raises:
        TermBoundError: if a term is longer than ``bound``
    """
    closure: set[Term] = {IDENTITY}
    for t in terms:
        if len(t) > bound:
            raise TermBoundError(f"Term {t} has {len(t)} atoms, bound is {bound}")
        for size in range(1, len(t) + 1):
            for indices in combinations(range(len(t)), size):
                closure.add(Term(tuple(t.atoms[i] for i in indices)))
    return frozenset(closure)


def graph_member(
    alpha: Ordinal | int,
    alpha_star: Ordinal | int,
    terms: Iterable[Term],
    g: PartialInjection | None,
    ctx: TermContext,
) -> bool:
    """Whether some term of ``terms`` sends alpha to alpha_star under g."""
    target = coerce(alpha_star)
    return any(term_eval(t, g, alpha, ctx) == target for t in terms)


def covering_term(
    alpha: Ordinal, alpha_star: Ordinal, terms: Iterable[Term], g: PartialInjection | None, ctx: TermContext
) -> Term | None:
    for t in sorted(terms, key=term_sort_key):
        if term_eval(t, g, alpha, ctx) == alpha_star:
            return t
    return None


def escape_search(
    y: PartialInjection,
    terms: Collection[Term],
    g: PartialInjection | None,
    ctx: TermContext,
    start: Ordinal | int = 0,
    budget: int = 10_000,
    exclude: Collection[Ordinal] = (),
) -> Ordinal:
    """First alpha >= start in the domain enumeration of y whose y-pair escapes.

    Raises:
        BudgetExhaustedError: after ``budget`` candidates without an escape
    """
    if budget < 1:
        raise ValueError(f"Budget must be positive: {budget}")
    threshold = coerce(start)
    tried = 0
    for alpha in y.iter_domain():
        if alpha < threshold or alpha in exclude:
            continue
        image = y.apply(alpha)
        if image is not None and not graph_member(alpha, image, terms, g, ctx):
            logger.debug("escape at %s after %d candidates", alpha, tried + 1)
            return alpha
        tried += 1
        if tried >= budget:
            break
    raise BudgetExhaustedError(
        f"No escaping point among {tried} candidates at or after {threshold}"
    )


@cache
def _index_sequences(weight: int) -> tuple[tuple[int, ...], ...]:
    # index tuples whose length plus index sum is exactly weight
    if weight == 0:
        return ((),)
    found = [
        (first, *rest)
        for first in range(weight)
        for rest in _index_sequences(weight - first - 1)
    ]
    return tuple(sorted(found, key=lambda s: (len(s), s)))


class TermEnumerator:
    """The canonical enumeration of terms and of finite term sets.

    Atom indices are x=0, x^-1=1, then 2j+2 and 2j+3 for the j-th function
    name and its inverse. A term's weight is its length plus the sum of its
    atom indices; terms are listed by weight, then length, then index tuple.
    Every weight class is finite even over an infinite alphabet. A natural
    number c codes the set of terms whose positions are the set bits of c.
    """

    def __init__(self, ctx: TermContext, include_x: bool = True) -> None:
        self.ctx = ctx
        self.include_x = include_x
        self._terms: MemoizedEnumeration[Term] = MemoizedEnumeration(self._generate())

    def _atom(self, index: int) -> Atom | None:
        if index < 2:
            if not self.include_x:
                return None
            return X if index == 0 else X_INV
        name = self.ctx.name_at((index - 2) // 2)
        if name is None:
            return None
        return sym(name) if index % 2 == 0 else sym_inv(name)

    def _generate(self) -> Iterator[Term]:
        has_atoms = self._atom(0) is not None or self._atom(2) is not None
        for weight in count():
            for indices in _index_sequences(weight):
                atoms = [self._atom(i) for i in indices]
                if all(atom is not None for atom in atoms):
                    yield Term(tuple(a for a in atoms if a is not None))
            if not has_atoms:
                return

    def term(self, n: int) -> Term:
        return self._terms[n]

    def term_set(self, code: int) -> frozenset[Term]:
        return frozenset(self.term(i) for i in range(code.bit_length()) if code >> i & 1)

    def code_of(self, terms: Iterable[Term]) -> int:
        return sum(1 << self._terms.index_of(t) for t in terms)

    def prefix(self, n: int) -> list[Term]:
        return self._terms.prefix(n)
