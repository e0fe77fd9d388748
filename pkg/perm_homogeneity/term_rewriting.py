# Rewrites of words over extended generators into finite term covers
#
# A word is a sequence of (generator name, exponent) with exponent +1 or -1,
# read like a term: the rightmost factor acts first. Generators are
# registered with a carrier and act as the identity outside it.

from __future__ import annotations

import logging
from collections.abc import Sequence

from .order_iso import OrderIso, OrderIsoError, rho_compose
from .ordinal_sets import IntervalSet, ResidueSet
from .ordinals import Ordinal, coerce
from .terms import Atom, AtomKind, Term, TermContext, subterm_closure, sym, sym_inv

logger = logging.getLogger(__name__)

Word = tuple[tuple[str, int], ...]


class KappaNormalizationError(ValueError):
    """An atom does not meet the preconditions of kappa normalization."""


def word_to_term(word: Sequence[tuple[str, int]]) -> Term:
    atoms = []
    for name, exponent in word:
        if exponent not in (1, -1):
            raise ValueError(f"Word exponents must be +1 or -1, got {exponent}")
        atoms.append(sym(name) if exponent == 1 else sym_inv(name))
    return Term(tuple(atoms))


def _carrier(ctx: TermContext, name: str) -> ResidueSet | None:
    carrier = ctx.carriers.get(name)
    return carrier if isinstance(carrier, ResidueSet) else None


def word_eval(word: Sequence[tuple[str, int]], ctx: TermContext, alpha: Ordinal | int) -> Ordinal | None:
    """Evaluate the word with every generator extended by the identity."""
    point: Ordinal | None = coerce(alpha)
    for name, exponent in reversed(word):
        assert point is not None
        carrier = ctx.carriers.get(name)
        if carrier is not None and point not in carrier:
            if not point < ctx.ambient:
                return None
            continue
        f = ctx.lookup(name)
        point = f.apply(point) if exponent == 1 else f.apply_inverse(point)
        if point is None:
            return None
    return point


def subsequence_cover(word: Sequence[tuple[str, int]]) -> frozenset[Term]:
    """Terms over the un-extended generators whose graphs cover the word.

    Every pair of the extended word is produced by the subsequence of factors
    whose carrier contained the running point.
    """
    return subterm_closure([word_to_term(word)], bound=max(len(word), 1))


def cover_term_for(
    word: Sequence[tuple[str, int]], ctx: TermContext, alpha: Ordinal | int
) -> Term:
    """The cover member that reproduces the word's value at alpha."""
    point = coerce(alpha)
    used: list[Atom] = []
    for name, exponent in reversed(word):
        carrier = ctx.carriers.get(name)
        if carrier is not None and point not in carrier:
            continue
        f = ctx.lookup(name)
        image = f.apply(point) if exponent == 1 else f.apply_inverse(point)
        if image is None:
            break
        used.append(sym(name) if exponent == 1 else sym_inv(name))
        point = image
    return Term(tuple(reversed(used)))


def _iso_atom(iso: OrderIso) -> Atom:
    return sym(iso.name)


def _register_isos(ctx: TermContext, isos: Sequence[OrderIso]) -> TermContext:
    for iso in isos:
        if not ctx.is_registered(iso.name):
            ctx = ctx.with_entry(iso.name, iso)
    return ctx


def _as_iso(atom: Atom, ctx: TermContext) -> OrderIso | None:
    if atom.is_indeterminate:
        return None
    f = ctx.lookup(atom.name)
    if not isinstance(f, OrderIso):
        return None
    return f.inverse() if atom.kind is AtomKind.SYM_INV else f


def _fuse(chain: Sequence[OrderIso]) -> OrderIso:
    # chain is in term order: leftmost acts last
    fused = chain[-1]
    for iso in reversed(chain[:-1]):
        fused = rho_compose(iso, fused)
    return fused


def rho_normal_form(t: Term, ctx: TermContext) -> tuple[Term, TermContext]:
    """Sandwich every function atom between identity isos of its carrier and
    fuse each run of adjacent isos into a single atom.

    Returns the rewritten term and a context that registers the new isos.
    """
    expanded: list[Atom | OrderIso] = []
    for atom in t.atoms:
        carrier = _carrier(ctx, atom.name) if not atom.is_indeterminate else None
        if carrier is None:
            expanded.append(atom)
            continue
        identity = OrderIso.identity(carrier)
        expanded.extend([identity, atom, identity])
    atoms: list[Atom] = []
    new_isos: list[OrderIso] = []
    run: list[OrderIso] = []
    for item in [*expanded, None]:
        if isinstance(item, OrderIso):
            run.append(item)
            continue
        if run:
            fused = _fuse(run)
            new_isos.append(fused)
            atoms.append(_iso_atom(fused))
            run = []
        if item is not None:
            atoms.append(item)
    return Term(tuple(atoms)), _register_isos(ctx, new_isos)


def kappa_normalize(t: Term, kappa: Ordinal, ctx: TermContext) -> tuple[Term, TermContext]:
    """Rewrite a term over functions and canonical isos into one whose graph
    agrees with t's on kappa x kappa.

    Outer iso atoms are dropped (they fix kappa pointwise), every maximal run
    of isos between two function atoms is fused, and the fused iso is cut
    down to the carriers of its neighbours.

    Raises:
        KappaNormalizationError: for x atoms, isos that do not contain kappa,
            or function atoms whose carrier does not contain kappa
    """
    initial = IntervalSet.initial(kappa)
    kinds: list[OrderIso | Atom] = []
    for atom in t.atoms:
        if atom.is_indeterminate:
            raise KappaNormalizationError(f"Unexpected indeterminate in {t}")
        iso = _as_iso(atom, ctx)
        if iso is not None:
            if not (initial.issubset(iso.source) and initial.issubset(iso.target)):
                raise KappaNormalizationError(f"{iso} does not fix {kappa} pointwise")
            kinds.append(iso)
            continue
        carrier = _carrier(ctx, atom.name)
        if carrier is None or not initial.issubset(carrier):
            raise KappaNormalizationError(
                f"Function {atom.name} does not permute a set containing {kappa}"
            )
        kinds.append(atom)
    while kinds and isinstance(kinds[0], OrderIso):
        kinds.pop(0)
    while kinds and isinstance(kinds[-1], OrderIso):
        kinds.pop()
    atoms: list[Atom] = []
    new_isos: list[OrderIso] = []
    index = 0
    while index < len(kinds):
        item = kinds[index]
        if isinstance(item, Atom):
            atoms.append(item)
            index += 1
            continue
        end = index
        while isinstance(kinds[end], OrderIso):
            end += 1
        run = [iso for iso in kinds[index:end] if isinstance(iso, OrderIso)]
        left, right = atoms[-1], kinds[end]
        assert isinstance(right, Atom)
        restricted = _restrict_between(_fuse(run), ctx, left, right)
        new_isos.append(restricted)
        atoms.append(_iso_atom(restricted))
        index = end
    logger.debug("kappa-normalized %s to %s", t, ".".join(str(a) for a in atoms) or "id")
    return Term(tuple(atoms)), _register_isos(ctx, new_isos)


def _restrict_between(fused: OrderIso, ctx: TermContext, left: Atom, right: Atom) -> OrderIso:
    left_carrier = _carrier(ctx, left.name)
    right_carrier = _carrier(ctx, right.name)
    assert left_carrier is not None and right_carrier is not None
    try:
        inner = rho_compose(fused, OrderIso.identity(right_carrier))
        return rho_compose(OrderIso.identity(left_carrier), inner)
    except OrderIsoError as e:
        raise KappaNormalizationError(f"Cannot restrict {fused}: {e}") from e


def term_to_word(t: Term) -> Word:
    """The word of a term over function atoms only."""
    if not t.is_function_term:
        raise ValueError(f"Words cannot mention x: {t}")
    return tuple((atom.name, -1 if atom.is_inverse else 1) for atom in t.atoms)


def word_inverse(word: Sequence[tuple[str, int]]) -> Word:
    return tuple((name, -exponent) for name, exponent in reversed(word))


def format_word(word: Sequence[tuple[str, int]]) -> str:
    return str(word_to_term(word))
