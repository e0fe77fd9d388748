# Textual notation for ordinals, ordinal sets, terms and finite maps
#
#   ordinals   w^2*3+w+5        (summands in any order, added left to right)
#   sets       [0,w)|[w*2,w*3)  intervals joined by |, optional %m=r1,r2 residues
#   terms      f3.x.f1^-1.x^-1  (rightmost atom applied first), "id" is empty
#   maps       0>1,2>0          comma separated x>y pairs
#   isos       rho(S;T)         the canonical iso between two residue sets

from __future__ import annotations

from collections.abc import Sequence
from functools import reduce

from .injections import FiniteInjection
from .order_iso import OrderIso, OrderIsoError
from .ordinal_sets import IntervalSet, OrdinalSet, Residues, ResidueSet
from .ordinals import Ordinal, ord_add, ord_cmp, ord_left_sub
from .terms import Atom, AtomKind, Term

EMPTY_TERM = "id"
EMPTY_SET = "{}"
ISO_PREFIX = "rho("


class NotationParseError(ValueError):
    """Exception raised when textual notation cannot be parsed."""


def _truncate_for_error(text: str, max_length: int = 20) -> str:
    """Truncate text for error messages, adding ellipsis if truncated."""
    if len(text) <= max_length:
        return text
    return text[:max_length] + "..."


class NotationParser:
    """Parser for the command-line notation of ordinals, sets and terms."""

    def parse_ordinal(self, text: str) -> Ordinal:
        """Parse an ordinal such as ``w^2*3+w+5``."""
        value, consumed = self._parse_ordinal(text.strip(), 0)
        remaining = text.strip()[consumed:]
        if remaining:
            raise NotationParseError(
                f"Unexpected content after ordinal: {_truncate_for_error(remaining)}"
            )
        return value

    def parse_set(self, text: str) -> OrdinalSet:
        """Parse a set such as ``[0,w)|[w*2,w*3)%2=0``.

        Returns an IntervalSet when no piece carries residues.
        """
        s = "".join(text.split())
        if s in ("", EMPTY_SET):
            return IntervalSet.empty()
        pieces = []
        for chunk in s.split("|"):
            pieces.append(self._parse_piece(chunk))
        return ResidueSet.from_pieces(pieces)

    def parse_interval_set(self, text: str) -> IntervalSet:
        parsed = self.parse_set(text)
        if not isinstance(parsed, IntervalSet):
            raise NotationParseError(f"Expected an interval set, got residues: {text}")
        return parsed

    def parse_term(self, text: str) -> Term:
        """Parse a dot-separated term such as ``f3.x.f1^-1.x^-1``."""
        s = text.strip()
        if s in ("", EMPTY_TERM):
            return Term(())
        atoms = []
        for raw in s.split("."):
            token = raw.strip()
            if not token:
                raise NotationParseError(f"Empty atom in term: {_truncate_for_error(s)}")
            atoms.append(self._parse_atom(token))
        return Term(tuple(atoms))

    def parse_map(self, text: str) -> FiniteInjection:
        """Parse a finite map such as ``0>1,2>0``."""
        s = "".join(text.split())
        if not s:
            return FiniteInjection.empty()
        pairs = []
        for chunk in s.split(","):
            left, sep, right = chunk.partition(">")
            if not sep:
                raise NotationParseError(f"Expected x>y pair, got: {_truncate_for_error(chunk)}")
            pairs.append((self.parse_ordinal(left), self.parse_ordinal(right)))
        try:
            return FiniteInjection.from_pairs(pairs)
        except ValueError as e:
            raise NotationParseError(str(e)) from e

    def parse_iso(self, text: str) -> OrderIso:
        """Parse a canonical iso name such as ``rho([0,w);[0,w)%2=0)``."""
        s = "".join(text.split())
        if not (s.startswith(ISO_PREFIX) and s.endswith(")")):
            raise NotationParseError(f"Expected rho(S;T), got: {_truncate_for_error(s)}")
        source, sep, target = s[len(ISO_PREFIX) : -1].partition(";")
        if not sep:
            raise NotationParseError(f"Expected ';' between iso sets: {_truncate_for_error(s)}")
        source_set, target_set = self.parse_set(source), self.parse_set(target)
        if not (isinstance(source_set, ResidueSet) and isinstance(target_set, ResidueSet)):
            raise NotationParseError(f"Iso sets must be residue sets: {_truncate_for_error(s)}")
        try:
            return OrderIso(source_set, target_set)
        except OrderIsoError as e:
            raise NotationParseError(str(e)) from e

    def _parse_atom(self, token: str) -> Atom:
        inverse = token.endswith("^-1")
        name = token[:-3] if inverse else token
        if not name:
            raise NotationParseError(f"Missing atom name: {token}")
        if name == "x":
            return Atom(AtomKind.X_INV if inverse else AtomKind.X)
        return Atom(AtomKind.SYM_INV if inverse else AtomKind.SYM, name)

    def _parse_piece(self, chunk: str):
        if not chunk.startswith("["):
            raise NotationParseError(
                f"Expected '[' to start an interval, got: {_truncate_for_error(chunk)}"
            )
        lo, consumed = self._parse_ordinal(chunk, 1)
        if consumed >= len(chunk) or chunk[consumed] != ",":
            raise NotationParseError(
                f"Expected ',' in interval: {_truncate_for_error(chunk)}"
            )
        hi, consumed = self._parse_ordinal(chunk, consumed + 1)
        if consumed >= len(chunk) or chunk[consumed] != ")":
            raise NotationParseError(
                f"Expected ')' to close interval: {_truncate_for_error(chunk)}"
            )
        if not lo < hi:
            raise NotationParseError(f"Empty interval [{lo},{hi})")
        rest = chunk[consumed + 1 :]
        if not rest:
            return (lo, hi, Residues.all())
        return (lo, hi, self._parse_residues(rest))

    def _parse_residues(self, text: str) -> Residues:
        if not text.startswith("%"):
            raise NotationParseError(
                f"Unexpected content after interval: {_truncate_for_error(text)}"
            )
        modulus_text, sep, classes_text = text[1:].partition("=")
        if not sep or not modulus_text.isdigit() or int(modulus_text) < 1:
            raise NotationParseError(f"Invalid residue pattern: {_truncate_for_error(text)}")
        classes = []
        for item in classes_text.split(","):
            if not item.isdigit():
                raise NotationParseError(f"Invalid residue class: {_truncate_for_error(item)}")
            classes.append(int(item))
        return Residues.of(int(modulus_text), classes)

    def _parse_ordinal(self, s: str, start: int) -> tuple[Ordinal, int]:
        """Parse ``summand(+summand)*`` starting at ``start``.

        Returns:
            Tuple of (ordinal, index just past the ordinal)
        """
        value, i = self._parse_summand(s, start)
        while i < len(s) and s[i] == "+":
            summand, i = self._parse_summand(s, i + 1)
            value = ord_add(value, summand)
        return value, i

    def _parse_summand(self, s: str, i: int) -> tuple[Ordinal, int]:
        if i < len(s) and s[i].isdigit():
            digits, i = self._parse_digits(s, i)
            return Ordinal.of(digits), i
        if i >= len(s) or s[i] != "w":
            found = s[i:] if i < len(s) else "end of input"
            raise NotationParseError(
                f"Expected ordinal summand, got: {_truncate_for_error(found)}"
            )
        i += 1
        exponent = 1
        if i < len(s) and s[i] == "^":
            exponent, i = self._parse_digits(s, i + 1)
        coefficient = 1
        if i < len(s) and s[i] == "*":
            coefficient, i = self._parse_digits(s, i + 1)
        return Ordinal.power(exponent, coefficient), i

    def _parse_digits(self, s: str, i: int) -> tuple[int, int]:
        start = i
        while i < len(s) and s[i].isdigit():
            i += 1
        if start == i:
            found = s[start:] if start < len(s) else "end of input"
            raise NotationParseError(f"Expected digits, got: {_truncate_for_error(found)}")
        return int(s[start:i]), i


_parser = NotationParser()


def parse_ordinal(text: str) -> Ordinal:
    return _parser.parse_ordinal(text)


def parse_set(text: str) -> OrdinalSet:
    return _parser.parse_set(text)


def parse_interval_set(text: str) -> IntervalSet:
    return _parser.parse_interval_set(text)


def parse_term(text: str) -> Term:
    return _parser.parse_term(text)


def parse_map(text: str) -> FiniteInjection:
    return _parser.parse_map(text)


def format_ordinal(value: Ordinal) -> str:
    return str(value)


def format_term(term: Term) -> str:
    return str(term) if term.atoms else EMPTY_TERM


def parse_iso(text: str) -> OrderIso:
    return _parser.parse_iso(text)


def map_from_json(pairs: list[list[str]]) -> FiniteInjection:
    """Inverse of ``FiniteInjection.to_json``."""
    try:
        return FiniteInjection.from_pairs(
            (parse_ordinal(x), parse_ordinal(y)) for x, y in pairs
        )
    except ValueError as e:
        raise NotationParseError(str(e)) from e


ORDINAL_OPS = ("add", "sub", "cmp", "norm")


def evaluate_ordinal_op(op: str, args: Sequence[str]) -> str:
    """Run one ordinal command on textual arguments.

    ``add`` sums left to right, ``sub a b`` is the d with a+d = b, ``cmp``
    prints -1, 0 or 1 and ``norm`` prints the normal form of each argument.

    Raises:
        NotationParseError: for unknown operations, wrong arity or bad input
        OrdinalArithmeticError: for ``sub`` with a > b
    """
    values = [parse_ordinal(a) for a in args]
    if op == "add" and values:
        return str(reduce(ord_add, values))
    if op in ("sub", "cmp") and len(values) == 2:
        if op == "sub":
            return str(ord_left_sub(values[0], values[1]))
        return str(ord_cmp(values[0], values[1]))
    if op == "norm" and values:
        return " ".join(str(v) for v in values)
    raise NotationParseError(f"Cannot apply {op!r} to {len(values)} arguments")
