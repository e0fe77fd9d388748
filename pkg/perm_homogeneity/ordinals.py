# Ordinals below w^w in Cantor normal form

from __future__ import annotations

from dataclasses import dataclass
from functools import cache


class OrdinalArithmeticError(ArithmeticError):
    """Raised for arithmetic that has no answer below w^w."""


@dataclass(frozen=True, order=True, slots=True)
class Ordinal:
    """An ordinal below w^w written as a sum of w^e*c terms.

    ``terms`` holds ``(exponent, coefficient)`` pairs with strictly decreasing
    exponents and positive coefficients. The empty tuple is 0. Comparing the
    tuples lexicographically is exactly ordinal comparison, so ``order=True``
    gives the right ``<``.
    """

    terms: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        previous = None
        for exponent, coefficient in self.terms:
            if exponent < 0 or coefficient < 1:
                raise OrdinalArithmeticError(
                    f"Invalid Cantor normal form term: w^{exponent}*{coefficient}"
                )
            if previous is not None and exponent >= previous:
                raise OrdinalArithmeticError(
                    "Cantor normal form exponents must strictly decrease"
                )
            previous = exponent

    @classmethod
    def of(cls, n: int) -> Ordinal:
        """The finite ordinal ``n``."""
        if n < 0:
            raise OrdinalArithmeticError(f"No negative ordinals: {n}")
        return _finite(n)

    @classmethod
    def power(cls, exponent: int, coefficient: int = 1) -> Ordinal:
        """The ordinal w^exponent*coefficient."""
        if coefficient == 0:
            return ZERO
        return cls(((exponent, coefficient),))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == 0)

    @property
    def is_limit(self) -> bool:
        """True for limit ordinals and for 0."""
        return not self.terms or self.terms[-1][0] > 0

    @property
    def leading_exponent(self) -> int:
        return self.terms[0][0] if self.terms else 0

    @property
    def finite_part(self) -> int:
        """The coefficient of w^0, i.e. the distance from the limit part."""
        if self.terms and self.terms[-1][0] == 0:
            return self.terms[-1][1]
        return 0

    @property
    def limit_part(self) -> Ordinal:
        """Largest limit ordinal (or 0) not above this one."""
        if self.terms and self.terms[-1][0] == 0:
            return Ordinal(self.terms[:-1])
        return self

    @property
    def height(self) -> int:
        """Sum of coefficients plus the leading exponent.

        Only finitely many ordinals share a height, which is what makes the
        canonical w-enumeration of a countable set possible.
        """
        if not self.terms:
            return 0
        return sum(c for _, c in self.terms) + self.terms[0][0]

    def successor(self) -> Ordinal:
        return self + ONE

    def to_int(self) -> int:
        if not self.is_finite:
            raise OrdinalArithmeticError(f"{self} is not finite")
        return self.finite_part

    def __add__(self, other: Ordinal | int) -> Ordinal:
        return ord_add(self, coerce(other))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return "+".join(_format_term(e, c) for e, c in self.terms)


def _format_term(exponent: int, coefficient: int) -> str:
    if exponent == 0:
        return str(coefficient)
    base = "w" if exponent == 1 else f"w^{exponent}"
    return base if coefficient == 1 else f"{base}*{coefficient}"


@cache
def _finite(n: int) -> Ordinal:
    return Ordinal(((0, n),)) if n else Ordinal()


ZERO = Ordinal()
ONE = Ordinal(((0, 1),))
OMEGA = Ordinal(((1, 1),))


def coerce(value: Ordinal | int) -> Ordinal:
    """Accept plain ints wherever an ordinal is expected."""
    if isinstance(value, Ordinal):
        return value
    if isinstance(value, int):
        return Ordinal.of(value)
    raise TypeError(f"Expected an ordinal, got {type(value).__name__}")


def ord_add(a: Ordinal, b: Ordinal) -> Ordinal:
    """Ordinal sum a+b.

    Terms of ``a`` below the leading exponent of ``b`` are absorbed; a term of
    equal exponent has its coefficient added to ``b``'s leading one.
    """
    if not b.terms:
        return a
    lead_exponent, lead_coefficient = b.terms[0]
    kept = [term for term in a.terms if term[0] > lead_exponent]
    for exponent, coefficient in a.terms:
        if exponent == lead_exponent:
            lead_coefficient += coefficient
    return Ordinal((*kept, (lead_exponent, lead_coefficient), *b.terms[1:]))


def ord_left_sub(a: Ordinal, b: Ordinal) -> Ordinal:
    """The unique d with a+d = b.

    Raises:
        OrdinalArithmeticError: if a > b
    """
    if a > b:
        raise OrdinalArithmeticError(f"Cannot subtract {a} from the smaller {b}")
    for index, (b_term, a_term) in enumerate(zip(b.terms, a.terms, strict=False)):
        if b_term == a_term:
            continue
        b_exponent, b_coefficient = b_term
        a_exponent, a_coefficient = a_term
        if b_exponent > a_exponent:
            return Ordinal(b.terms[index:])
        # same exponent, larger coefficient in b
        return Ordinal(
            ((b_exponent, b_coefficient - a_coefficient), *b.terms[index + 1 :])
        )
    return Ordinal(b.terms[len(a.terms) :])


def ord_cmp(a: Ordinal, b: Ordinal) -> int:
    """-1, 0 or 1 as a is below, equal to or above b."""
    return (a > b) - (a < b)


@cache
def ordinals_of_height(height: int, min_exponent: int, max_exponent: int) -> tuple:
    """All ordinals of the given height whose exponents lie in the given range.

    Results are sorted in ambient order. Used with ``min_exponent=1`` to list
    the limit ordinals that start an w-block.
    """
    found: list[Ordinal] = []
    if height == 0:
        return (ZERO,)
    for lead in range(max(min_exponent, 0), min(max_exponent, height) + 1):
        budget = height - lead
        if budget < 1:
            continue
        for lead_coefficient in range(1, budget + 1):
            for rest in _coefficient_tails(budget - lead_coefficient, lead - 1, min_exponent):
                found.append(Ordinal(((lead, lead_coefficient), *rest)))
    return tuple(sorted(found))


def _coefficient_tails(total: int, top: int, min_exponent: int):
    # Sequences of (exponent, coefficient) with exponents in [min_exponent, top],
    # strictly decreasing, coefficients summing to total.
    if total == 0:
        yield ()
        return
    for exponent in range(top, min_exponent - 1, -1):
        for coefficient in range(1, total + 1):
            for rest in _coefficient_tails(total - coefficient, exponent - 1, min_exponent):
                yield ((exponent, coefficient), *rest)
