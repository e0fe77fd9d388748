# One-point extensions of a finite injection that keep a pair uncovered
#
# g is always evaluated as g | id outside the universe A: points of A outside
# dom(g) are undefined, points outside A are fixed. A new pair <zeta, eta> is
# safe for the pair <alpha, alpha*> when eta avoids the range of g and every
# value t[g](alpha), t[g]^-1(alpha*) for t in a subterm-closed H.

from __future__ import annotations

import logging
from collections.abc import Collection, Iterable, Iterator
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, permutations, product

from mashumaro import DataClassDictMixin

from .errors import BudgetExhaustedError, PropertyViolationError
from .injections import ExtendedPermutation, FiniteInjection, PartialInjection
from .ordinal_sets import IntervalSet, OrdinalSet
from .ordinals import Ordinal, coerce
from .terms import (
    X,
    X_INV,
    AtomKind,
    Term,
    TermContext,
    escape_search,
    graph_member,
    subterm_closure,
    term_eval,
    term_eval_inverse,
)

logger = logging.getLogger(__name__)

DEFAULT_SEARCH_BUDGET = 10_000


class ExtensionError(RuntimeError):
    """No allowed point is left for a one-point extension."""


class Mode(Enum):
    ADD_DOMAIN = "dom"
    ADD_RANGE = "ran"


@dataclass(frozen=True)
class ExtensionRule:
    """Where new pairs may go.

    Both coordinates live in ``universe``. With a split, points of
    ``source_part`` go into ``target_part`` and the rest of the universe goes
    into the rest.
    """

    universe: OrdinalSet
    source_part: OrdinalSet | None = None
    target_part: OrdinalSet | None = None

    @classmethod
    def unrestricted(cls, universe: OrdinalSet) -> ExtensionRule:
        return cls(universe)

    @classmethod
    def split(cls, universe: OrdinalSet, source: OrdinalSet, target: OrdinalSet) -> ExtensionRule:
        return cls(universe, source, target)

    def allowed_targets(self, zeta: Ordinal) -> OrdinalSet:
        if self.source_part is None or self.target_part is None:
            return self.universe
        if zeta in self.source_part:
            return self.target_part
        return self.universe - self.target_part

    def allowed_sources(self, zeta: Ordinal) -> OrdinalSet:
        if self.source_part is None or self.target_part is None:
            return self.universe
        if zeta in self.target_part:
            return self.source_part
        return self.universe - self.source_part

    def respects(self, g: FiniteInjection) -> bool:
        return all(
            x in self.universe and y in self.universe and y in self.allowed_targets(x)
            for x, y in g.pairs()
        )


def extended(g: FiniteInjection, rule: ExtensionRule, ambient: Ordinal) -> ExtendedPermutation:
    """g together with the identity outside the universe."""
    return ExtendedPermutation(g, rule.universe, ambient)


@dataclass(frozen=True)
class ExtensionProblem:
    terms: frozenset[Term]
    g: FiniteInjection
    alpha: Ordinal
    alpha_star: Ordinal
    ctx: TermContext
    rule: ExtensionRule
    search_budget: int = DEFAULT_SEARCH_BUDGET

    def evaluator(self, g: FiniteInjection | None = None) -> PartialInjection:
        return extended(self.g if g is None else g, self.rule, self.ctx.ambient)

    def forbidden(self) -> set[Ordinal]:
        """t[g](alpha) and t[g]^-1(alpha*) for every t in H."""
        g = self.evaluator()
        values = set()
        for t in self.terms:
            for value in (
                term_eval(t, g, self.alpha, self.ctx),
                term_eval_inverse(t, g, self.alpha_star, self.ctx),
            ):
                if value is not None:
                    values.add(value)
        return values

    def covered(self, g: FiniteInjection | None = None) -> bool:
        return graph_member(self.alpha, self.alpha_star, self.terms, self.evaluator(g), self.ctx)


def _least_allowed(
    candidates: Iterator[Ordinal], avoid: Collection[Ordinal], budget: int, what: str
) -> Ordinal:
    for tried, eta in enumerate(candidates):
        if eta not in avoid:
            return eta
        if tried + 1 >= budget:
            raise BudgetExhaustedError(f"No allowed {what} within {budget} candidates")
    raise ExtensionError(f"No allowed {what} is left")


def extend_step(problem: ExtensionProblem, mode: Mode, zeta: Ordinal | int) -> FiniteInjection:
    """Add zeta to the domain (or range) of g with the least safe partner.

    Raises:
        ExtensionError: if zeta is already handled or no allowed partner exists
        BudgetExhaustedError: if the search budget runs out first
    """
    zeta = coerce(zeta)
    g = problem.g
    forbidden = problem.forbidden()
    if mode is Mode.ADD_DOMAIN:
        if zeta in g.domain():
            raise ExtensionError(f"{zeta} is already in the domain")
        allowed = problem.rule.allowed_targets(zeta)
        eta = _least_allowed(
            allowed.iter_canonical(), forbidden | g.range(), problem.search_budget, "image"
        )
        result = g.extended(zeta, eta)
    else:
        if zeta in g.range():
            raise ExtensionError(f"{zeta} is already in the range")
        allowed = problem.rule.allowed_sources(zeta)
        eta = _least_allowed(
            allowed.iter_canonical(), forbidden | g.domain(), problem.search_budget, "preimage"
        )
        result = g.extended(eta, zeta)
    logger.debug("extend %s %s with partner %s", mode.value, zeta, eta)
    return result


@dataclass
class MakeDefinedResult:
    g: FiniteInjection
    extensions: list[tuple[Ordinal, Ordinal]] = field(default_factory=list)
    blocked: list[Term] = field(default_factory=list)


def _first_gap(t: Term, g: PartialInjection, alpha: Ordinal, ctx: TermContext) -> tuple[Mode, Ordinal] | AtomKind | None:
    point = alpha
    for atom in reversed(t.atoms):
        if atom.is_indeterminate:
            image = g.apply(point) if atom == X else g.apply_inverse(point)
            if image is None:
                return (Mode.ADD_DOMAIN if atom == X else Mode.ADD_RANGE, point)
        else:
            f = ctx.lookup(atom.name)
            image = f.apply_inverse(point) if atom.is_inverse else f.apply(point)
            if image is None:
                return atom.kind
        point = image
    return None


def make_defined(
    terms: Iterable[Term],
    g: FiniteInjection,
    alpha: Ordinal | int,
    alpha_star: Ordinal | int,
    rule: ExtensionRule,
    ctx: TermContext,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
) -> MakeDefinedResult:
    """Extend g until every term of H is defined at alpha, keeping
    <alpha, alpha*> outside every H[g].

    A term that gets stuck at a function atom can never be completed by
    extending g; it is reported in ``blocked``.

    Raises:
        PropertyViolationError: if the pair is covered on entry or becomes covered
    """
    closed = subterm_closure(terms)
    problem = ExtensionProblem(closed, g, coerce(alpha), coerce(alpha_star), ctx, rule, search_budget)
    if problem.covered():
        raise PropertyViolationError(f"<{alpha},{alpha_star}> is already covered")
    result = MakeDefinedResult(g)
    blocked: set[Term] = set()
    ordered = sorted(closed, key=lambda t: (len(t), str(t)))
    progress = True
    while progress:
        progress = False
        for t in ordered:
            if t in blocked:
                continue
            gap = _first_gap(t, problem.evaluator(), problem.alpha, ctx)
            if gap is None:
                continue
            if not isinstance(gap, tuple) or gap[1] not in rule.universe:
                blocked.add(t)
                continue
            mode, zeta = gap
            g_next = extend_step(problem, mode, zeta)
            (new_pair,) = set(g_next.pairs()) - set(problem.g.pairs())
            result.extensions.append(new_pair)
            problem = ExtensionProblem(
                closed, g_next, problem.alpha, problem.alpha_star, ctx, rule, search_budget
            )
            if problem.covered():
                raise PropertyViolationError(
                    f"Extension {new_pair} covered <{alpha},{alpha_star}>"
                )
            progress = True
    result.g = problem.g
    result.blocked = sorted(blocked, key=lambda t: (len(t), str(t)))
    return result


@dataclass
class RequirementMet:
    alpha: Ordinal
    image: Ordinal
    outcome: MakeDefinedResult


def meet_requirement(
    terms: Iterable[Term],
    g: FiniteInjection,
    y: PartialInjection,
    rule: ExtensionRule,
    ctx: TermContext,
    start: Ordinal | int = 0,
    budget: int = DEFAULT_SEARCH_BUDGET,
    exclude: Collection[Ordinal] = (),
) -> RequirementMet:
    """Find alpha whose y-pair escapes H[g], then make every term of H defined
    at alpha while it keeps escaping."""
    closed = subterm_closure(terms)
    evaluator = extended(g, rule, ctx.ambient)
    alpha = escape_search(y, closed, evaluator, ctx, start, budget, exclude)
    image = y.apply(alpha)
    assert image is not None
    outcome = make_defined(closed, g, alpha, image, rule, ctx, budget)
    return RequirementMet(alpha, image, outcome)


@dataclass
class ExtendFuzzReport(DataClassDictMixin):
    universe: int
    max_term: int
    instances: int = 0
    counterexamples: int = 0
    truncated: bool = False
    examples: list[str] = field(default_factory=list)


def _x_terms(max_len: int) -> list[Term]:
    return [
        Term(atoms)
        for length in range(1, max_len + 1)
        for atoms in product((X, X_INV), repeat=length)
    ]


def _partial_injections(points: list[Ordinal]) -> Iterator[FiniteInjection]:
    for size in range(len(points) + 1):
        for sources in combinations(points, size):
            for targets in permutations(points, size):
                yield FiniteInjection(dict(zip(sources, targets, strict=True)))


def extend_fuzz(
    universe: int,
    max_term: int,
    term_count: int = 2,
    max_instances: int = 200_000,
) -> ExtendFuzzReport:
    """Check the extension lemma on every instance over a finite universe.

    H ranges over subterm closures of at most ``term_count`` x-terms of length
    at most ``max_term``; g over all partial injections; alpha, alpha* over
    uncovered pairs; and the new pair over every zeta outside dom(g) (range
    for the other direction) with every admissible partner.
    """
    report = ExtendFuzzReport(universe, max_term)
    points = [Ordinal.of(n) for n in range(universe)]
    ctx = TermContext(ambient=Ordinal.of(universe))
    rule = ExtensionRule.unrestricted(IntervalSet.initial(universe))
    generators = _x_terms(max_term)
    term_sets = {
        subterm_closure(chosen)
        for count in range(1, term_count + 1)
        for chosen in combinations(generators, count)
    }
    maps = list(_partial_injections(points))
    for closed, g in product(sorted(term_sets, key=len), maps):
        for alpha, alpha_star in product(points, repeat=2):
            problem = ExtensionProblem(closed, g, alpha, alpha_star, ctx, rule)
            if problem.covered():
                continue
            forbidden = problem.forbidden()
            for zeta, eta in product(points, repeat=2):
                if eta in forbidden:
                    continue
                candidates = []
                if zeta not in g.domain() and eta not in g.range():
                    candidates.append(g.extended(zeta, eta))
                if zeta not in g.range() and eta not in g.domain():
                    candidates.append(g.extended(eta, zeta))
                for g_next in candidates:
                    report.instances += 1
                    if problem.covered(g_next):
                        report.counterexamples += 1
                        if len(report.examples) < 5:
                            report.examples.append(
                                f"g={g} H={sorted(map(str, closed))} pair=<{alpha},{alpha_star}> new={g_next}"
                            )
                    if report.instances >= max_instances:
                        report.truncated = True
                        return report
    return report
