# Scheduled back-and-forth construction of a permutation g of A with g[B] = C
#
# Even steps serve TASK0: item k puts a_(k//2) into the domain (k even) or
# the range (k odd), a_n being the n-th point of A. Odd steps serve TASK1:
# first any pending witness demands, then the canonical items, where item c
# unpairs to (code, n) and asks for a fresh alpha >= n at which every term of
# the code's subterm-closed set is defined and differs from y.

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections import deque
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass, field
from math import isqrt

from mashumaro import DataClassDictMixin

from .errors import BudgetExhaustedError
from .extension import ExtensionRule, meet_requirement
from .injections import ExtendedPermutation, FiniteInjection, PartialInjection
from .lazy_enumeration import MemoizedEnumeration
from .ordinal_sets import OrdinalSet, ResidueSet
from .ordinals import Ordinal, coerce
from .terms import Term, TermContext, TermEnumerator, evaluation_path, subterm_closure, term_eval

logger = logging.getLogger(__name__)

DEFAULT_STEP_BUDGET = 10_000


class EngineError(ValueError):
    """The sets handed to the engine do not meet its preconditions."""


def cantor_unpair(z: int) -> tuple[int, int]:
    w = (isqrt(8 * z + 1) - 1) // 2
    second = z - w * (w + 1) // 2
    return w - second, second


@dataclass
class TaskRecord(DataClassDictMixin):
    step: int
    kind: str
    point: str | None = None
    terms: list[str] = field(default_factory=list)
    start: str | None = None
    witness: str | None = None
    image: str | None = None
    extensions: list[list[str]] = field(default_factory=list)
    blocked: list[str] = field(default_factory=list)
    paths: dict[str, list[str]] = field(default_factory=dict)


@dataclass
class RegistrySnapshot(DataClassDictMixin):
    """The finite parts of the registry maps queried so far, plus the finite
    part ``x`` of the map under construction on its universe ``z``.

    ``y`` names the escape target: ``pairswap`` below ``kappa``, or the
    registry map ``r``.
    """

    id: str
    maps: dict[str, list[list[str]]]
    ambient: str
    carriers: dict[str, str] = field(default_factory=dict)
    x: list[list[str]] | None = None
    z: str | None = None
    y: str = "pairswap"
    kappa: str = "w"


def _coinfinite(universe: OrdinalSet, part: OrdinalSet) -> bool:
    rest = universe - part
    return rest.is_infinite()


class ScheduledConstruction(ABC):
    """A finite injection g grown step by step into a permutation of the universe.

    Even steps run the back-and-forth items; subclasses decide what odd steps do.
    """

    def __init__(
        self,
        universe: OrdinalSet,
        rule: ExtensionRule,
        ctx: TermContext,
        step_budget: int = DEFAULT_STEP_BUDGET,
        name: str = "g",
    ) -> None:
        self.universe = universe
        self.rule = rule
        self.ctx = ctx
        self.step_budget = step_budget
        self.name = name
        self.g = FiniteInjection.empty()
        self.step_count = 0
        self.witnesses: list[Ordinal] = []
        self.records: list[TaskRecord] = []
        self._points = MemoizedEnumeration(universe.iter_canonical())

    def extended(self) -> ExtendedPermutation:
        return ExtendedPermutation(self.g, self.universe, self.ctx.ambient)

    def step(self) -> TaskRecord:
        index = self.step_count
        self.step_count += 1
        record = self._task0(index // 2) if index % 2 == 0 else self._task1(index)
        self.records.append(record)
        return record

    def _task0(self, item: int) -> TaskRecord:
        step = self.step_count - 1
        kind = "dom" if item % 2 == 0 else "ran"
        point = self._points.get(item // 2)
        record = TaskRecord(step=step, kind=kind, point=None if point is None else str(point))
        if point is None:
            return record
        present = self.g.domain() if kind == "dom" else self.g.range()
        if point in present:
            return record
        if kind == "dom":
            allowed = self.rule.allowed_targets(point)
            avoid = self.g.range()
        else:
            allowed = self.rule.allowed_sources(point)
            avoid = self.g.domain()
        partner = next((p for p in allowed.iter_canonical() if p not in avoid), None)
        if partner is None:
            raise EngineError(f"No partner left for {point} in {allowed}")
        pair = (point, partner) if kind == "dom" else (partner, point)
        self.g = self.g.extended(*pair)
        record.extensions.append([str(pair[0]), str(pair[1])])
        logger.debug("%s step %d: %s %s -> %s", self.name, step, kind, pair[0], pair[1])
        return record

    @abstractmethod
    def _task1(self, step: int) -> TaskRecord: ...

    def run_until(self, done: Callable[[], bool], what: str) -> None:
        steps = 0
        while not done():
            if steps >= self.step_budget:
                raise BudgetExhaustedError(
                    f"{self.name}: {what} not reached in {self.step_budget} steps",
                    partial=list(self.records),
                )
            self.step()
            steps += 1

    def run_steps(self, n: int) -> None:
        for _ in range(n):
            self.step()

    def query(self, x: Ordinal) -> Ordinal | None:
        if x not in self.universe:
            return None
        self.run_until(lambda: x in self.g.domain(), f"{x} in the domain")
        return self.g.apply(x)

    def query_inverse(self, y: Ordinal) -> Ordinal | None:
        if y not in self.universe:
            return None
        self.run_until(lambda: y in self.g.range(), f"{y} in the range")
        return self.g.apply_inverse(y)


class EngineState(ScheduledConstruction):
    """The construction state: the finite g built so far, the schedule
    position, the witnesses handed out and a record per processed task."""

    def __init__(
        self,
        universe: OrdinalSet,
        source: OrdinalSet,
        target: OrdinalSet,
        ctx: TermContext,
        y: PartialInjection,
        step_budget: int = DEFAULT_STEP_BUDGET,
        name: str = "g",
    ) -> None:
        super().__init__(
            universe, ExtensionRule.split(universe, source, target), ctx, step_budget, name
        )
        self.source = source
        self.target = target
        self.y = y
        self._terms = TermEnumerator(ctx, include_x=True)
        self._canonical_items = 0
        self._demands: deque[frozenset[Term]] = deque()

    def _task1(self, step: int) -> TaskRecord:
        if self._demands:
            terms = self._demands.popleft()
            start = Ordinal()
            kind = "demand"
        else:
            code, n = cantor_unpair(self._canonical_items)
            self._canonical_items += 1
            terms = subterm_closure(self._terms.term_set(code))
            start = Ordinal.of(n)
            kind = "task1"
        try:
            met = meet_requirement(
                terms, self.g, self.y, self.rule, self.ctx, start, self.step_budget, self.witnesses
            )
        except BudgetExhaustedError as e:
            raise BudgetExhaustedError(
                f"{self.name} step {step}: {e}", partial=list(self.records)
            ) from e
        self.g = met.outcome.g
        self.witnesses.append(met.alpha)
        g = self.extended()
        ordered = sorted(terms, key=lambda t: (len(t), str(t)))
        return TaskRecord(
            step=step,
            kind=kind,
            terms=[str(t) for t in ordered],
            start=str(start),
            witness=str(met.alpha),
            image=str(met.image),
            extensions=[[str(x), str(y)] for x, y in met.outcome.extensions],
            blocked=[str(t) for t in met.outcome.blocked],
            paths={str(t): [str(p) for p in evaluation_path(t, g, met.alpha, self.ctx)] for t in ordered},
        )

    def demand_witnesses(self, terms: Iterable[Term], k: int) -> list[Ordinal]:
        closed = subterm_closure(terms)
        target = len(self.witnesses) + len(self._demands) + k
        self._demands.extend([closed] * k)
        self.run_until(lambda: not self._demands and len(self.witnesses) >= target, "witnesses")
        return self.witnesses[target - k : target]


class EngineMap(PartialInjection):
    """The permutation of the universe being built, queried lazily."""

    def __init__(self, state: ScheduledConstruction) -> None:
        self.state = state

    def apply(self, x: Ordinal) -> Ordinal | None:
        return self.state.query(x)

    def apply_inverse(self, y: Ordinal) -> Ordinal | None:
        return self.state.query_inverse(y)

    def iter_domain(self) -> Iterator[Ordinal]:
        return self.state.universe.iter_canonical()


def engine_new(
    universe: OrdinalSet,
    source: OrdinalSet,
    target: OrdinalSet,
    ctx: TermContext,
    y: PartialInjection,
    step_budget: int = DEFAULT_STEP_BUDGET,
    name: str = "g",
) -> EngineState:
    """Start a construction of g in Perm(A) with g[B] = C.

    Raises:
        EngineError: if B or C is not inside A, or has a finite complement in A
    """
    for label, part in (("B", source), ("C", target)):
        if isinstance(part, ResidueSet) and isinstance(universe, ResidueSet):
            if not part.issubset(universe):
                raise EngineError(f"{label}={part} is not a subset of A={universe}")
        if not _coinfinite(universe, part):
            raise EngineError(f"A - {label} is finite for {label}={part}")
    return EngineState(universe, source, target, ctx, y, step_budget, name)


def engine_step(state: EngineState) -> TaskRecord:
    return state.step()


def engine_query(state: EngineState, x: Ordinal | int) -> Ordinal | None:
    return state.query(coerce(x))


def engine_witness(state: EngineState, terms: Iterable[Term], k: int) -> list[Ordinal]:
    return state.demand_witnesses(terms, k)


def verify_witness(
    terms: Iterable[Term], g: PartialInjection, y: PartialInjection, alpha: Ordinal, ctx: TermContext
) -> list[str]:
    """Problems with a witness: terms undefined at alpha or agreeing with y."""
    image = y.apply(alpha)
    problems = []
    for t in terms:
        value = term_eval(t, g, alpha, ctx)
        if value is None:
            problems.append(f"{t} undefined at {alpha}")
        elif value == image:
            problems.append(f"{t} sends {alpha} to y({alpha})={image}")
    return problems


def prefix_split_holds(state: EngineState, n: int) -> bool:
    """g[B] and g[A-B] land on the right side for the first n points of A."""
    for x in MemoizedEnumeration(state.universe.iter_canonical()).prefix(n):
        image = state.query(x)
        if image is None:
            return False
        if (x in state.source) != (image in state.target):
            return False
    return True

