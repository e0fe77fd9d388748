# Scheduled density-meeting constructions over a growing registry
#
# A base permutation r of w is built first: odd steps pick a fresh alpha and
# send it outside {t(alpha) : t in H} for the next finite term set H over
# the base registry. Each round then builds g over (Z, X, Y) with X -> Y and
# Z - X -> Z - Y, escaping r on the scheduled term sets over the registry so
# far, and adds the extended g to the registry.

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from mashumaro import DataClassDictMixin

from .engine import (
    DEFAULT_STEP_BUDGET,
    EngineError,
    EngineMap,
    EngineState,
    RegistrySnapshot,
    ScheduledConstruction,
    TaskRecord,
    cantor_unpair,
)
from .errors import BudgetExhaustedError, PropertyViolationError
from .extension import ExtensionRule, meet_requirement
from .injections import (
    ExtendedPermutation,
    FiniteInjection,
    MemoizedInjection,
    PartialInjection,
    complete_to_permutation,
    extend_identity,
)
from .notation import parse_ordinal, parse_term
from .ordinal_sets import IntervalSet, OrdinalSet
from .ordinals import OMEGA, Ordinal, coerce
from .terms import Term, TermContext, TermEnumerator, subterm_closure, term_eval

logger = logging.getLogger(__name__)

DEFAULT_BASE_STEPS = 60
DEFAULT_REQUIREMENTS = 30


def default_base_group() -> dict[str, FiniteInjection]:
    return {"h0": FiniteInjection.swap(0, 1), "h1": FiniteInjection.cycle(1, 2, 3)}


@dataclass(frozen=True)
class ConditionShape:
    z: OrdinalSet
    x: OrdinalSet
    y: OrdinalSet

    def rule(self) -> ExtensionRule:
        return ExtensionRule.split(self.z, self.x, self.y)


@dataclass(frozen=True)
class Condition:
    """A finite injection sending X into Y and Z - X into Z - Y."""

    shape: ConditionShape
    p: FiniteInjection = field(default_factory=FiniteInjection.empty)

    def respects_shape(self) -> bool:
        return self.shape.rule().respects(self.p)

    def extends(self, other: Condition) -> bool:
        return all(self.p.apply(x) == y for x, y in other.p.pairs())


def density_step(
    terms: Iterable[Term],
    p: Condition,
    m: int | Ordinal,
    r: PartialInjection,
    ctx: TermContext,
    budget: int = DEFAULT_STEP_BUDGET,
) -> tuple[Condition, Ordinal]:
    """A condition q extending p and alpha >= m with every term of H defined
    at alpha under q and different from r(alpha). An empty H gives (p, m).

    Raises:
        BudgetExhaustedError: if no escaping alpha turns up within ``budget``
        PropertyViolationError: if p or the result breaks the shape
    """
    if not p.respects_shape():
        raise PropertyViolationError(f"{p.p} does not respect the condition shape")
    terms = list(terms)
    if not terms:
        return p, coerce(m)
    met = meet_requirement(terms, p.p, r, p.shape.rule(), ctx, m, budget)
    q = Condition(p.shape, met.outcome.g)
    if not q.respects_shape():
        raise PropertyViolationError(f"{q.p} breaks the condition shape")
    logger.debug("density step: alpha=%s, %d extensions", met.alpha, len(met.outcome.extensions))
    return q, met.alpha


class BaseEngine(ScheduledConstruction):
    """The base permutation r of w: every natural enters dom and ran, and
    odd step item c, unpaired to (code, n), gives a fresh alpha >= n with
    r(alpha) outside {t(alpha) : t in the closure of the code's term set}."""

    def __init__(self, ctx: TermContext, step_budget: int = DEFAULT_STEP_BUDGET) -> None:
        universe = IntervalSet.initial(OMEGA)
        super().__init__(universe, ExtensionRule.unrestricted(universe), ctx, step_budget, "r")
        self._terms = TermEnumerator(ctx, include_x=False)
        self._items = 0

    def _task1(self, step: int) -> TaskRecord:
        code, n = cantor_unpair(self._items)
        self._items += 1
        terms = subterm_closure(self._terms.term_set(code))
        alpha = next(
            p
            for p in self.universe.iter_ambient(n)
            if p not in self.g.domain() and p not in self.witnesses
        )
        forbidden = {value for t in terms if (value := term_eval(t, None, alpha, self.ctx)) is not None}
        image = next(
            (p for p in self.universe.iter_ambient() if p not in forbidden and p not in self.g.range()),
            None,
        )
        if image is None:
            raise EngineError(f"No image left for {alpha}")
        self.g = self.g.extended(alpha, image)
        self.witnesses.append(alpha)
        ordered = sorted(terms, key=lambda t: (len(t), str(t)))
        return TaskRecord(
            step=step,
            kind="base",
            terms=[str(t) for t in ordered],
            start=str(n),
            witness=str(alpha),
            image=str(image),
            extensions=[[str(alpha), str(image)]],
        )


def base_context(generators: Mapping[str, FiniteInjection]) -> TermContext:
    """Finite-support permutations of w, extended by the identity and memoized."""
    ctx = TermContext(ambient=OMEGA)
    for name, h in generators.items():
        ctx = ctx.with_entry(name, MemoizedInjection(extend_identity(h, OMEGA), name))
    return ctx


def build_generic_base(
    generators: Mapping[str, FiniteInjection] | None = None,
    steps: int = DEFAULT_BASE_STEPS,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> BaseEngine:
    base = BaseEngine(base_context(default_base_group() if generators is None else generators), step_budget)
    base.run_steps(steps)
    logger.info("base r: %d steps, %d requirements", base.step_count, len(base.witnesses))
    return base


@dataclass
class RequirementEntry(DataClassDictMixin):
    round: int
    record: TaskRecord

    @property
    def snapshot_id(self) -> str:
        return f"g{self.round}"


@dataclass
class RequirementLog(DataClassDictMixin):
    base: list[TaskRecord] = field(default_factory=list)
    entries: list[RequirementEntry] = field(default_factory=list)
    snapshots: list[RegistrySnapshot] = field(default_factory=list)


@dataclass
class GenericRun:
    ctx: TermContext
    r: MemoizedInjection
    base: BaseEngine
    rounds: list[EngineState]
    log: RequirementLog


def registry_snapshot(ctx: TermContext, r: MemoizedInjection) -> dict[str, list[list[str]]]:
    maps = {
        name: f.snapshot().to_json()
        for name, f in ctx.registry.items()
        if isinstance(f, MemoizedInjection)
    }
    maps["r"] = r.snapshot().to_json()
    return maps


def base_snapshot(base: BaseEngine) -> RegistrySnapshot:
    """The base generators as queried, and every pair of r fixed so far."""
    maps = registry_snapshot(base.ctx, MemoizedInjection(FiniteInjection.empty()))
    maps["r"] = base.g.to_json()
    return RegistrySnapshot("base", maps, str(base.ctx.ambient), y="r")


def generic_run(
    rounds: Sequence[tuple[OrdinalSet, OrdinalSet, OrdinalSet]],
    requirements: int = DEFAULT_REQUIREMENTS,
    generators: Mapping[str, FiniteInjection] | None = None,
    base_steps: int = DEFAULT_BASE_STEPS,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> GenericRun:
    """Build r, then one g per (X, Y, Z) round meeting ``requirements``
    scheduled term sets over the registry so far.

    Raises:
        BudgetExhaustedError: with the log so far as ``partial``
        EngineError: if a round's sets do not meet the engine's preconditions
    """
    base = build_generic_base(generators, base_steps, step_budget)
    r = MemoizedInjection(EngineMap(base), "r")
    ctx = base.ctx
    log = RequirementLog(base=list(base.records))
    states: list[EngineState] = []
    for index, (x, y, z) in enumerate(rounds):
        for label, part in (("X", x), ("Y", y)):
            if not (z - part).is_infinite() or not part.is_infinite():
                raise EngineError(f"Round {index}: {label}={part} is not infinite and coinfinite in {z}")
        state = EngineState(z, x, y, ctx, r, step_budget, f"g{index}")
        try:
            state.run_until(lambda s=state: len(s.witnesses) >= requirements, "requirements")
        except BudgetExhaustedError as e:
            raise BudgetExhaustedError(str(e), partial=log) from e
        entries = [RequirementEntry(index, rec) for rec in state.records if rec.witness is not None]
        _touch_paths(entries, state, ctx)
        log.entries.extend(entries)
        states.append(state)
        g = MemoizedInjection(ExtendedPermutation(EngineMap(state), z, ctx.ambient), f"g{index}")
        log.snapshots.append(
            RegistrySnapshot(
                id=f"g{index}",
                maps=registry_snapshot(ctx, r),
                ambient=str(ctx.ambient),
                carriers={name: str(c) for name, c in ctx.carriers.items()},
                x=state.g.to_json(),
                z=str(z),
                y="r",
            )
        )
        ctx = ctx.with_entry(f"g{index}", g, z)
        logger.info("round %d: %d requirements met in %d steps", index, len(entries), state.step_count)
    log.snapshots.insert(0, base_snapshot(base))
    return GenericRun(ctx, r, base, states, log)


def _touch_paths(entries: list[RequirementEntry], state: EngineState, ctx: TermContext) -> None:
    # re-evaluate through the memoized registry so snapshots hold every step
    g = state.extended()
    for entry in entries:
        assert entry.record.witness is not None
        alpha = parse_ordinal(entry.record.witness)
        for text in entry.record.terms:
            term_eval(parse_term(text), g, alpha, ctx)


def word_restrict_small(
    word: Sequence[FiniteInjection], a: OrdinalSet, ambient: Ordinal = OMEGA
) -> FiniteInjection:
    """A finite permutation h containing the word's graph on A x A.

    Factors are finite permutations of their domains, identity elsewhere;
    the rightmost acts first. A must be finite.
    """
    size = a.known_size()
    if size is None:
        raise ValueError(f"{a} is not finite")
    factors = [extend_identity(h, ambient) for h in word]
    pairs = {}
    for point in a.first(size):
        image: Ordinal | None = point
        for f in reversed(factors):
            assert image is not None
            image = f.apply(image)
        if image is not None and image in a:
            pairs[point] = image
    return complete_to_permutation(FiniteInjection(pairs))


Factor = str | FiniteInjection


@dataclass
class PushDown:
    factors: list[Factor]
    sets: list[list[Ordinal]]


def _factor_map(factor: Factor, ctx: TermContext) -> PartialInjection:
    if isinstance(factor, FiniteInjection):
        return extend_identity(factor, ctx.ambient)
    return ctx.lookup(factor)


def word_eval_factors(factors: Sequence[Factor], ctx: TermContext, alpha: Ordinal | int) -> Ordinal | None:
    point: Ordinal | None = coerce(alpha)
    for factor in reversed(factors):
        if point is None:
            return None
        point = _factor_map(factor, ctx).apply(point)
    return point


def word_push_down(
    word: Sequence[Factor], a: OrdinalSet, ctx: TermContext, inner: OrdinalSet | None = None
) -> PushDown:
    """Replace every small-support factor h of s by a finite h' supported
    inside ``inner`` so that s and the new word u agree on A x A.

    Registered factors are names in ``ctx``; the rightmost factor acts first.
    Walking right to left from A, each h contributes h & (S x h[S] & inner)
    completed to a permutation, and each registered g moves S to g[S].

    Registered factors must keep ``inner`` in place on the points visited. A
    point that an h sends out of ``inner`` is dropped, so s must not bring it
    back into A.

    Raises:
        ValueError: if A is infinite or outside ``inner``, a registered factor
            moves a visited point out of ``inner``, or a dropped point returns to A
    """
    inner = IntervalSet.initial(ctx.ambient) if inner is None else inner
    size = a.known_size()
    if size is None:
        raise ValueError(f"{a} is not finite")
    if not a.issubset(inner):
        raise ValueError(f"{a} is not inside {inner}")
    current = a.first(size)
    sets = [current]
    replaced: list[Factor] = []
    for position in range(len(word) - 1, -1, -1):
        factor = word[position]
        f = _factor_map(factor, ctx)
        moved = {x: image for x in current if (image := f.apply(x)) is not None}
        if isinstance(factor, FiniteInjection):
            kept = {x: image for x, image in moved.items() if image in inner}
            for x, image in moved.items():
                if x in kept:
                    continue
                value = word_eval_factors(word[:position], ctx, image)
                if value is not None and value in a:
                    raise ValueError(f"{x} leaves {inner} under {factor} and returns to {value} in {a}")
            replaced.append(complete_to_permutation(FiniteInjection(kept)))
            current = sorted(kept.values())
        else:
            escaped = [(x, image) for x, image in moved.items() if image not in inner]
            if escaped:
                x, image = escaped[0]
                raise ValueError(f"{factor} sends {x} to {image} outside {inner}")
            replaced.append(factor)
            current = sorted(moved.values())
        sets.append(current)
    return PushDown(list(reversed(replaced)), sets)


def push_down_problems(
    word: Sequence[Factor], pushed: PushDown, a: OrdinalSet, ctx: TermContext
) -> list[str]:
    """Points of A where s lands in A but u disagrees."""
    size = a.known_size()
    assert size is not None
    problems = []
    for alpha in a.first(size):
        value = word_eval_factors(word, ctx, alpha)
        if value is None or value not in a:
            continue
        if word_eval_factors(pushed.factors, ctx, alpha) != value:
            problems.append(f"s({alpha})={value} but u differs")
    return problems
