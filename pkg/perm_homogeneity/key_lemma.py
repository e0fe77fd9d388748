# Pair catalogs and the permutations f_<A,B> with f[B] = K
#
# Every catalog pair <A,B> has [0,kappa) | B inside A and an infinite A - B.
# The pairs are handled in catalog order; f for a pair is an engine run over
# (A, B, K) whose term sets mention x, the earlier f's and the canonical
# isos between intersections of catalog sets that carry the catalog's trace
# onto itself. The extended generators f+ (f on A, identity elsewhere) then
# give two-factor words moving any admitted X onto K, and every word over
# them misses some y-pair.

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from itertools import count, permutations
from pathlib import Path

from mashumaro import DataClassDictMixin

from .engine import (
    DEFAULT_STEP_BUDGET,
    EngineMap,
    EngineState,
    RegistrySnapshot,
    engine_new,
    verify_witness,
)
from .errors import PropertyViolationError
from .injections import MemoizedInjection, PairSwap, PartialInjection
from .lazy_enumeration import MemoizedEnumeration
from .nice_family import NiceFamily, itrace
from .notation import parse_ordinal, parse_set, parse_term
from .order_iso import OrderIso
from .ordinal_sets import IntervalSet, OrdinalSet, PredicateSet, Residues, ResidueSet
from .ordinals import OMEGA, Ordinal
from .term_rewriting import (
    Word,
    format_word,
    kappa_normalize,
    rho_normal_form,
    subsequence_cover,
    word_eval,
    word_inverse,
)
from .terms import TermContext, escape_search, term_eval, term_sort_key

logger = logging.getLogger(__name__)

DEFAULT_TASKS = 40
DEFAULT_PREFIX = 100


class CatalogError(ValueError):
    """A catalog request cannot be normalized into a valid pair."""


class KeyLemmaError(RuntimeError):
    """A set is not covered by the catalog."""


def even_naturals(kappa: Ordinal = OMEGA) -> ResidueSet:
    """The default K: even points of [0, kappa)."""
    return ResidueSet.from_pieces([(Ordinal(), kappa, Residues.of(2, [0]))])


@dataclass(frozen=True)
class CatalogPair:
    name: str
    a: ResidueSet
    b: OrdinalSet


@dataclass
class PairCatalogFile(DataClassDictMixin):
    """JSON form of a catalog: ``pairs`` rows are ``[A, B]`` set strings."""

    pairs: list[list[str]]
    kappa: str = "w"


def _prefix_infinite(s: OrdinalSet, horizon: int) -> bool:
    if isinstance(s, PredicateSet):
        return s.is_infinite(horizon)
    return s.is_infinite()


class PairCatalog:
    """Pairs <A,B> requested so far, normalized so that [0,kappa) | B lies
    inside A and A - B is infinite."""

    def __init__(self, ambient: Ordinal, kappa: Ordinal = OMEGA) -> None:
        if kappa > ambient:
            raise CatalogError(f"kappa={kappa} exceeds the ambient ordinal {ambient}")
        self.ambient = ambient
        self.kappa = kappa
        self.pairs: list[CatalogPair] = []

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[CatalogPair]:
        return iter(self.pairs)

    def request(self, a: ResidueSet, b: OrdinalSet, horizon: int = 200) -> CatalogPair:
        """Normalize and append <A,B>. Predicate sets are checked on their first
        ``horizon`` canonical elements.

        Raises:
            CatalogError: if A leaves the ambient ordinal, B is not inside the
                normalized A or the normalized A - B is finite
        """
        initial = IntervalSet.initial(self.kappa)
        normalized = ResidueSet.union(a, initial)
        if isinstance(b, ResidueSet):
            normalized = ResidueSet.union(normalized, b)
        elif not b.issubset(normalized, horizon):
            raise CatalogError(f"B={b} is not inside A={normalized}")
        if normalized.bound > self.ambient:
            raise CatalogError(f"A={normalized} is not below {self.ambient}")
        if not _prefix_infinite(normalized - b, horizon):
            raise CatalogError(f"A - B is finite for A={normalized}, B={b}")
        pair = CatalogPair(f"f{len(self.pairs)}", normalized, b)
        self.pairs.append(pair)
        logger.info("catalog pair %s: A=%s B=%s", pair.name, pair.a, pair.b)
        return pair

    def admit(self, z: OrdinalSet, horizon: int = 200) -> CatalogPair:
        """A pair with B = Z for a Z inside kappa that is infinite and coinfinite
        there, appending <[0,kappa), Z> when no pair has it yet."""
        existing = self.find_exact(z)
        if existing is not None:
            return existing
        initial = IntervalSet.initial(self.kappa)
        if not z.issubset(initial, horizon):
            raise CatalogError(f"{z} is not inside [0,{self.kappa})")
        if not _prefix_infinite(z, horizon) or not _prefix_infinite(initial - z, horizon):
            raise CatalogError(f"{z} is not infinite and coinfinite in [0,{self.kappa})")
        return self.request(initial, z, horizon)

    def find_exact(self, x: OrdinalSet) -> CatalogPair | None:
        return next((pair for pair in self.pairs if pair.b is x or pair.b == x), None)

    def find_containing(self, x: OrdinalSet) -> CatalogPair | None:
        return next((pair for pair in self.pairs if x.issubset(pair.b)), None)

    def a_sets(self) -> list[ResidueSet]:
        return [pair.a for pair in self.pairs]

    def b_sets(self) -> list[OrdinalSet]:
        return [pair.b for pair in self.pairs]

    def trace_family(self) -> NiceFamily:
        members = tuple(self.a_sets())
        return NiceFamily(members, tuple(() for _ in members))

    def to_file(self) -> PairCatalogFile:
        return PairCatalogFile([[str(p.a), str(p.b)] for p in self.pairs], str(self.kappa))


def pair_catalog(
    ambient: Ordinal, kappa: Ordinal = OMEGA, seeds: Iterable[tuple[ResidueSet, OrdinalSet]] = ()
) -> PairCatalog:
    catalog = PairCatalog(ambient, kappa)
    for a, b in seeds:
        catalog.request(a, b)
    return catalog


def load_pair_catalog(path: Path, ambient: Ordinal) -> PairCatalog:
    with path.open(encoding="utf-8") as f:
        data = PairCatalogFile.from_dict(json.load(f))
    catalog = PairCatalog(ambient, parse_ordinal(data.kappa))
    for row in data.pairs:
        if len(row) != 2:
            raise CatalogError(f"Catalog rows are [A, B], got {row}")
        a = parse_set(row[0])
        if not isinstance(a, ResidueSet):
            raise CatalogError(f"A must be a residue set: {row[0]}")
        catalog.request(a, parse_set(row[1]))
    return catalog


def _carries_trace(iso: OrderIso, family: NiceFamily) -> bool:
    # rho[A & C0 : A in family] == {A & C1 : A in family}
    images = set()
    for member in family.members:
        piece = ResidueSet.intersection(member, iso.source)
        if not isinstance(piece, IntervalSet):
            return False
        images.add(iso.image(piece))
    return images == {ResidueSet.intersection(member, iso.target) for member in family.members}


class CanonicalIsos:
    """The isos rho(C0;C1) between distinct intersections of family members
    that contain [0,kappa), have the same order type and carry the family's
    trace on C0 onto its trace on C1. Enumerated on first use."""

    def __init__(self, family: NiceFamily, kappa: Ordinal) -> None:
        self.family = family
        self.kappa = kappa
        self._isos: dict[str, OrderIso] = {}
        self.names: MemoizedEnumeration[str] = MemoizedEnumeration(self._generate())

    def _generate(self) -> Iterator[str]:
        if not len(self.family):
            return
        whole = IntervalSet.initial(max(m.bound for m in self.family.members))
        initial = IntervalSet.initial(self.kappa)
        candidates = sorted(
            (
                c
                for c in itrace(self.family, whole)
                if isinstance(c, IntervalSet) and initial.issubset(c)
            ),
            key=lambda c: (c.order_type(), str(c)),
        )
        for c0, c1 in permutations(candidates, 2):
            if c0.order_type() != c1.order_type():
                continue
            iso = OrderIso(c0, c1)
            if _carries_trace(iso, self.family):
                self._isos[iso.name] = iso
                yield iso.name

    def resolve(self, name: str) -> PartialInjection | None:
        for index in count():
            if name in self._isos:
                return self._isos[name]
            if self.names.get(index) is None:
                return None


@dataclass
class PairReport(DataClassDictMixin):
    name: str
    a: str
    b: str
    steps: int
    witnesses: int
    prefix: int
    split_holds: bool
    certificate_problems: list[str] = field(default_factory=list)


@dataclass
class KeyLemmaReport(DataClassDictMixin):
    kappa: str
    k: str
    type_map: str = "identity"
    isos: list[str] = field(default_factory=list)
    pairs: list[PairReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.split_holds and not p.certificate_problems for p in self.pairs)


@dataclass
class RewriteStep(DataClassDictMixin):
    term: str
    rho_form: str
    normal: str


@dataclass
class IntransitivityCertificate(DataClassDictMixin):
    word: str
    point: str
    image: str
    cover: list[str]
    rewrites: list[RewriteStep] = field(default_factory=list)


class KeyLemmaConstruction:
    """The registry of f's for a catalog, built pair by pair on demand."""

    def __init__(
        self,
        catalog: PairCatalog,
        family: NiceFamily | None = None,
        k: ResidueSet | None = None,
        y: PartialInjection | None = None,
        tasks: int = DEFAULT_TASKS,
        step_budget: int = DEFAULT_STEP_BUDGET,
        prefix: int = DEFAULT_PREFIX,
    ) -> None:
        self.catalog = catalog
        self.kappa = catalog.kappa
        self.k = even_naturals(self.kappa) if k is None else k
        self.y = PairSwap(self.kappa) if y is None else y
        self.tasks = tasks
        self.step_budget = step_budget
        self.prefix = prefix
        self.isos = CanonicalIsos(catalog.trace_family() if family is None else family, self.kappa)
        self.ctx = TermContext(ambient=catalog.ambient).with_resolver(
            self.isos.resolve, self.isos.names
        )
        self.states: dict[str, EngineState] = {}
        self.maps: dict[str, MemoizedInjection] = {}
        self.report = KeyLemmaReport(kappa=str(self.kappa), k=str(self.k))

    def build(self) -> KeyLemmaReport:
        for pair in self.catalog:
            if pair.name not in self.states:
                self._build_pair(pair)
        self.report.isos = list(self.isos.names)
        return self.report

    def _build_pair(self, pair: CatalogPair) -> PairReport:
        ctx = self.ctx
        state = engine_new(pair.a, pair.b, self.k, ctx, self.y, self.step_budget, pair.name)
        state.run_steps(2 * self.tasks)
        f = EngineMap(state)
        problems = []
        for record in list(state.records):
            if record.witness is None:
                continue
            terms = [parse_term(t) for t in record.terms if t not in record.blocked]
            alpha = parse_ordinal(record.witness)
            for problem in verify_witness(terms, state.extended(), self.y, alpha, ctx):
                problems.append(f"step {record.step}: {problem}")
        split_holds = all(
            (image := f.apply(x)) is not None and (x in pair.b) == (image in self.k)
            for x in pair.a.first(self.prefix)
        )
        memo = MemoizedInjection(f, pair.name)
        self.states[pair.name] = state
        self.maps[pair.name] = memo
        self.ctx = self.ctx.with_entry(pair.name, memo, pair.a)
        report = PairReport(
            name=pair.name,
            a=str(pair.a),
            b=str(pair.b),
            steps=state.step_count,
            witnesses=len(state.witnesses),
            prefix=self.prefix,
            split_holds=split_holds,
            certificate_problems=problems,
        )
        self.report.pairs.append(report)
        logger.info(
            "built %s in %d steps with %d witnesses", pair.name, state.step_count, len(state.witnesses)
        )
        return report

    def homog_word(self, x: OrdinalSet) -> Word:
        """A word of extended generators moving X onto K.

        Raises:
            KeyLemmaError: if X lies inside no B of the catalog or is finite
        """
        self.build()
        exact = self.catalog.find_exact(x)
        if exact is not None:
            return ((exact.name, 1),)
        host = self.catalog.find_containing(x)
        if host is None:
            raise KeyLemmaError(f"{x} is not inside any B of the catalog")
        if not x.is_infinite():
            raise KeyLemmaError(f"{x} is finite")
        first = self.maps[host.name]
        z = PredicateSet(
            self.k,
            lambda p: (q := first.apply_inverse(p)) is not None and q in x,
            f"{host.name}[{x}]",
        )
        pair = self.catalog.admit(z, self.prefix)
        if pair.name not in self.states:
            self._build_pair(pair)
        return ((pair.name, 1), (host.name, 1))

    def word_problems(self, word: Word, x: OrdinalSet, n: int = DEFAULT_PREFIX) -> list[str]:
        """Points among the first n of X not sent into K, and of K not reached from X."""
        problems = []
        for p in x.first(n):
            image = word_eval(word, self.ctx, p)
            if image is None or image not in self.k:
                problems.append(f"{p} goes to {image}, outside K")
        back = word_inverse(word)
        for q in self.k.first(n):
            preimage = word_eval(back, self.ctx, q)
            if preimage is None or preimage not in x:
                problems.append(f"{q} comes from {preimage}, outside X")
        return problems

    def intransitive_cert(
        self, word: Sequence[tuple[str, int]], start: Ordinal | int = 0, budget: int = DEFAULT_STEP_BUDGET
    ) -> IntransitivityCertificate:
        """A y-pair that the extended word does not produce.

        Raises:
            BudgetExhaustedError: if no pair escapes within ``budget`` candidates
            PropertyViolationError: if direct evaluation contradicts the escape
        """
        self.build()
        cover = sorted(subsequence_cover(word), key=term_sort_key)
        ctx = self.ctx
        rewrites = []
        normalized = set()
        for t in cover:
            rho_form, ctx = rho_normal_form(t, ctx)
            normal, ctx = kappa_normalize(rho_form, self.kappa, ctx)
            rewrites.append(RewriteStep(str(t), str(rho_form), str(normal)))
            normalized.add(normal)
        alpha = escape_search(self.y, normalized, None, ctx, start, budget)
        image = self.y.apply(alpha)
        covering = [str(t) for t in cover if term_eval(t, None, alpha, self.ctx) == image]
        if covering or word_eval(word, self.ctx, alpha) == image:
            raise PropertyViolationError(f"<{alpha},{image}> is produced by {covering or format_word(word)}")
        logger.info("word %s misses <%s,%s>", format_word(word), alpha, image)
        return IntransitivityCertificate(
            word=format_word(word),
            point=str(alpha),
            image=str(image),
            cover=[str(t) for t in cover],
            rewrites=rewrites,
        )

    def snapshots(self) -> list[RegistrySnapshot]:
        """One snapshot per pair with its own g as x, and ``keylemma`` without x."""
        maps = {name: memo.snapshot().to_json() for name, memo in self.maps.items()}
        carriers = {pair.name: str(pair.a) for pair in self.catalog if pair.name in self.maps}
        ambient, kappa = str(self.catalog.ambient), str(self.kappa)
        result = [RegistrySnapshot("keylemma", maps, ambient, carriers, kappa=kappa)]
        for pair in self.catalog:
            if pair.name in self.states:
                x = self.states[pair.name].g.to_json()
                result.append(
                    RegistrySnapshot(pair.name, maps, ambient, carriers, x, str(pair.a), kappa=kappa)
                )
        return result


def key_lemma_build(
    catalog: PairCatalog,
    family: NiceFamily | None = None,
    k: ResidueSet | None = None,
    y: PartialInjection | None = None,
    tasks: int = DEFAULT_TASKS,
    step_budget: int = DEFAULT_STEP_BUDGET,
    prefix: int = DEFAULT_PREFIX,
) -> KeyLemmaConstruction:
    construction = KeyLemmaConstruction(catalog, family, k, y, tasks, step_budget, prefix)
    construction.build()
    return construction
