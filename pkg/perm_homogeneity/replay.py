# Re-check the claims of a trace from the finite data stored in it
#
# Every record kind has a checker returning a list of problems. Checkers use
# only the record itself and the finite map snapshots of the same trace;
# nothing is rebuilt by a construction engine.

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

from mashumaro import DataClassDictMixin

from .config import RunConfig
from .engine import TaskRecord
from .extension import ExtendFuzzReport
from .injections import ExtendedPermutation, PairSwap, PartialInjection
from .nice_family import FamilyCatalog, check_locally_small, check_n2
from .notation import (
    ISO_PREFIX,
    NotationParseError,
    evaluate_ordinal_op,
    map_from_json,
    parse_iso,
    parse_ordinal,
    parse_set,
    parse_term,
)
from .ordinal_sets import IntervalSet, ResidueSet
from .term_rewriting import term_to_word, word_eval
from .terms import TermContext, term_eval
from .trace_file import TraceEntry

logger = logging.getLogger(__name__)


@dataclass
class ReplayReport(DataClassDictMixin):
    checked: int = 0
    by_kind: dict[str, int] = field(default_factory=dict)
    problems: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.problems


@dataclass
class Snapshot:
    ctx: TermContext
    x: PartialInjection | None
    y: PartialInjection


def _resolve_iso(name: str) -> PartialInjection | None:
    if not name.startswith(ISO_PREFIX):
        return None
    try:
        return parse_iso(name)
    except NotationParseError:
        return None


def load_snapshot(data: dict[str, Any]) -> Snapshot:
    ambient = parse_ordinal(data["ambient"])
    registry = {name: map_from_json(pairs) for name, pairs in data["maps"].items()}
    carriers = {name: parse_set(text) for name, text in data.get("carriers", {}).items()}
    ctx = TermContext(registry, carriers, ambient, _resolve_iso)
    x = None
    if data.get("x") is not None:
        x = ExtendedPermutation(map_from_json(data["x"]), parse_set(data["z"]), ambient)
    if data.get("y", "pairswap") == "r":
        y: PartialInjection = registry["r"]
    else:
        y = PairSwap(parse_ordinal(data.get("kappa", "w")))
    return Snapshot(ctx, x, y)


class TraceReplayer:
    """Checks the entries of one trace; snapshots are read first."""

    def __init__(self, entries: list[TraceEntry]) -> None:
        self.entries = entries
        self.snapshots = {
            e.data["id"]: load_snapshot(e.data) for e in entries if e.kind == "snapshot"
        }
        self._witnesses: dict[str, set[str]] = defaultdict(set)
        self._checkers: dict[str, Callable[[dict[str, Any]], list[str]]] = {
            "run": self._check_run,
            "ordinal": self._check_ordinal,
            "family-check": self._check_family,
            "orders": self._check_orders,
            "partition": self._check_partition,
            "homog-map": self._check_homog_map,
            "block-agreements": self._check_block_agreements,
            "escape": self._check_escape,
            "fuzz": self._check_fuzz,
            "snapshot": lambda _data: [],
            "task": self._check_task,
            "base": self._check_base,
            "split": self._check_split,
            "pair": self._check_pair,
            "homog-word": self._check_homog_word,
            "intransitivity": self._check_intransitivity,
        }

    def run(self) -> ReplayReport:
        report = ReplayReport()
        for number, entry in enumerate(self.entries, start=1):
            checker = self._checkers.get(entry.kind)
            if checker is None:
                report.problems.append(f"record {number}: unknown kind {entry.kind!r}")
                continue
            try:
                problems = checker(entry.data)
            except (KeyError, TypeError, ValueError, ArithmeticError) as e:
                problems = [f"malformed record: {e}"]
            report.checked += 1
            report.by_kind[entry.kind] = report.by_kind.get(entry.kind, 0) + 1
            report.problems.extend(f"record {number} ({entry.kind}): {p}" for p in problems)
        logger.info("replayed %d records, %d problems", report.checked, len(report.problems))
        return report

    def _snapshot(self, data: dict[str, Any]) -> Snapshot:
        snapshot_id = data["snapshot"]
        if snapshot_id not in self.snapshots:
            raise KeyError(f"no snapshot {snapshot_id!r}")
        return self.snapshots[snapshot_id]

    def _check_run(self, data: dict[str, Any]) -> list[str]:
        RunConfig.from_dict(data)
        return []

    def _check_ordinal(self, data: dict[str, Any]) -> list[str]:
        result = evaluate_ordinal_op(data["op"], data["args"])
        return [] if result == data["result"] else [f"expected {result}, trace has {data['result']}"]

    def _check_family(self, data: dict[str, Any]) -> list[str]:
        family = FamilyCatalog.from_dict(data["family"]).to_family()
        report = check_n2(family)
        problems = []
        if report.passed != data["passed"]:
            problems.append(f"recorded passed={data['passed']}, recheck gives {report.passed}")
        if "locally_small_bound" in data:
            large = check_locally_small(family, data["locally_small_bound"])
            if {str(k): v for k, v in large.items()} != data["too_large"]:
                problems.append(f"trace counts above the bound are {large}")
        return problems

    def _check_orders(self, data: dict[str, Any]) -> list[str]:
        member = parse_set(data["set"])
        prefix = [parse_ordinal(p) for p in data["prefix"]]
        problems = [f"{p} is not in {member}" for p in prefix if p not in member]
        if len(set(prefix)) != len(prefix):
            problems.append("rank prefix repeats a point")
        return problems

    def _check_partition(self, data: dict[str, Any]) -> list[str]:
        meet = _residue_set(data["meet"])
        union: ResidueSet = IntervalSet.empty()
        problems = []
        for text in data["pieces"]:
            piece = _residue_set(text)
            if not ResidueSet.intersection(union, piece).is_empty():
                problems.append(f"piece {piece} overlaps an earlier piece")
            union = ResidueSet.union(union, piece)
        if union != meet:
            problems.append(f"pieces cover {union}, not {meet}")
        if data.get("disagreements"):
            problems.append(f"{data['disagreements']} order disagreements recorded")
        return problems

    def _check_homog_map(self, data: dict[str, Any]) -> list[str]:
        x, y = parse_set(data["x"]), parse_set(data["y"])
        g = map_from_json(data["pairs"])
        problems = [
            f"{a} -> {b} crosses the split"
            for a, b in g.pairs()
            if (a in x) != (b in y)
        ]
        audit = data["audit"]
        if not (audit["injective"] and audit["maps_x_onto_y"] and audit["maps_rest_onto_rest"]):
            problems.append("audit failed")
        return problems

    def _check_block_agreements(self, data: dict[str, Any]) -> list[str]:
        counts = data["counts"]
        special = [i for i, c in enumerate(counts) if c >= 2]
        problems = []
        if special != data["special_blocks"]:
            problems.append(f"special blocks should be {special}")
        if data.get("monotone", True) and len(special) > 1:
            problems.append(f"{len(special)} blocks with two agreements")
        return problems

    def _check_escape(self, data: dict[str, Any]) -> list[str]:
        certificate = data["certificate"]
        problems = []
        if certificate["index"] < data["threshold"]:
            problems.append(f"slot {certificate['index']} is below {data['threshold']}")
        covered = [i for i, image in enumerate(data["images"]) if image == certificate["image"]]
        if covered:
            problems.append(f"maps {covered} produce the pair")
        return problems

    def _check_fuzz(self, data: dict[str, Any]) -> list[str]:
        report = ExtendFuzzReport.from_dict(data)
        problems = []
        if report.counterexamples:
            problems.append(f"{report.counterexamples} counterexamples recorded")
        if report.counterexamples > report.instances or len(report.examples) > report.counterexamples:
            problems.append("inconsistent counts")
        return problems

    def _check_task(self, data: dict[str, Any]) -> list[str]:
        snapshot = self._snapshot(data)
        record = TaskRecord.from_dict(data["record"])
        problems = []
        x = snapshot.x
        if x is None:
            return [f"snapshot {data['snapshot']} has no x"]
        for source, target in record.extensions:
            if x.apply(parse_ordinal(source)) != parse_ordinal(target):
                problems.append(f"extension {source} -> {target} is not in the snapshot")
        if record.witness is None:
            return problems
        seen = self._witnesses[data["snapshot"]]
        if record.witness in seen:
            problems.append(f"witness {record.witness} used twice")
        seen.add(record.witness)
        alpha = parse_ordinal(record.witness)
        image = snapshot.y.apply(alpha)
        if image is None or str(image) != record.image:
            problems.append(f"y({alpha}) is {image}, trace has {record.image}")
        for text in record.terms:
            if text in record.blocked:
                continue
            value = term_eval(parse_term(text), x, alpha, snapshot.ctx)
            if value is None:
                problems.append(f"{text} undefined at {alpha}")
            elif value == image:
                problems.append(f"{text} sends {alpha} to y({alpha})")
        return problems

    def _check_base(self, data: dict[str, Any]) -> list[str]:
        snapshot = self._snapshot(data)
        record = TaskRecord.from_dict(data["record"])
        if record.witness is None:
            return []
        alpha = parse_ordinal(record.witness)
        image = snapshot.y.apply(alpha)
        problems = []
        if image is None or str(image) != record.image:
            problems.append(f"r({alpha}) is {image}, trace has {record.image}")
        for text in record.terms:
            if term_eval(parse_term(text), None, alpha, snapshot.ctx) == image:
                problems.append(f"{text} agrees with r at {alpha}")
        return problems

    def _check_split(self, data: dict[str, Any]) -> list[str]:
        snapshot = self._snapshot(data)
        source, target = parse_set(data["source"]), parse_set(data["target"])
        x = snapshot.x
        if x is None:
            return [f"snapshot {data['snapshot']} has no x"]
        problems = []
        for text in data["points"]:
            point = parse_ordinal(text)
            image = x.apply(point)
            if image is None:
                problems.append(f"{point} is not in the snapshot")
            elif (point in source) != (image in target):
                problems.append(f"{point} -> {image} crosses the split")
        return problems

    def _check_pair(self, data: dict[str, Any]) -> list[str]:
        problems = list(data["certificate_problems"])
        if not data["split_holds"]:
            problems.append(f"{data['name']} does not send B into K on the prefix")
        return problems

    def _check_homog_word(self, data: dict[str, Any]) -> list[str]:
        snapshot = self._snapshot(data)
        word = term_to_word(parse_term(data["word"]))
        x, k = parse_set(data["x"]), parse_set(data["k"])
        problems = list(data["problems"])
        for text in data["points"]:
            point = parse_ordinal(text)
            if point not in x:
                problems.append(f"{point} is not in X")
                continue
            image = word_eval(word, snapshot.ctx, point)
            if image is None or image not in k:
                problems.append(f"{point} goes to {image}, outside K")
        return problems

    def _check_intransitivity(self, data: dict[str, Any]) -> list[str]:
        snapshot = self._snapshot(data)
        certificate = data["certificate"]
        alpha = parse_ordinal(certificate["point"])
        image = snapshot.y.apply(alpha)
        problems = []
        if image is None or str(image) != certificate["image"]:
            problems.append(f"y({alpha}) is {image}, trace has {certificate['image']}")
        for text in certificate["cover"]:
            if term_eval(parse_term(text), None, alpha, snapshot.ctx) == image:
                problems.append(f"cover term {text} produces <{alpha},{image}>")
        word = term_to_word(parse_term(certificate["word"]))
        if word_eval(word, snapshot.ctx, alpha) == image:
            problems.append(f"{certificate['word']} produces <{alpha},{image}>")
        return problems


def _residue_set(text: str) -> ResidueSet:
    parsed = parse_set(text)
    if not isinstance(parsed, ResidueSet):
        raise ValueError(f"Expected a residue set, got {text}")
    return parsed


def verify_log(entries: list[TraceEntry]) -> ReplayReport:
    return TraceReplayer(entries).run()
