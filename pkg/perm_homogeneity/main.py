#!/usr/bin/env python3
# Main CLI entry point for perm-homogeneity

from __future__ import annotations

import logging
import sys
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from .coherent_orders import build_orders, order_disagreements, partition_pair, partition_is_exact
from .config import ConfigError, RunConfig, check_known_keys, load_config_file
from .engine import RegistrySnapshot, engine_new, prefix_split_holds
from .errors import BudgetExhaustedError, PropertyViolationError
from .extension import extend_fuzz
from .genericity import DEFAULT_BASE_STEPS, DEFAULT_REQUIREMENTS, generic_run
from .injections import MemoizedInjection, PairSwap, PartialInjection, extend_identity
from .key_lemma import (
    DEFAULT_PREFIX,
    DEFAULT_TASKS,
    KeyLemmaConstruction,
    KeyLemmaError,
    PairCatalog,
    load_pair_catalog,
    pair_catalog,
)
from .monotone import MonotoneMatch, RankOrder, audit_homog_map, homog_map
from .nice_family import NiceFamily, check_locally_small, check_n2, clopen_family, load_family
from .notation import (
    ORDINAL_OPS,
    NotationParseError,
    evaluate_ordinal_op,
    parse_map,
    parse_ordinal,
    parse_set,
    parse_term,
)
from .ordinal_sets import IntervalSet, OrdinalSet, ResidueSet
from .ordinals import Ordinal
from .replay import verify_log
from .term_rewriting import format_word, term_to_word
from .terms import TermContext
from .trace_file import TraceWriter, read_trace
from .witness import block_agreements, monotone_escape, y_witness

console = Console()
logger = logging.getLogger(__name__)

EXIT_PROPERTY = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

# Catalog used when --catalog is not given
DEFAULT_CATALOG = (
    ("[0,w^2)", "[0,w)%2=1"),
    ("[0,w^2)", "[w,w*2)"),
    ("[0,w^2)", "[0,w)%4=0|[w*2,w*3)"),
)

DEFAULT_ROUNDS = ("[0,w)%2=0:[0,w)%2=1:[0,w)", "[0,w)%3=0:[0,w)%3=1:[0,w)")

# Config keys that differ from the parameter name
CONFIG_ALIASES = {"lambda": "ambient"}


class OrdinalParam(click.ParamType):
    name = "ordinal"

    def convert(self, value: Any, param: click.Parameter | None, ctx: click.Context | None) -> Ordinal:
        if isinstance(value, Ordinal):
            return value
        try:
            return parse_ordinal(str(value))
        except NotationParseError as e:
            self.fail(str(e), param, ctx)


class SetParam(click.ParamType):
    name = "set"

    def convert(self, value: Any, param: click.Parameter | None, ctx: click.Context | None) -> OrdinalSet:
        if isinstance(value, OrdinalSet):
            return value
        try:
            return parse_set(str(value))
        except NotationParseError as e:
            self.fail(str(e), param, ctx)


ORDINAL = OrdinalParam()
SET = SetParam()


def common_options(f: Callable[..., None]) -> Callable[..., None]:
    """The flags every construction subcommand shares."""
    options = [
        click.option("--lambda", "ambient", type=ORDINAL, default="w^2", help="Ambient ordinal"),
        click.option("--budget", type=click.IntRange(min=1), default=10_000, help="Search and step budget"),
        click.option("--seed", type=int, default=0, help="Recorded in the trace; constructions are deterministic"),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write the JSON-lines trace here"),
        click.option("--catalog", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="Pair catalog JSON"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _option_text(value: object) -> str:
    if isinstance(value, tuple | list):
        return ";".join(str(v) for v in value)
    return str(value)


def start_trace(command: str, params: dict[str, Any]) -> TraceWriter:
    """A trace whose first record is the merged run configuration."""
    shared = {"ambient", "budget", "seed", "out", "catalog"}
    config = RunConfig(
        command=command,
        ambient=str(params["ambient"]),
        budget=params["budget"],
        seed=params["seed"],
        out=None if params["out"] is None else str(params["out"]),
        catalog=None if params["catalog"] is None else str(params["catalog"]),
        options={k: _option_text(v) for k, v in sorted(params.items()) if k not in shared and v is not None},
    )
    trace = TraceWriter()
    trace.add("run", config)
    return trace


def finish_trace(trace: TraceWriter, out: Path | None) -> None:
    if out is not None:
        trace.write(out)
        logger.info("wrote %d records to %s", len(trace.entries), out)


@contextmanager
def reported_errors() -> Iterator[None]:
    """Print failures in red and exit with the matching code."""
    try:
        yield
    except BudgetExhaustedError as e:
        console.print(f"[red]Budget exhausted: {e}[/red]")
        sys.exit(EXIT_BUDGET)
    except PropertyViolationError as e:
        console.print(f"[red]Property violated: {e}[/red]")
        sys.exit(EXIT_PROPERTY)
    except (ValueError, LookupError, ArithmeticError, OSError, KeyLemmaError) as e:
        console.print(f"[red]Error: {e}[/red]")
        sys.exit(EXIT_USAGE)
    except RuntimeError as e:
        console.print(f"[red]Construction failed: {e}[/red]")
        sys.exit(EXIT_PROPERTY)


def _fail_if(problems: list[str], what: str) -> None:
    for problem in problems[:20]:
        console.print(f"[red]{problem}[/red]")
    if problems:
        console.print(f"[red]{what}: {len(problems)} problems[/red]")
        sys.exit(EXIT_PROPERTY)


def _family(family_path: Path | None, clopen: tuple[int, int] | None) -> NiceFamily:
    if family_path is not None:
        return load_family(family_path)
    if clopen is not None:
        return clopen_family(*clopen)
    raise click.UsageError("Give --family PATH or --clopen K DEPTH")


def _catalog(path: Path | None, ambient: Ordinal, kappa: Ordinal) -> PairCatalog:
    if path is not None:
        return load_pair_catalog(path, ambient)
    seeds = []
    for a, b in DEFAULT_CATALOG:
        a_set = parse_set(a)
        assert isinstance(a_set, ResidueSet)
        seeds.append((a_set, parse_set(b)))
    return pair_catalog(ambient, kappa, seeds)


def _setup_logging(verbose: int) -> None:
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for every construction step")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="key=value file of defaults for the subcommand's flags",
)
@click.pass_context
def main(ctx: click.Context, verbose: int, config_path: Path | None) -> None:
    """Homogeneous permutation group constructions with replayable traces."""
    _setup_logging(verbose)
    if config_path is None or ctx.invoked_subcommand is None:
        return
    command = main.get_command(ctx, ctx.invoked_subcommand)
    if command is None:
        return
    try:
        raw = load_config_file(config_path)
        raw = {CONFIG_ALIASES.get(k, k): v for k, v in raw.items()}
        check_known_keys(raw, [p.name for p in command.params if p.name])
    except ConfigError as e:
        console.print(f"[red]Error: {e}[/red]")
        sys.exit(EXIT_USAGE)
    values: dict[str, Any] = dict(raw)
    for param in command.params:
        if param.name in raw and param.multiple:
            values[param.name] = raw[param.name].split(";")
        elif param.name in raw and param.nargs > 1:
            values[param.name] = raw[param.name].split()
    # explicit flags still win over default_map values
    ctx.default_map = {ctx.invoked_subcommand: values}


@main.command()
@click.argument("op", type=click.Choice(ORDINAL_OPS))
@click.argument("args", nargs=-1, required=True)
@common_options
def ordinal(op: str, args: tuple[str, ...], **params: Any) -> None:
    """Ordinal arithmetic: add, sub, cmp or norm on Cantor normal forms."""
    with reported_errors():
        trace = start_trace("ordinal", {"op": op, "args": args, **params})
        result = evaluate_ordinal_op(op, args)
        trace.add("ordinal", {"op": op, "args": list(args), "result": result})
        console.print(result)
        finish_trace(trace, params["out"])


def family_options(f: Callable[..., None]) -> Callable[..., None]:
    f = click.option("--clopen", type=(int, int), help="Generated clopen family: K DEPTH")(f)
    return click.option(
        "--family", "family_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="Family catalog JSON"
    )(f)


@main.command("family-check")
@family_options
@click.option("--locally-small", type=int, help="Also bound the number of traces on each member")
@common_options
def family_check(family_path: Path | None, clopen: tuple[int, int] | None, locally_small: int | None, **params: Any) -> None:
    """Check the witness structure of a family with exact set arithmetic."""
    with reported_errors():
        trace = start_trace("family-check", {"family_path": family_path, "clopen": clopen, "locally_small": locally_small, **params})
        family = _family(family_path, clopen)
        report = check_n2(family)
        record: dict[str, Any] = {
            "family": family.to_catalog().to_dict(),
            "passed": report.passed,
            "violations": [v.to_dict() for v in report.violations],
        }
        problems = [f"({v.alpha},{v.beta}) {v.kind}: {v.detail}" for v in report.violations]
        if locally_small is not None:
            large = check_locally_small(family, locally_small)
            record["locally_small_bound"] = locally_small
            record["too_large"] = {str(k): v for k, v in large.items()}
            problems.extend(f"member {i} has {n} traces" for i, n in large.items())
        trace.add("family-check", record)
        finish_trace(trace, params["out"])
        console.print(f"{len(family)} members, {report.pairs_checked} pairs checked")
        _fail_if(problems, "family check")


@main.command("orders-build")
@family_options
@click.option("--prefix", type=click.IntRange(min=1), default=20, help="Rank prefix length per member")
@common_options
def orders_build(family_path: Path | None, clopen: tuple[int, int] | None, prefix: int, **params: Any) -> None:
    """Build the rank orders of every member and show their first points."""
    with reported_errors():
        trace = start_trace("orders-build", {"family_path": family_path, "clopen": clopen, "prefix": prefix, **params})
        family = _family(family_path, clopen)
        orders = build_orders(family)
        report = orders.report()
        table = Table(title="Rank orders")
        table.add_column("member", justify="right")
        table.add_column("set")
        table.add_column("first points")
        for member in report.members:
            points = orders.first(member.index, prefix)
            trace.add(
                "orders",
                {
                    "member": member.index,
                    "set": str(family.member(member.index)),
                    "prefix": [str(p) for p in points],
                    "leftover": member.leftover,
                    "flagged": member.leftover_flagged,
                },
            )
            table.add_row(str(member.index), str(family.member(member.index)), " ".join(str(p) for p in points[:8]))
        console.print(table)
        finish_trace(trace, params["out"])
        if report.flagged:
            console.print(f"[yellow]Members with leftover points: {report.flagged}[/yellow]")


@main.command()
@family_options
@click.option("--pair", "pairs", type=(int, int), multiple=True, help="ALPHA BETA; all pairs when omitted")
@click.option("--sample", type=click.IntRange(min=2), default=15, help="Points per piece compared")
@common_options
def partition(
    family_path: Path | None, clopen: tuple[int, int] | None, pairs: tuple[tuple[int, int], ...], sample: int, **params: Any
) -> None:
    """Partition member intersections into pieces where the rank orders agree."""
    with reported_errors():
        trace = start_trace("partition", {"family_path": family_path, "clopen": clopen, "pairs": pairs, "sample": sample, **params})
        family = _family(family_path, clopen)
        orders = build_orders(family)
        chosen = pairs or tuple((a, b) for b in range(len(family)) for a in range(b))
        problems = []
        for alpha, beta in chosen:
            pieces = partition_pair(orders, alpha, beta)
            disagreements = sum(len(order_disagreements(orders, alpha, beta, p, sample)) for p in pieces)
            meet = ResidueSet.intersection(family.member(alpha), family.member(beta))
            trace.add(
                "partition",
                {
                    "alpha": alpha,
                    "beta": beta,
                    "meet": str(meet),
                    "pieces": [str(p) for p in pieces],
                    "disagreements": disagreements,
                },
            )
            if not partition_is_exact(orders, alpha, beta, pieces):
                problems.append(f"({alpha},{beta}): pieces do not partition {meet}")
            if disagreements:
                problems.append(f"({alpha},{beta}): {disagreements} order disagreements")
        finish_trace(trace, params["out"])
        console.print(f"{len(chosen)} pairs partitioned")
        _fail_if(problems, "partition")


@main.command("homog-map")
@click.option("--x", "x", type=SET, required=True, help="Source subset X")
@click.option("--y", "y", type=SET, required=True, help="Target subset Y")
@click.option("--member", type=SET, default="[0,w)", help="Carrier, enumerated canonically")
@family_options
@click.option("--index", type=int, help="Use the rank order of this family member as carrier")
@click.option("--prefix", type=click.IntRange(min=1), default=50, help="Audited rank prefix")
@common_options
def homog_map_command(
    x: OrdinalSet,
    y: OrdinalSet,
    member: OrdinalSet,
    family_path: Path | None,
    clopen: tuple[int, int] | None,
    index: int | None,
    prefix: int,
    **params: Any,
) -> None:
    """Build a permutation of the carrier sending X onto Y and audit it."""
    with reported_errors():
        trace = start_trace(
            "homog-map",
            {"x": x, "y": y, "member": member, "family_path": family_path, "clopen": clopen, "index": index, "prefix": prefix, **params},
        )
        if index is None:
            order = RankOrder.canonical(member)
        else:
            order = RankOrder.of_member(build_orders(_family(family_path, clopen)), index)
        g = homog_map(x, y, order, params["ambient"], index)
        audit = audit_homog_map(g, x, y, prefix)
        pairs = [[str(p), str(g.apply(p))] for p in order.first(prefix)]
        trace.add(
            "homog-map",
            {"x": str(x), "y": str(y), "carrier": str(order.carrier), "pairs": pairs, "audit": audit.to_dict()},
        )
        finish_trace(trace, params["out"])
        console.print(" ".join(f"{a}>{b}" for a, b in pairs[:12]))
        if not audit.passed:
            raise PropertyViolationError(f"audit failed on the first {prefix} points: {audit.to_dict()}")


def _rank_shift(order: RankOrder, k: int) -> MonotoneMatch:
    # the n-th element goes to the (n+k)-th
    tail = order.carrier - IntervalSet.points(order.first(k))
    return MonotoneMatch(order.carrier, tail, order)


@main.command("witness-escape")
@click.option("--member", type=SET, default="[0,w)", help="Carrier, enumerated canonically")
@click.option("--b", "base", type=SET, help="Base set of y; even ranks when omitted")
@click.option("--shift", "shifts", type=click.IntRange(min=0), multiple=True, help="Monotone rank shift by K")
@click.option("--map", "maps", multiple=True, help="Finite injection such as 0>1,2>0")
@click.option("--threshold", type=click.IntRange(min=0), default=0, help="Least slot index of the escape")
@click.option("--blocks", type=click.IntRange(min=1), default=12, help="Blocks scanned")
@common_options
def witness_escape(
    member: OrdinalSet,
    base: OrdinalSet | None,
    shifts: tuple[int, ...],
    maps: tuple[str, ...],
    threshold: int,
    blocks: int,
    **params: Any,
) -> None:
    """Find a y-pair that none of the given maps produces."""
    with reported_errors():
        trace = start_trace(
            "witness-escape",
            {"member": member, "base": base, "shifts": shifts, "maps": maps, "threshold": threshold, "blocks": blocks, **params},
        )
        order = RankOrder.canonical(member)
        y = y_witness(base, order)
        named: list[tuple[str, PartialInjection, bool]] = [
            (f"shift{k}", _rank_shift(order, k), True) for k in shifts
        ]
        named += [(text, parse_map(text), False) for text in maps]
        problems = []
        for label, c, monotone in named:
            agreements = block_agreements(c, y, blocks)
            trace.add("block-agreements", {"map": label, "monotone": monotone, **agreements.to_dict()})
            if monotone and not agreements.claim_holds:
                problems.append(f"{label} agrees with y twice in blocks {agreements.special_blocks}")
        certificate = monotone_escape([c for _, c, _ in named], y, threshold, blocks)
        point = parse_ordinal(certificate.point)
        images = [None if (v := c.apply(point)) is None else str(v) for _, c, _ in named]
        trace.add("escape", {"threshold": threshold, "certificate": certificate.to_dict(), "images": images})
        finish_trace(trace, params["out"])
        console.print(f"<{certificate.point},{certificate.image}> escapes at slot {certificate.index}")
        _fail_if(problems, "block agreements")


@main.command("extend-fuzz")
@click.option("--universe", type=click.IntRange(min=1, max=9), default=5, help="Size of the finite universe")
@click.option("--max-term", type=click.IntRange(min=1), default=2, help="Longest x-term")
@click.option("--terms", type=click.IntRange(min=1), default=2, help="Terms generating each closure")
@click.option("--max-instances", type=click.IntRange(min=1), default=200_000, help="Instance cap")
@common_options
def extend_fuzz_command(universe: int, max_term: int, terms: int, max_instances: int, **params: Any) -> None:
    """Exhaustively check that one-point extensions never cover a free pair."""
    with reported_errors():
        trace = start_trace(
            "extend-fuzz",
            {"universe": universe, "max_term": max_term, "terms": terms, "max_instances": max_instances, **params},
        )
        report = extend_fuzz(universe, max_term, terms, max_instances)
        trace.add("fuzz", report)
        finish_trace(trace, params["out"])
        console.print(f"{report.counterexamples} counterexamples")
        if report.truncated:
            console.print(f"[yellow]Stopped after {report.instances} instances[/yellow]")
        _fail_if(report.examples, "extend-fuzz")


def _generators(specs: tuple[str, ...], ambient: Ordinal) -> TermContext:
    ctx = TermContext(ambient=ambient)
    for spec in specs:
        name, sep, text = spec.partition("=")
        if not sep or not name or name == "x":
            raise click.BadParameter(f"Expected NAME=MAP, got {spec!r}", param_hint="--generator")
        ctx = ctx.with_entry(name, MemoizedInjection(extend_identity(parse_map(text), ambient), name))
    return ctx


def _registry_maps(ctx: TermContext) -> dict[str, list[list[str]]]:
    return {
        name: f.snapshot().to_json() for name, f in ctx.registry.items() if isinstance(f, MemoizedInjection)
    }


@main.command("engine-run")
@click.option("--universe", type=SET, default="[0,w)", help="A: the set g permutes")
@click.option("--source", type=SET, required=True, help="B: sent onto C")
@click.option("--target", type=SET, required=True, help="C")
@click.option("--steps", type=click.IntRange(min=0), default=40, help="Scheduled steps to run")
@click.option("--kappa", type=ORDINAL, default="w", help="y swaps 2k and 2k+1 below kappa")
@click.option("--generator", "generators", multiple=True, help="NAME=MAP: finite permutation, identity elsewhere")
@click.option("--demand", "demands", multiple=True, help="Comma-separated terms needing witnesses")
@click.option("--k", "k", type=click.IntRange(min=1), default=5, help="Witnesses per demand")
@click.option("--prefix", type=click.IntRange(min=1), default=300, help="Checked split prefix")
@common_options
def engine_run(
    universe: OrdinalSet,
    source: OrdinalSet,
    target: OrdinalSet,
    steps: int,
    kappa: Ordinal,
    generators: tuple[str, ...],
    demands: tuple[str, ...],
    k: int,
    prefix: int,
    **params: Any,
) -> None:
    """Run the scheduled construction of g with g[B] = C and log its tasks."""
    with reported_errors():
        trace = start_trace(
            "engine-run",
            {
                "universe": universe,
                "source": source,
                "target": target,
                "steps": steps,
                "kappa": kappa,
                "generators": generators,
                "demands": demands,
                "k": k,
                "prefix": prefix,
                **params,
            },
        )
        ctx = _generators(generators, params["ambient"])
        state = engine_new(universe, source, target, ctx, PairSwap(kappa), params["budget"])
        state.run_steps(steps)
        for demand in demands:
            witnesses = state.demand_witnesses([parse_term(t) for t in demand.split(",")], k)
            console.print(f"{demand}: witnesses {' '.join(str(w) for w in witnesses)}")
        split_holds = prefix_split_holds(state, prefix)
        for record in state.records:
            trace.add("task", {"snapshot": "engine", "record": record.to_dict()})
        points = [str(p) for p in universe.first(prefix)]
        trace.add("split", {"snapshot": "engine", "source": str(source), "target": str(target), "points": points})
        trace.add(
            "snapshot",
            RegistrySnapshot(
                "engine", _registry_maps(ctx), str(ctx.ambient), x=state.g.to_json(), z=str(universe), kappa=str(kappa)
            ),
        )
        finish_trace(trace, params["out"])
        console.print(f"{state.step_count} steps, {len(state.witnesses)} witnesses, |g| = {len(state.g)}")
        if not split_holds:
            raise PropertyViolationError(f"g does not send B onto C on the first {prefix} points")


def _key_lemma(params: dict[str, Any], kappa: Ordinal, tasks: int, prefix: int) -> KeyLemmaConstruction:
    catalog = _catalog(params["catalog"], params["ambient"], kappa)
    return KeyLemmaConstruction(catalog, tasks=tasks, step_budget=params["budget"], prefix=prefix)


def _add_construction(trace: TraceWriter, construction: KeyLemmaConstruction) -> None:
    for pair_report in construction.report.pairs:
        trace.add("pair", pair_report)
        for record in construction.states[pair_report.name].records:
            trace.add("task", {"snapshot": pair_report.name, "record": record.to_dict()})
    for snapshot in construction.snapshots():
        trace.add("snapshot", snapshot)


def key_lemma_options(f: Callable[..., None]) -> Callable[..., None]:
    f = click.option("--prefix", type=click.IntRange(min=1), default=DEFAULT_PREFIX, help="Checked prefix")(f)
    f = click.option("--tasks", type=click.IntRange(min=1), default=DEFAULT_TASKS, help="Requirements per pair")(f)
    return click.option("--kappa", type=ORDINAL, default="w", help="K and y live below kappa")(f)


@main.command()
@key_lemma_options
@click.option("--word-set", "word_sets", type=SET, multiple=True, help="X to move onto K by a word")
@common_options
def keylemma(kappa: Ordinal, tasks: int, prefix: int, word_sets: tuple[OrdinalSet, ...], **params: Any) -> None:
    """Build f for every catalog pair and words moving each X onto K."""
    with reported_errors():
        trace = start_trace("keylemma", {"kappa": kappa, "tasks": tasks, "prefix": prefix, "word_sets": word_sets, **params})
        construction = _key_lemma(params, kappa, tasks, prefix)
        report = construction.build()
        problems = [p for pair in report.pairs for p in pair.certificate_problems]
        problems += [f"{pair.name} breaks the split" for pair in report.pairs if not pair.split_holds]
        for x in word_sets:
            word = construction.homog_word(x)
            word_problems = construction.word_problems(word, x, prefix)
            text = format_word(word)
            trace.add(
                "homog-word",
                {
                    "snapshot": "keylemma",
                    "word": text,
                    "x": str(x),
                    "k": str(construction.k),
                    "points": [str(p) for p in x.first(prefix)],
                    "problems": word_problems,
                },
            )
            console.print(f"{x} -> K by {text}")
            problems += word_problems
        _add_construction(trace, construction)
        finish_trace(trace, params["out"])
        table = Table(title=f"K = {report.k}")
        for column in ("pair", "A", "B", "steps", "witnesses", "split"):
            table.add_column(column)
        for pair in report.pairs:
            table.add_row(pair.name, pair.a, pair.b, str(pair.steps), str(pair.witnesses), "ok" if pair.split_holds else "FAIL")
        console.print(table)
        _fail_if(problems, "keylemma")


@main.command("intransitive-cert")
@key_lemma_options
@click.option("--word", "words", multiple=True, required=True, help="Word over the generators, e.g. f1^-1.f0")
@click.option("--start", type=ORDINAL, default="0", help="Least candidate point")
@common_options
def intransitive_cert(kappa: Ordinal, tasks: int, prefix: int, words: tuple[str, ...], start: Ordinal, **params: Any) -> None:
    """Certify for each word a y-pair that the extended word misses."""
    with reported_errors():
        trace = start_trace(
            "intransitive-cert", {"kappa": kappa, "tasks": tasks, "prefix": prefix, "words": words, "start": start, **params}
        )
        construction = _key_lemma(params, kappa, tasks, prefix)
        construction.build()
        for text in words:
            word = term_to_word(parse_term(text))
            for name, _ in word:
                if name not in construction.maps:
                    raise KeyLemmaError(f"{name} is not a catalog generator")
            certificate = construction.intransitive_cert(word, start, params["budget"])
            trace.add("intransitivity", {"snapshot": "keylemma", "certificate": certificate.to_dict()})
            console.print(f"{certificate.word} misses <{certificate.point},{certificate.image}>")
        _add_construction(trace, construction)
        finish_trace(trace, params["out"])


def _round(text: str) -> tuple[OrdinalSet, OrdinalSet, OrdinalSet]:
    parts = text.split(":")
    if len(parts) != 3:
        raise click.BadParameter(f"Expected X:Y:Z, got {text!r}", param_hint="--round")
    x, y, z = (parse_set(p) for p in parts)
    return x, y, z


@main.command("generic-run")
@click.option("--round", "rounds", multiple=True, help="X:Y:Z for one round")
@click.option("--requirements", type=click.IntRange(min=1), default=DEFAULT_REQUIREMENTS, help="Requirements per round")
@click.option("--base-steps", type=click.IntRange(min=0), default=DEFAULT_BASE_STEPS, help="Steps for the base permutation")
@common_options
def generic_run_command(rounds: tuple[str, ...], requirements: int, base_steps: int, **params: Any) -> None:
    """Build r, then one generic g per round, logging every requirement."""
    with reported_errors():
        chosen = rounds or DEFAULT_ROUNDS
        trace = start_trace(
            "generic-run", {"rounds": chosen, "requirements": requirements, "base_steps": base_steps, **params}
        )
        run = generic_run(
            [_round(text) for text in chosen], requirements, base_steps=base_steps, step_budget=params["budget"]
        )
        for record in run.log.base:
            trace.add("base", {"snapshot": "base", "record": record.to_dict()})
        for entry in run.log.entries:
            trace.add("task", {"snapshot": entry.snapshot_id, "record": entry.record.to_dict()})
        for snapshot in run.log.snapshots:
            trace.add("snapshot", snapshot)
        finish_trace(trace, params["out"])
        console.print(f"{len(run.rounds)} rounds, {len(run.log.entries)} requirements met")


@main.command("verify-log")
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def verify_log_command(trace_path: Path) -> None:
    """Re-check every record of a trace from its stored snapshots."""
    with reported_errors():
        report = verify_log(read_trace(trace_path))
        table = Table(title=str(trace_path))
        table.add_column("kind")
        table.add_column("records", justify="right")
        for kind, count in sorted(report.by_kind.items()):
            table.add_row(kind, str(count))
        console.print(table)
        if report.passed:
            console.print(f"[green]{report.checked} records verified[/green]")
        _fail_if(report.problems, "replay")


if __name__ == "__main__":
    main()
