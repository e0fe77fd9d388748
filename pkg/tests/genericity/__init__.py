# Tests for the base permutation r, the scheduled rounds and word push-down

import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from perm_homogeneity.engine import EngineError, verify_witness
from perm_homogeneity.errors import PropertyViolationError
from perm_homogeneity.genericity import (
    Condition,
    ConditionShape,
    build_generic_base,
    default_base_group,
    density_step,
    generic_run,
    push_down_problems,
    word_push_down,
    word_restrict_small,
)
from perm_homogeneity.injections import FiniteInjection, PairSwap, extend_identity
from perm_homogeneity.notation import parse_map, parse_ordinal, parse_set, parse_term
from perm_homogeneity.ordinals import OMEGA, Ordinal
from perm_homogeneity.terms import TermContext, term_eval

from ..strategies import finite_permutations

_NATURALS = parse_set("[0,w)")
_EVENS = parse_set("[0,w)%2=0")
_ODDS = parse_set("[0,w)%2=1")


def o(n: int) -> Ordinal:
    return Ordinal.of(n)


def test_default_base_group():
    group = default_base_group()
    assert {name: str(h) for name, h in group.items()} == {
        "h0": "0>1,1>0",
        "h1": "1>2,2>3,3>1",
    }


def test_density_step_extends_inside_the_shape():
    p = Condition(ConditionShape(_NATURALS, _EVENS, _ODDS))
    q, alpha = density_step([parse_term("x")], p, 0, PairSwap(), TermContext())
    assert alpha == o(0)
    assert str(q.p) == "0>3"
    assert q.extends(p)
    assert q.respects_shape()


def test_density_step_starts_at_m():
    p = Condition(ConditionShape(_NATURALS, _EVENS, _ODDS))
    _q, alpha = density_step([parse_term("x")], p, 6, PairSwap(), TermContext())
    assert alpha == o(6)


def test_density_step_rejects_a_broken_condition():
    p = Condition(ConditionShape(_NATURALS, _EVENS, _ODDS), parse_map("0>2"))
    with pytest.raises(PropertyViolationError) as excinfo:
        density_step([parse_term("x")], p, 0, PairSwap(), TermContext())
    assert str(excinfo.value) == "0>2 does not respect the condition shape"


def test_base_permutation_escapes_its_term_sets():
    base = build_generic_base(steps=20)
    assert len(base.witnesses) == 10
    for record in base.records:
        if record.kind != "base":
            continue
        assert record.witness is not None
        alpha = parse_ordinal(record.witness)
        image = base.g.apply(alpha)
        assert str(image) == record.image
        for text in record.terms:
            assert term_eval(parse_term(text), None, alpha, base.ctx) != image


def test_generic_run_adds_each_round_to_the_registry():
    run = generic_run([(_EVENS, _ODDS, _NATURALS)], requirements=5, base_steps=20)
    assert run.ctx.is_registered("g0")
    assert [s.id for s in run.log.snapshots] == ["base", "g0"]
    assert len(run.log.entries) == 5
    (state,) = run.rounds
    g = state.extended()
    for entry in run.log.entries:
        assert entry.snapshot_id == "g0"
        record = entry.record
        assert record.witness is not None
        terms = [parse_term(t) for t in record.terms if t not in record.blocked]
        alpha = parse_ordinal(record.witness)
        assert verify_witness(terms, g, run.r, alpha, run.ctx) == []


def test_generic_run_checks_round_sets():
    with pytest.raises(
        EngineError,
        match=re.escape("Round 0: X=[0,w) is not infinite and coinfinite in [0,w)"),
    ):
        generic_run([(_NATURALS, _ODDS, _NATURALS)], requirements=1, base_steps=4)


def test_word_restrict_small():
    word = [FiniteInjection.swap(0, 1), FiniteInjection.cycle(1, 2, 3)]
    h = word_restrict_small(word, parse_set("[0,3)"))
    assert str(h) == "0>1,1>2,2>0"


def test_word_restrict_small_needs_a_finite_set():
    with pytest.raises(ValueError, match=re.escape("[0,w) is not finite")):
        word_restrict_small([FiniteInjection.swap(0, 1)], _NATURALS)


def test_word_push_down_keeps_values_on_a():
    ctx = TermContext().with_entry("g", extend_identity(FiniteInjection.swap(0, 5), OMEGA))
    word = [FiniteInjection.cycle(1, 2, 3), "g", FiniteInjection.swap(0, 7)]
    a, inner = parse_set("[0,3)"), parse_set("[0,6)")
    pushed = word_push_down(word, a, ctx, inner)
    assert [str(f) for f in pushed.factors] == ["1>2,2>3,3>1", "g", "1>1,2>2"]
    assert pushed.sets == [[o(0), o(1), o(2)], [o(1), o(2)], [o(1), o(2)], [o(2), o(3)]]
    assert push_down_problems(word, pushed, a, ctx) == []


def test_word_push_down_needs_a_inside_inner():
    with pytest.raises(ValueError, match=re.escape("[0,8) is not inside [0,6)")):
        word_push_down([FiniteInjection.swap(0, 1)], parse_set("[0,8)"), TermContext(), parse_set("[0,6)"))


def test_word_push_down_rejects_registered_factor_leaving_inner():
    ctx = TermContext().with_entry("g", extend_identity(FiniteInjection.swap(1, 9), OMEGA))
    with pytest.raises(ValueError) as excinfo:
        word_push_down(["g"], parse_set("[0,3)"), ctx, parse_set("[0,6)"))
    assert str(excinfo.value) == "g sends 1 to 9 outside [0,6)"


def test_word_push_down_rejects_points_returning_to_a():
    word = [FiniteInjection.swap(0, 7), FiniteInjection.swap(0, 7)]
    with pytest.raises(ValueError) as excinfo:
        word_push_down(word, parse_set("[0,3)"), TermContext(), parse_set("[0,6)"))
    assert str(excinfo.value) == "0 leaves [0,6) under 0>7,7>0 and returns to 0 in [0,3)"


@st.composite
def _push_down_cases(draw):
    g = draw(finite_permutations(8))
    ctx = TermContext().with_entry("g", extend_identity(g, OMEGA))
    factor = st.one_of(st.just("g"), finite_permutations(12))
    word = draw(st.lists(factor, min_size=1, max_size=4))
    a = parse_set(f"[0,{draw(st.integers(1, 8))})")
    return word, a, ctx


@given(_push_down_cases())
def test_word_push_down_keeps_pairs_on_a(case):
    word, a, ctx = case
    inner = parse_set("[0,8)")
    try:
        pushed = word_push_down(word, a, ctx, inner)
    except ValueError as e:
        assert "returns to" in str(e)
        return
    assert push_down_problems(word, pushed, a, ctx) == []
    for factor in pushed.factors:
        if isinstance(factor, FiniteInjection):
            assert all(x in inner for x in factor.domain())
            assert factor.is_permutation()


def test_density_step_with_no_terms_keeps_the_condition():
    p = Condition(ConditionShape(_NATURALS, _EVENS, _ODDS))
    r = extend_identity(parse_map("3>4,4>3"), OMEGA)
    q, alpha = density_step([], p, 0, r, TermContext())
    assert q == p
    assert alpha == o(0)
    _q, later = density_step([], p, 5, r, TermContext())
    assert later == o(5)


def test_generic_run_with_two_rounds():
    rounds = [
        (_EVENS, _ODDS, _NATURALS),
        (parse_set("[0,w)%3=0"), parse_set("[0,w)%3=1"), _NATURALS),
    ]
    run = generic_run(rounds, requirements=3, base_steps=10)
    assert [s.id for s in run.log.snapshots] == ["base", "g0", "g1"]
    assert len(run.log.entries) == 6
    assert run.ctx.is_registered("g1")
    for index, state in enumerate(run.rounds):
        g = state.extended()
        entries = [e for e in run.log.entries if e.round == index]
        assert len(entries) == 3
        for entry in entries:
            record = entry.record
            assert record.witness is not None
            terms = [parse_term(t) for t in record.terms if t not in record.blocked]
            alpha = parse_ordinal(record.witness)
            assert verify_witness(terms, g, run.r, alpha, run.ctx) == [], f"round {index}"
