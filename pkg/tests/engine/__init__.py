# Tests for the scheduled construction of a permutation with g[B] = C

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perm_homogeneity.engine import (
    EngineError,
    EngineMap,
    cantor_unpair,
    engine_new,
    engine_query,
    engine_step,
    engine_witness,
    prefix_split_holds,
    verify_witness,
)
from perm_homogeneity.errors import BudgetExhaustedError
from perm_homogeneity.injections import MemoizedInjection, PairSwap, extend_identity
from perm_homogeneity.notation import parse_ordinal, parse_set, parse_term
from perm_homogeneity.ordinals import OMEGA, Ordinal
from perm_homogeneity.terms import TermContext, subterm_closure

from ..strategies import coinfinite_naturals, finite_permutations

_NATURALS = parse_set("[0,w)")
_EVENS = parse_set("[0,w)%2=0")
_THIRDS = parse_set("[0,w)%3=0")


def _state(step_budget: int = 10_000):
    return engine_new(_NATURALS, _EVENS, _THIRDS, TermContext(), PairSwap(), step_budget)


def test_cantor_unpair_first_values():
    assert [cantor_unpair(z) for z in range(6)] == [
        (0, 0),
        (1, 0),
        (0, 1),
        (2, 0),
        (1, 1),
        (0, 2),
    ]


@given(st.integers(min_value=0, max_value=5000))
def test_cantor_unpair_walks_diagonals(z):
    a, b = cantor_unpair(z)
    d = a + b
    assert z == d * (d + 1) // 2 + b


def test_schedule_alternates_tasks():
    state = _state()
    kinds = [engine_step(state).kind for _ in range(6)]
    assert kinds == ["dom", "task1", "ran", "task1", "dom", "task1"]
    first, second = state.records[:2]
    assert first.point == "0"
    assert first.extensions == [["0", "0"]]
    assert second.terms == ["id"]
    assert (second.witness, second.image) == ("0", "1")


def test_task1_witnesses_are_fresh_and_verified():
    state = _state()
    state.run_steps(40)
    ctx, y, g = state.ctx, state.y, state.extended()
    witnesses = [r.witness for r in state.records if r.witness is not None]
    assert len(witnesses) == 20
    assert len(set(witnesses)) == len(witnesses)
    for record in state.records:
        if record.kind != "task1":
            continue
        assert record.blocked == []
        assert record.witness is not None
        terms = [parse_term(t) for t in record.terms]
        alpha = parse_ordinal(record.witness)
        assert verify_witness(terms, g, y, alpha, ctx) == [], f"step {record.step}"


def test_split_holds_on_prefix():
    state = _state()
    assert prefix_split_holds(state, 20)
    for n in range(10):
        image = engine_query(state, n)
        assert image is not None
        assert (Ordinal.of(n) in _EVENS) == (image in _THIRDS)


def test_engine_map_is_a_bijection_on_queried_points():
    f = EngineMap(_state())
    images = [f.apply(Ordinal.of(n)) for n in range(15)]
    assert len(set(images)) == 15
    for n, image in enumerate(images):
        assert f.apply_inverse(image) == Ordinal.of(n)
    assert f.apply(OMEGA) is None


def test_demanded_witnesses_avoid_terms():
    state = _state()
    terms = [parse_term("x.x")]
    witnesses = engine_witness(state, terms, 2)
    assert len(witnesses) == 2
    assert witnesses[0] != witnesses[1]
    assert [r.kind for r in state.records if r.witness is not None][:2] == ["demand", "demand"]
    g = state.extended()
    for alpha in witnesses:
        assert verify_witness(subterm_closure(terms), g, state.y, alpha, state.ctx) == []


def test_source_must_lie_in_universe():
    with pytest.raises(EngineError, match=re.escape("B=[w,w*2) is not a subset of A=[0,w)")):
        engine_new(_NATURALS, parse_set("[w,w*2)"), _THIRDS, TermContext(), PairSwap())


def test_complement_must_be_infinite():
    with pytest.raises(EngineError, match=re.escape("A - B is finite for B=[0,w)")):
        engine_new(_NATURALS, _NATURALS, _THIRDS, TermContext(), PairSwap())


def test_query_gives_up_after_step_budget():
    state = _state(step_budget=5)
    with pytest.raises(BudgetExhaustedError) as excinfo:
        engine_query(state, 50)
    assert str(excinfo.value) == "g: 50 in the domain not reached in 5 steps"
    partial = excinfo.value.partial
    assert isinstance(partial, list)
    assert len(partial) == 5


@st.composite
def _registry_and_terms(draw):
    perms = draw(st.lists(finite_permutations(10), min_size=1, max_size=3))
    ctx = TermContext()
    for i, p in enumerate(perms):
        name = f"h{i}"
        ctx = ctx.with_entry(name, MemoizedInjection(extend_identity(p, OMEGA), name))
    atoms = ["x", "x^-1", *(f"h{i}{suffix}" for i in range(len(perms)) for suffix in ("", "^-1"))]
    words = st.lists(st.sampled_from(atoms), min_size=1, max_size=3).map(".".join)
    terms = [parse_term(text) for text in draw(st.lists(words, min_size=1, max_size=4, unique=True))]
    return ctx, terms


@settings(max_examples=10)
@given(coinfinite_naturals(), coinfinite_naturals(), _registry_and_terms())
def test_witnesses_under_a_registry_are_verified(source, target, registry_and_terms):
    ctx, terms = registry_and_terms
    state = engine_new(_NATURALS, source, target, ctx, PairSwap())
    witnesses = engine_witness(state, terms, 5)
    assert len(set(witnesses)) == 5
    g = state.extended()
    for alpha in witnesses:
        assert verify_witness(subterm_closure(terms), g, state.y, alpha, ctx) == [], (
            f"{[str(t) for t in terms]} at {alpha}"
        )
    assert prefix_split_holds(state, 40)
