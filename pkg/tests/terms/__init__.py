# Tests for terms, their enumeration and word rewriting
# Data-driven evaluation tests using config.yaml fixtures

from itertools import product
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perm_homogeneity.errors import BudgetExhaustedError
from perm_homogeneity.injections import FiniteInjection, PairSwap, PartialInjection
from perm_homogeneity.notation import parse_iso, parse_map, parse_ordinal, parse_set, parse_term
from perm_homogeneity.ordinal_sets import IntervalSet
from perm_homogeneity.ordinals import OMEGA, Ordinal
from perm_homogeneity.term_rewriting import (
    KappaNormalizationError,
    cover_term_for,
    format_word,
    kappa_normalize,
    rho_normal_form,
    subsequence_cover,
    term_to_word,
    word_eval,
    word_inverse,
)
from perm_homogeneity.terms import (
    TermBoundError,
    TermContext,
    TermEnumerator,
    escape_search,
    evaluation_path,
    graph_member,
    subterm_closure,
    term_eval,
)

from ..fixture_utils import load_directory_tree, parametrize_fixtures
from ..strategies import finite_permutations

# Load test data once at module level
_test_cases_dir = Path(__file__).parent / "test_cases"
_tree = load_directory_tree(_test_cases_dir)


def _resolve(name: str) -> PartialInjection | None:
    return parse_iso(name) if name.startswith("rho(") else None


_CTX = TermContext(
    {"s": parse_map("0>1,1>0"), "c": FiniteInjection.cycle(1, 2, 3)},
    resolver=_resolve,
)
_X = parse_map("0>5,5>0")


def pytest_generate_tests(metafunc):
    parametrize_fixtures(metafunc, _tree)


def test_fixture(name, test_data):
    """Parameterized test for each fixture."""
    config = test_data["config.yaml"]["parsed"]
    point = parse_ordinal(config["point"])

    if "error" in config:
        with pytest.raises((LookupError, ValueError)) as excinfo:
            term_eval(parse_term(config["term"]), _X, point, _CTX)
        assert str(excinfo.value) == config["error"], (
            f"Test: {name}\nInput: {config['term']!r}\nExpected error: {config['error']!r}\nGot error: {str(excinfo.value)!r}"
        )
        return

    image = term_eval(parse_term(config["term"]), _X, point, _CTX)
    result = None if image is None else str(image)
    assert result == config["expected"], (
        f"Test: {name}\nInput: {config['term']} at {point}\nExpected: {config['expected']!r}\nGot: {result!r}"
    )


def test_term_inverse_reverses_and_inverts():
    t = parse_term("f3.x.f1^-1.x^-1")
    assert str(t.inverse()) == "x.f1.x^-1.f3^-1"
    assert t.inverse().inverse() == t
    assert t.names() == frozenset({"f3", "f1"})
    assert not t.is_function_term


def test_evaluation_path_stops_when_undefined():
    path = evaluation_path(parse_term("s.c"), None, 3, _CTX)
    assert [str(p) for p in path] == ["3", "1", "0"]
    assert len(evaluation_path(parse_term("s.c"), None, 1, _CTX)) == 2


def test_x_without_a_map_is_undefined():
    assert term_eval(parse_term("x"), None, 0, _CTX) is None


def test_subterm_closure():
    closure = subterm_closure([parse_term("a.b")])
    assert {str(t) for t in closure} == {"id", "a", "b", "a.b"}
    with pytest.raises(TermBoundError) as excinfo:
        subterm_closure([parse_term("a.b.c")], bound=2)
    assert str(excinfo.value) == "Term a.b.c has 3 atoms, bound is 2"


def test_escape_search_skips_covered_pairs():
    terms = [parse_term("s")]
    assert escape_search(PairSwap(), terms, None, _CTX) == Ordinal.of(2)
    assert escape_search(PairSwap(), terms, None, _CTX, exclude=[Ordinal.of(2)]) == Ordinal.of(3)
    assert escape_search(PairSwap(), [parse_term("id")], None, _CTX) == Ordinal.of(0)


def test_escape_search_budget():
    with pytest.raises(BudgetExhaustedError) as excinfo:
        escape_search(PairSwap(), [parse_term("s")], None, _CTX, budget=2)
    assert str(excinfo.value) == "No escaping point among 2 candidates at or after 0"


def test_enumeration_orders_by_weight():
    ctx = TermContext({"a": parse_map("0>1"), "b": parse_map("1>0")})
    enumerator = TermEnumerator(ctx)
    assert [str(t) for t in enumerator.prefix(8)] == [
        "id", "x", "x^-1", "x.x", "a", "x.x^-1", "x^-1.x", "x.x.x",
    ]
    no_x = TermEnumerator(ctx, include_x=False)
    assert [str(t) for t in no_x.prefix(6)] == ["id", "a", "a^-1", "b", "b^-1", "a.a"]


def test_term_set_codes():
    enumerator = TermEnumerator(TermContext({"a": parse_map("0>1")}))
    terms = enumerator.term_set(0b101)
    assert {str(t) for t in terms} == {"id", "x^-1"}
    assert enumerator.code_of(terms) == 5


def test_enumeration_of_an_empty_alphabet_ends():
    assert [str(t) for t in TermEnumerator(TermContext(), include_x=False).prefix(5)] == ["id"]


_WORD_CTX = TermContext(
    {"h": parse_map("0>1,1>0"), "g": parse_map("1>2,2>1")},
    {"h": parse_set("[0,2)"), "g": parse_set("[1,3)")},
    OMEGA,
    _resolve,
)


def test_word_eval_extends_by_identity():
    word = term_to_word(parse_term("h"))
    assert word_eval(word, _WORD_CTX, 5) == Ordinal.of(5)
    assert word_eval(word, _WORD_CTX, 0) == Ordinal.of(1)
    assert word_eval(word, _WORD_CTX, OMEGA) is None


def test_cover_term_reproduces_the_word():
    word = term_to_word(parse_term("g.h"))
    assert str(cover_term_for(word, _WORD_CTX, 0)) == "g.h"
    assert str(cover_term_for(word, _WORD_CTX, 2)) == "g"
    assert str(cover_term_for(word, _WORD_CTX, 7)) == "id"
    cover = subsequence_cover(word)
    for alpha in range(5):
        assert cover_term_for(word, _WORD_CTX, alpha) in cover
        assert term_eval(cover_term_for(word, _WORD_CTX, alpha), None, alpha, _WORD_CTX) == word_eval(
            word, _WORD_CTX, alpha
        )


def test_word_helpers():
    word = term_to_word(parse_term("g.h^-1"))
    assert word == (("g", 1), ("h", -1))
    assert format_word(word_inverse(word)) == "h.g^-1"
    with pytest.raises(ValueError, match="cannot mention x"):
        term_to_word(parse_term("x.g"))


def test_rho_normal_form_sandwiches_generators():
    term, ctx = rho_normal_form(parse_term("h"), _WORD_CTX)
    assert str(term) == "rho([0,2);[0,2)).h.rho([0,2);[0,2))"
    for alpha in range(3):
        assert term_eval(term, None, alpha, ctx) == term_eval(parse_term("h"), None, alpha, ctx)


_KAPPA_CTX = TermContext(
    {"h": parse_map("0>1,1>0"), "g": parse_map("2>3,3>2")},
    {"h": parse_set("[0,w)"), "g": parse_set("[0,w)")},
    Ordinal.power(1, 3),
    _resolve,
)


def test_kappa_normalize_fuses_and_restricts():
    term, _ctx = kappa_normalize(
        parse_term("h.rho([0,w*2);[0,w)|[w*2,w*3)).g"), OMEGA, _KAPPA_CTX
    )
    assert str(term) == "h.rho([0,w);[0,w)).g"


def test_kappa_normalize_drops_outer_isos():
    term, _ctx = kappa_normalize(parse_term("rho([0,w*2);[0,w*2)).h"), OMEGA, _KAPPA_CTX)
    assert str(term) == "h"


def test_kappa_normalize_preconditions():
    with pytest.raises(KappaNormalizationError, match="Unexpected indeterminate"):
        kappa_normalize(parse_term("x.h"), OMEGA, _KAPPA_CTX)
    small = _KAPPA_CTX.with_entry("f", parse_map("0>1,1>0"), parse_set("[0,3)"))
    with pytest.raises(KappaNormalizationError) as excinfo:
        kappa_normalize(parse_term("f"), OMEGA, small)
    assert str(excinfo.value) == "Function f does not permute a set containing w"


_ATOMS = ["s", "s^-1", "c", "c^-1", "x", "x^-1"]
_texts = st.lists(st.sampled_from(_ATOMS), min_size=1, max_size=4).map(".".join)


@given(_texts, _texts, st.integers(0, 7))
def test_evaluating_a_concatenation_composes(left, right, alpha):
    inner = term_eval(parse_term(right), _X, alpha, _CTX)
    joined = term_eval(parse_term(f"{left}.{right}"), _X, alpha, _CTX)
    if inner is None:
        assert joined is None
    else:
        assert joined == term_eval(parse_term(left), _X, inner, _CTX)


@settings(max_examples=20)
@given(st.integers(1, 8), st.data())
def test_subsequence_cover_contains_every_word_pair(universe, data):
    ctx = TermContext()
    names = []
    for i in range(data.draw(st.integers(1, 2))):
        p = data.draw(finite_permutations(universe))
        name = f"g{i}"
        ctx = ctx.with_entry(name, p, IntervalSet.points(p.domain()))
        names.append(name)
    letters = [(name, exponent) for name in names for exponent in (1, -1)]
    for length in range(1, 5):
        for word in product(letters, repeat=length):
            cover = subsequence_cover(word)
            for alpha in range(universe):
                image = word_eval(word, ctx, alpha)
                assert image is not None
                assert graph_member(alpha, image, cover, None, ctx), (format_word(word), alpha)
