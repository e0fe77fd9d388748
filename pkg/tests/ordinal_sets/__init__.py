# Tests for exact ordinal sets
# Data-driven tests using config.yaml fixtures, plus set algebra against pointwise membership

from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from perm_homogeneity.errors import BudgetExhaustedError
from perm_homogeneity.notation import parse_ordinal, parse_set
from perm_homogeneity.ordinal_sets import (
    IntervalSet,
    PredicateSet,
    Residues,
    ResidueSet,
)
from perm_homogeneity.ordinals import Ordinal

from ..fixture_utils import load_directory_tree, parametrize_fixtures

# Load test data once at module level
_test_cases_dir = Path(__file__).parent / "test_cases"
_tree = load_directory_tree(_test_cases_dir)

_BINARY_OPS = {
    "union": ResidueSet.union,
    "intersection": ResidueSet.intersection,
    "difference": ResidueSet.difference,
    "symmetric_difference": ResidueSet.symmetric_difference,
}


def pytest_generate_tests(metafunc):
    parametrize_fixtures(metafunc, _tree)


def _run(config) -> str:
    op = config["op"]
    sets = [parse_set(text) for text in config["args"]]
    if op in _BINARY_OPS:
        return str(_BINARY_OPS[op](*sets))
    (s,) = sets
    assert isinstance(s, ResidueSet)
    if op == "norm":
        return str(s)
    if op == "order_type":
        return str(s.order_type())
    if op == "element_at":
        return str(s.element_at(parse_ordinal(config["position"])))
    if op == "position_of":
        return str(s.position_of(parse_ordinal(config["position"])))
    if op == "first":
        return " ".join(str(x) for x in s.first(config["count"]))
    raise ValueError(f"Unknown op {op}")


def test_fixture(name, test_data):
    """Parameterized test for each fixture."""
    config = test_data["config.yaml"]["parsed"]

    if "error" in config:
        with pytest.raises(ValueError) as excinfo:
            _run(config)
        assert str(excinfo.value) == config["error"], (
            f"Test: {name}\nInput: {config['args']!r}\nExpected error: {config['error']!r}\nGot error: {str(excinfo.value)!r}"
        )
        return

    result = _run(config)
    assert result == config["expected"], (
        f"Test: {name}\nInput: {config['args']!r}\nExpected: {config['expected']!r}\nGot: {result!r}"
    )


_LIMITS = [Ordinal(), Ordinal.power(1), Ordinal.power(1, 2)]
_SAMPLE = [limit + n for limit in _LIMITS for n in range(30)]


@st.composite
def pieces(draw):
    limit = draw(st.sampled_from(_LIMITS))
    lo = limit + draw(st.integers(0, 5))
    if draw(st.booleans()):
        modulus = draw(st.integers(1, 4))
        classes = draw(st.sets(st.integers(0, modulus - 1)))
        return (lo, limit + Ordinal.power(1), Residues.of(modulus, classes))
    return (lo, lo + draw(st.integers(1, 15)), Residues.all())


residue_sets = st.lists(pieces(), max_size=4).map(ResidueSet.from_pieces)


@given(residue_sets, residue_sets)
def test_operations_match_pointwise_membership(a, b):
    union = ResidueSet.union(a, b)
    meet = ResidueSet.intersection(a, b)
    minus = ResidueSet.difference(a, b)
    sym = ResidueSet.symmetric_difference(a, b)
    for x in _SAMPLE:
        assert (x in union) == (x in a or x in b)
        assert (x in meet) == (x in a and x in b)
        assert (x in minus) == (x in a and x not in b)
        assert (x in sym) == ((x in a) != (x in b))


@given(residue_sets)
def test_positions_are_increasing_and_invertible(s):
    members = [x for x in _SAMPLE if x in s]
    positions = [s.position_of(x) for x in members]
    assert positions == sorted(positions)
    assert len(set(positions)) == len(positions)
    for x, p in zip(members, positions, strict=True):
        assert s.element_at(p) == x


@given(residue_sets)
def test_printed_form_parses_to_the_same_set(s):
    assert parse_set(str(s)) == s


@given(residue_sets, residue_sets)
def test_subset_is_exact(a, b):
    meet = ResidueSet.intersection(a, b)
    assert meet.issubset(a)
    assert meet.issubset(b)


def test_residue_free_results_are_interval_sets():
    result = ResidueSet.union(parse_set("[0,w)%2=0"), parse_set("[0,w)%2=1"))
    assert isinstance(result, IntervalSet)
    assert result == IntervalSet.initial(Ordinal.power(1))


def test_points_merge_into_intervals():
    assert IntervalSet.points([0, 1, 2, 5]).intervals == (
        (Ordinal.of(0), Ordinal.of(3)),
        (Ordinal.of(5), Ordinal.of(6)),
    )


def test_sparse_predicate_set_exhausts_its_budget():
    carrier = IntervalSet.initial(Ordinal.power(1))
    nothing = PredicateSet(carrier, lambda _x: False, "nothing", search_budget=50)
    with pytest.raises(BudgetExhaustedError):
        nothing.first(1)
    assert not nothing.is_infinite(horizon=5)


def test_predicate_set_filters_canonical_order():
    carrier = parse_set("[0,w*2)")
    evens = PredicateSet(carrier, lambda x: x.finite_part % 2 == 0, "evens")
    assert [str(x) for x in evens.first(4)] == ["0", "2", "w", "4"]
