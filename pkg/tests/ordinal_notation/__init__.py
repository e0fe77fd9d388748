# Tests for ordinal arithmetic and its textual notation
# Data-driven tests using config.yaml fixture directories, plus algebraic laws

from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from perm_homogeneity.notation import (
    NotationParseError,
    evaluate_ordinal_op,
    parse_ordinal,
)
from perm_homogeneity.ordinals import (
    ZERO,
    Ordinal,
    OrdinalArithmeticError,
    ord_add,
    ord_left_sub,
)

from ..fixture_utils import load_directory_tree, parametrize_fixtures

# Load test data once at module level
_test_cases_dir = Path(__file__).parent / "test_cases"
_tree = load_directory_tree(_test_cases_dir)


def pytest_generate_tests(metafunc):
    parametrize_fixtures(metafunc, _tree)


def test_fixture(name, test_data):
    """Parameterized test for each fixture."""
    config = test_data["config.yaml"]["parsed"]
    op, args = config["op"], config["args"]

    if "error" in config:
        with pytest.raises((NotationParseError, OrdinalArithmeticError)) as excinfo:
            evaluate_ordinal_op(op, args)
        assert str(excinfo.value) == config["error"], (
            f"Test: {name}\nInput: {op} {args!r}\nExpected error: {config['error']!r}\nGot error: {str(excinfo.value)!r}"
        )
        return

    result = evaluate_ordinal_op(op, args)
    assert result == config["expected"], (
        f"Test: {name}\nInput: {op} {args!r}\nExpected: {config['expected']!r}\nGot: {result!r}"
    )


# Cantor normal forms with exponents below 4 and small coefficients
ordinals = st.lists(
    st.tuples(st.integers(0, 3), st.integers(1, 4)), max_size=4
).map(lambda raw: Ordinal(tuple(sorted(dict(raw).items(), reverse=True))))


@given(ordinals, ordinals, ordinals)
def test_addition_is_associative(a, b, c):
    assert ord_add(ord_add(a, b), c) == ord_add(a, ord_add(b, c))


@given(ordinals, ordinals)
def test_addition_is_monotone_on_the_right(a, b):
    assert a <= ord_add(a, b)
    assert b <= ord_add(a, b)


@given(ordinals, ordinals)
def test_left_subtraction_inverts_addition(a, b):
    low, high = min(a, b), max(a, b)
    assert ord_add(low, ord_left_sub(low, high)) == high
    assert ord_left_sub(a, ord_add(a, b)) == b


@given(ordinals)
def test_printed_form_parses_back(a):
    assert parse_ordinal(str(a)) == a


@given(ordinals)
def test_zero_is_neutral(a):
    assert ord_add(ZERO, a) == a
    assert ord_add(a, ZERO) == a


def test_height_counts_coefficients_and_leading_exponent():
    assert parse_ordinal("w^2*3+w+5").height == 11
    assert parse_ordinal("w").height == 2
    assert ZERO.height == 0


def test_limit_and_finite_parts():
    value = parse_ordinal("w^2+w*2+7")
    assert value.finite_part == 7
    assert str(value.limit_part) == "w^2+w*2"
    assert not value.is_limit
    assert value.limit_part.is_limit


def test_invalid_normal_form_rejected():
    with pytest.raises(OrdinalArithmeticError):
        Ordinal(((1, 1), (2, 1)))
