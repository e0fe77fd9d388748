# Tests for canonical order isomorphisms
# Data-driven tests using config.yaml fixtures, plus composition checks

from pathlib import Path

import pytest
from hypothesis import given

from perm_homogeneity.notation import parse_iso, parse_ordinal, parse_set
from perm_homogeneity.order_iso import OrderIso, OrderIsoError, rho_apply, rho_compose

from ..fixture_utils import load_directory_tree, parametrize_fixtures
from ..strategies import equal_type_interval_sets

# Load test data once at module level
_test_cases_dir = Path(__file__).parent / "test_cases"
_tree = load_directory_tree(_test_cases_dir)


def pytest_generate_tests(metafunc):
    parametrize_fixtures(metafunc, _tree)


def _iso(source: str, target: str) -> OrderIso:
    return parse_iso(f"rho({source};{target})")


def test_fixture(name, test_data):
    """Parameterized test for each fixture."""
    config = test_data["config.yaml"]["parsed"]

    if "error" in config:
        with pytest.raises(OrderIsoError) as excinfo:
            OrderIso(parse_set(config["source"]), parse_set(config["target"]))  # type: ignore[arg-type]
        assert str(excinfo.value) == config["error"], (
            f"Test: {name}\nExpected error: {config['error']!r}\nGot error: {str(excinfo.value)!r}"
        )
        return

    iso = _iso(config["source"], config["target"])
    for point, expected in config["points"].items():
        image = iso.apply(parse_ordinal(point))
        result = None if image is None else str(image)
        assert result == expected, (
            f"Test: {name}\nInput: {iso.name} at {point}\nExpected: {expected!r}\nGot: {result!r}"
        )
        if image is not None:
            assert iso.apply_inverse(image) == parse_ordinal(point)


def test_name_parses_back():
    iso = _iso("[0,w)", "[0,w)%2=0")
    assert iso.name == "rho([0,w);[0,w)%2=0)"
    assert parse_iso(iso.name) == iso


def test_composition_agrees_pointwise():
    rho0 = _iso("[0,w*2)", "[0,w)|[w*2,w*3)")
    rho1 = _iso("[0,w*3)", "[0,w*3)%2=0")
    composed = rho_compose(rho1, rho0)
    assert str(composed.source) == "[0,w*2)"
    for x in composed.source.first(20):
        middle = rho0.apply(x)
        assert middle is not None
        assert composed.apply(x) == rho1.apply(middle)


def test_composition_of_inverse_pair_is_identity():
    rho = _iso("[0,w)", "[0,w)%2=0")
    composed = rho_compose(rho, rho.inverse())
    assert composed.is_identity()
    assert str(composed.source) == "[0,w)%2=0"


def test_composition_needs_an_interval_middle():
    rho0 = _iso("[0,w)", "[0,w)%2=0")
    rho1 = _iso("[0,w)%2=0", "[0,w)%2=0")
    with pytest.raises(OrderIsoError, match="non-interval set"):
        rho_compose(rho1, rho0)


def test_disjoint_composition_is_empty():
    composed = rho_compose(_iso("[w,w*2)", "[w,w*2)"), _iso("[0,w)", "[0,w)"))
    assert composed == OrderIso.empty()


def test_image_of_an_interval():
    rho = _iso("[0,w*2)", "[0,w)|[w*2,w*3)")
    assert str(rho.image(parse_set("[3,w+2)"))) == "[3,w)|[w*2,w*2+2)"  # type: ignore[arg-type]


def test_rho_apply_rejects_outside_points():
    with pytest.raises(OrderIsoError, match="not an element"):
        rho_apply(parse_set("[0,w)%2=0"), parse_set("[0,w)"), 3)  # type: ignore[arg-type]


@given(equal_type_interval_sets(3))
def test_isos_between_equal_types_chain(sets):
    s, t, u = sets
    s_t, t_u, s_u = OrderIso(s, t), OrderIso(t, u), OrderIso(s, u)
    for x in s.first(50):
        middle = s_t.apply(x)
        assert middle is not None and middle in t
        assert t_u.apply(middle) == s_u.apply(x)
        assert s_t.apply_inverse(middle) == x
    assert rho_compose(t_u, s_t) == s_u


@given(equal_type_interval_sets(2), equal_type_interval_sets(2))
def test_composition_matches_pointwise_composition(first, second):
    rho0 = OrderIso(*first)
    rho1 = OrderIso(*second)
    composed = rho_compose(rho1, rho0)
    for x in rho0.source.first(40):
        middle = rho0.apply(x)
        assert middle is not None
        expected = rho1.apply(middle)
        assert composed.apply(x) == expected, f"{composed.name} at {x}"
    for y in composed.target.first(20):
        middle = rho1.apply_inverse(y)
        assert middle is not None
        assert composed.apply_inverse(y) == rho0.apply_inverse(middle)
