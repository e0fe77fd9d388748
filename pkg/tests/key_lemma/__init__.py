# Tests for pair catalogs, the f maps with f[B] = K and their words

import json
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perm_homogeneity.injections import PairSwap
from perm_homogeneity.key_lemma import (
    CatalogError,
    KeyLemmaConstruction,
    KeyLemmaError,
    PairCatalog,
    even_naturals,
    load_pair_catalog,
    pair_catalog,
)
from perm_homogeneity.notation import parse_ordinal, parse_set, parse_term
from perm_homogeneity.ordinals import OMEGA
from perm_homogeneity.term_rewriting import word_eval
from perm_homogeneity.terms import term_eval

_ODDS = parse_set("[0,w)%2=1")


def _odd_catalog() -> PairCatalog:
    return pair_catalog(OMEGA, seeds=[(parse_set("[0,w)"), _ODDS)])


@pytest.fixture(scope="module")
def construction():
    built = KeyLemmaConstruction(_odd_catalog(), tasks=6, prefix=20)
    built.build()
    return built


def test_default_k_is_the_even_naturals():
    assert str(even_naturals()) == "[0,w)%2=0"


def test_request_normalizes_a():
    catalog = PairCatalog(parse_ordinal("w^2"))
    pair = catalog.request(parse_set("[w,w*2)"), _ODDS)
    assert pair.name == "f0"
    assert str(pair.a) == "[0,w*2)"
    assert len(catalog) == 1


@pytest.mark.parametrize(
    "a,b,message",
    [
        ("[0,w)", "[0,w)", "A - B is finite for A=[0,w), B=[0,w)"),
        ("[w,w+3)", "[0,w)%2=1", "A=[0,w+3) is not below w"),
    ],
)
def test_request_rejects(a, b, message):
    with pytest.raises(CatalogError, match=re.escape(message)):
        PairCatalog(OMEGA).request(parse_set(a), parse_set(b))


def test_kappa_must_fit_the_ambient_ordinal():
    with pytest.raises(CatalogError, match=re.escape("kappa=w*2 exceeds the ambient ordinal w")):
        PairCatalog(OMEGA, parse_ordinal("w*2"))


def test_admit_reuses_existing_pair():
    catalog = PairCatalog(OMEGA)
    first = catalog.admit(parse_set("[0,w)%3=0"))
    again = catalog.admit(parse_set("[0,w)%3=0"))
    assert first is again
    assert str(first.a) == "[0,w)"
    assert len(catalog) == 1


def test_admit_rejects_sets_outside_or_cofinite():
    catalog = PairCatalog(parse_ordinal("w^2"))
    with pytest.raises(CatalogError, match=re.escape("[w,w*2) is not inside [0,w)")):
        catalog.admit(parse_set("[w,w*2)"))
    with pytest.raises(CatalogError, match=re.escape("is not infinite and coinfinite in [0,w)")):
        catalog.admit(parse_set("[0,w)"))


def test_find_containing():
    catalog = _odd_catalog()
    assert catalog.find_containing(parse_set("[0,w)%4=1")) is catalog.pairs[0]
    assert catalog.find_containing(parse_set("[0,w)%4=2")) is None
    assert catalog.find_exact(parse_set("[0,w)%2=1")) is catalog.pairs[0]


def test_catalog_file_round_trip(tmp_path):
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps(_odd_catalog().to_file().to_dict()), encoding="utf-8")
    loaded = load_pair_catalog(path, OMEGA)
    assert loaded.to_file().to_dict() == {"pairs": [["[0,w)", "[0,w)%2=1"]], "kappa": "w"}


def test_catalog_file_rows_are_pairs(tmp_path):
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps({"pairs": [["[0,w)"]]}), encoding="utf-8")
    with pytest.raises(CatalogError) as excinfo:
        load_pair_catalog(path, OMEGA)
    assert str(excinfo.value) == "Catalog rows are [A, B], got ['[0,w)']"


def test_build_reports_each_pair(construction):
    report = construction.report
    assert report.passed
    assert [p.name for p in report.pairs][0] == "f0"
    first = report.pairs[0]
    assert first.split_holds
    assert first.witnesses >= 6
    assert first.certificate_problems == []
    assert report.k == "[0,w)%2=0"


def test_homog_word_for_a_catalog_set(construction):
    assert construction.homog_word(_ODDS) == (("f0", 1),)


def test_homog_word_through_an_admitted_pair(construction):
    x = parse_set("[0,w)%4=1")
    word = construction.homog_word(x)
    assert word == (("f1", 1), ("f0", 1))
    assert construction.word_problems(word, x, 10) == []
    assert construction.report.pairs[1].split_holds


def test_homog_word_needs_a_host():
    small = KeyLemmaConstruction(_odd_catalog(), tasks=2, prefix=5)
    with pytest.raises(KeyLemmaError) as excinfo:
        small.homog_word(parse_set("[0,w)%2=0"))
    assert str(excinfo.value) == "[0,w)%2=0 is not inside any B of the catalog"


def test_intransitive_certificate(construction):
    certificate = construction.intransitive_cert((("f0", 1),))
    assert certificate.word == "f0"
    assert certificate.cover == ["id", "f0"]
    assert certificate.rewrites[1].normal == "f0"
    point, image = parse_ordinal(certificate.point), parse_ordinal(certificate.image)
    assert PairSwap().apply(point) == image
    assert construction.maps["f0"].apply(point) != image


def test_snapshots_cover_every_built_pair(construction):
    snapshots = {s.id: s for s in construction.snapshots()}
    assert "keylemma" in snapshots
    assert snapshots["keylemma"].x is None
    assert snapshots["f0"].x is not None
    assert snapshots["f0"].z == "[0,w)"
    assert "f0" in snapshots["keylemma"].maps


@pytest.fixture(scope="module")
def two_pairs():
    catalog = pair_catalog(
        parse_ordinal("w*3"),
        seeds=[
            (parse_set("[0,w*2)"), _ODDS),
            (parse_set("[0,w)|[w*2,w*3)"), parse_set("[0,w)%2=1|[w*2,w*3)")),
        ],
    )
    built = KeyLemmaConstruction(catalog, tasks=4, prefix=20)
    built.build()
    return built


def test_two_pair_catalog_builds(two_pairs):
    report = two_pairs.report
    assert [p.name for p in report.pairs][:2] == ["f0", "f1"]
    assert [p.a for p in report.pairs][:2] == ["[0,w*2)", "[0,w)|[w*2,w*3)"]
    assert report.passed


def test_certificate_fuses_isos_between_carriers(two_pairs):
    certificate = two_pairs.intransitive_cert((("f1", 1), ("f0", 1)))
    assert certificate.cover == ["id", "f0", "f1", "f1.f0"]
    normals = {step.term: step.normal for step in certificate.rewrites}
    assert normals["f1.f0"] == "f1.rho([0,w);[0,w)).f0"
    point, image = parse_ordinal(certificate.point), parse_ordinal(certificate.image)
    assert PairSwap().apply(point) == image


@settings(max_examples=15)
@given(st.lists(st.tuples(st.sampled_from(["f0", "f1"]), st.sampled_from([1, -1])), min_size=1, max_size=4))
def test_random_words_miss_a_y_pair(two_pairs, word):
    word = tuple(word)
    certificate = two_pairs.intransitive_cert(word)
    point, image = parse_ordinal(certificate.point), parse_ordinal(certificate.image)
    assert PairSwap().apply(point) == image
    assert word_eval(word, two_pairs.ctx, point) != image
    for text in certificate.cover:
        assert term_eval(parse_term(text), None, point, two_pairs.ctx) != image, text


def test_homog_word_from_the_upper_block(two_pairs):
    x = parse_set("[w*2,w*3)")
    word = two_pairs.homog_word(x)
    assert word == (("f2", 1), ("f1", 1))
    assert two_pairs.word_problems(word, x, 10) == []
