import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ladder_eit import (CatalogError, CatalogValidationError,
                        catalog_from_dict, catalog_to_dict, dumps_catalog, load_catalog)


def test_builtin_shifts_and_abundances(sr):
    assert sr[84].components[0].shift_mhz == -270.8
    assert sr[86].components[0].shift_mhz == -124.5
    assert sr[88].components[0].shift_mhz == 0.0
    total_percent = sum(iso.abundance for iso in sr.isotopes) * 100
    assert total_percent == pytest.approx(100.00, abs=1e-9)
    assert [round(iso.abundance * 100, 2) for iso in sr.isotopes] == [0.56, 9.86, 7.00, 82.58]


def test_builtin_87_hyperfine(sr):
    iso = sr[87]
    assert iso.nuclear_spin == Fraction(9, 2)
    by_label = {c.label: c for c in iso.components}
    assert by_label["7/2"].shift_mhz == -9.7
    assert by_label["9/2"].shift_mhz == -68.9
    assert by_label["11/2"].shift_mhz == -51.9
    assert sum(c.relative_strength for c in iso.components) == 1
    assert [c.relative_strength for c in iso.components] == [Fraction(4, 15), Fraction(1, 3), Fraction(2, 5)]


def test_builtin_has_six_lines(sr):
    lines = list(sr.lines())
    assert len(lines) == 6
    assert sum(w for _, _, w in lines) == pytest.approx(1.0, abs=1e-12)
    assert sr.reference_mass_number == 88


def test_round_trip_identity(sr):
    assert load_catalog(dumps_catalog(sr)) == sr
    assert catalog_from_dict(json.loads(dumps_catalog(sr))) == sr


def test_round_trip_through_file(sr, tmp_path):
    path = tmp_path / "sr.json"
    path.write_text(dumps_catalog(sr))
    assert load_catalog(path) == sr


def _single(abundance=1.0, **extra):
    doc = {"reference_mass_number": 40, "transition": "test",
           "isotopes": [{"mass_number": 40, "abundance": abundance,
                         "components": [{"shift_mhz": 0.0}]}]}
    doc["isotopes"][0].update(extra)
    return doc


def test_minimal_single_isotope():
    cat = load_catalog(_single())
    assert cat.mass_numbers == [40]
    assert cat[40].components[0].relative_strength == 1


def test_abundance_sum_breach():
    with pytest.raises(CatalogValidationError):
        load_catalog(_single(abundance=0.90))


def test_abundance_window_edges():
    load_catalog(_single(abundance=0.9975))
    with pytest.raises(CatalogValidationError):
        load_catalog(_single(abundance=0.9965))


def test_percent_abundance_accepted():
    doc = _single()
    del doc["isotopes"][0]["abundance"]
    doc["isotopes"][0]["abundance_percent"] = 100
    assert load_catalog(doc)[40].abundance == pytest.approx(1.0)


def test_strengths_must_sum_to_one():
    doc = _single(nuclear_spin="1/2", components=[
        {"shift_mhz": 0.0, "relative_strength": "1/3"},
        {"shift_mhz": 5.0, "relative_strength": "1/3"}])
    with pytest.raises(CatalogValidationError):
        load_catalog(doc)


def test_rational_strings_parsed():
    doc = _single(nuclear_spin="1/2", components=[
        {"shift_mhz": 0.0, "relative_strength": "1/3"},
        {"shift_mhz": 5.0, "relative_strength": "2/3"}])
    cat = load_catalog(doc)
    assert [c.relative_strength for c in cat[40].components] == [Fraction(1, 3), Fraction(2, 3)]


def test_schema_error_names_field():
    doc = _single()
    del doc["isotopes"][0]["components"][0]["shift_mhz"]
    with pytest.raises(CatalogError) as err:
        load_catalog(doc)
    assert "shift_mhz" in str(err.value)


def test_bad_json_text():
    with pytest.raises(CatalogError):
        load_catalog("{not json")


def test_missing_reference():
    doc = _single()
    doc["reference_mass_number"] = 41
    with pytest.raises(CatalogError):
        load_catalog(doc)


def test_spinless_isotope_needs_single_component():
    doc = _single(components=[{"shift_mhz": 0.0}, {"shift_mhz": 3.0}])
    with pytest.raises(CatalogError):
        load_catalog(doc)


def test_catalog_is_immutable(sr):
    with pytest.raises(AttributeError):
        sr.reference_mass_number = 86


@st.composite
def catalogs(draw):
    n = draw(st.integers(1, 4))
    masses = draw(st.lists(st.integers(1, 250), min_size=n, max_size=n, unique=True))
    raw = draw(st.lists(st.integers(1, 1000), min_size=n, max_size=n))
    total = sum(raw)
    isotopes = []
    for i, (m, r) in enumerate(zip(masses, raw)):
        ab = str(Fraction(r, total))
        if i == 0:
            comps = [{"shift_mhz": 0.0}]
            spin = "0"
        else:
            k = draw(st.integers(1, 3))
            spin = "0" if k == 1 else "3/2"
            parts = draw(st.lists(st.integers(1, 9), min_size=k, max_size=k))
            comps = [{"shift_mhz": draw(st.floats(-500, 500, allow_nan=False)),
                      "relative_strength": str(Fraction(p, sum(parts))),
                      "label": f"F{j}"} for j, p in enumerate(parts)]
        isotopes.append({"mass_number": m, "abundance": float(Fraction(ab)),
                         "nuclear_spin": spin, "components": comps})
    return {"reference_mass_number": masses[0], "transition": "t", "isotopes": isotopes}


@settings(max_examples=60, deadline=None)
@given(catalogs())
def test_round_trip_property(doc):
    cat = load_catalog(doc)
    assert load_catalog(dumps_catalog(cat)) == cat
    assert catalog_from_dict(catalog_to_dict(cat)) == cat
