import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from alloybench.composition import (
    MOLAR_MASS,
    AdditionsExceedBalance,
    Composition,
    EmptyFormula,
    MalformedSubscript,
    NonPositiveFraction,
    NonPositiveWeight,
    UnknownElement,
    balance_composition,
    distance,
    from_atomic_dict,
    from_weight_dict,
    parse_formula,
    with_weight_additions,
)


def assert_fractions(got: Composition, expected: dict, tol=1e-12):
    assert set(got.fractions) == set(expected)
    for element, value in expected.items():
        assert got.fractions[element] == pytest.approx(value, abs=tol)


def test_parse_formula_equiatomic():
    assert_fractions(parse_formula("MgFeNi"), {"Mg": 1 / 3, "Fe": 1 / 3, "Ni": 1 / 3})


def test_parse_formula_decimal_subscript():
    got = parse_formula("Al0.5CoCrFeNi")
    assert got.fractions["Al"] == pytest.approx(0.5 / 4.5, rel=1e-12)
    assert got.fractions["Co"] == pytest.approx(1 / 4.5, rel=1e-12)


def test_parse_formula_quarters():
    assert_fractions(
        parse_formula("Nb0.25Ta0.25Ti0.25Zr0.25"),
        {"Nb": 0.25, "Ta": 0.25, "Ti": 0.25, "Zr": 0.25},
    )


def test_parse_formula_repeated_element_accumulates():
    assert_fractions(parse_formula("FeNiFe"), {"Fe": 2 / 3, "Ni": 1 / 3})


@pytest.mark.parametrize(
    "bad,error",
    [
        ("", EmptyFormula),
        ("   ", EmptyFormula),
        ("Xx2", UnknownElement),
        ("fe", MalformedSubscript),
        ("Fe(Ni)2", MalformedSubscript),
        ("Fe.", MalformedSubscript),
        ("Fe0", MalformedSubscript),
        ("FeNi (at.%)", MalformedSubscript),
    ],
)
def test_parse_formula_rejects(bad, error):
    with pytest.raises(error):
        parse_formula(bad)


def test_constructors_normalize_to_unit_sum():
    for built in [
        parse_formula("Al0.5CoCrFeNi"),
        from_weight_dict({"Ni": 60, "Co": 20, "Cr": 20}),
        balance_composition("Ti", {"Al": 6, "V": 4}),
        with_weight_additions(parse_formula("CoCrFeNi"), parse_formula("WC"), 0.1),
    ]:
        assert math.fsum(built.fractions.values()) == pytest.approx(1.0, abs=1e-9)


def test_from_weight_dict_against_hand_computation():
    weights = {"Ni": 60.0, "Co": 20.0, "Cr": 20.0}
    moles = {e: w / MOLAR_MASS[e] for e, w in weights.items()}
    total = sum(moles.values())
    expected = {e: m / total for e, m in moles.items()}
    assert_fractions(from_weight_dict(weights), expected)


def test_from_weight_dict_single_element():
    assert_fractions(from_weight_dict({"Fe": 100}), {"Fe": 1.0})


def test_from_weight_dict_tungsten_carbon():
    got = from_weight_dict({"W": 50, "C": 50})
    moles_w = 50 / MOLAR_MASS["W"]
    moles_c = 50 / MOLAR_MASS["C"]
    assert got.fractions["W"] == pytest.approx(moles_w / (moles_w + moles_c), rel=1e-12)
    assert got.fractions["C"] == pytest.approx(moles_c / (moles_w + moles_c), rel=1e-12)


@pytest.mark.parametrize("bad", [{"Fe": 0}, {"Fe": -1}, {"Fe": "60"}])
def test_from_weight_dict_rejects_nonpositive(bad):
    with pytest.raises(NonPositiveWeight):
        from_weight_dict(bad)


def test_balance_composition_titanium():
    got = balance_composition("Ti", {"Al": 6, "V": 4})
    assert got.to_weight_dict()["Ti"] == pytest.approx(90.0, rel=1e-12)
    assert_fractions(got, from_weight_dict({"Ti": 90, "Al": 6, "V": 4}).fractions)


def test_balance_composition_empty_additions():
    assert_fractions(balance_composition("Fe", {}), {"Fe": 1.0})


def test_balance_composition_steel():
    got = balance_composition("Fe", {"C": 0.4, "Mn": 1.5})
    assert_fractions(got, from_weight_dict({"Fe": 98.1, "C": 0.4, "Mn": 1.5}).fractions)


def test_balance_composition_overflow():
    with pytest.raises(AdditionsExceedBalance):
        balance_composition("Fe", {"C": 60, "Mn": 41})


def test_weight_additions_tungsten_carbide():
    """One base mole of CoCrFeNi picks up 10 wt% of equiatomic WC."""
    got = with_weight_additions(parse_formula("CoCrFeNi"), parse_formula("WC"), 0.10)
    base_mass = sum(0.25 * MOLAR_MASS[e] for e in ("Co", "Cr", "Fe", "Ni"))
    wc_mass_per_mole = 0.5 * MOLAR_MASS["W"] + 0.5 * MOLAR_MASS["C"]
    moles_each = 0.10 * base_mass * 0.5 / wc_mass_per_mole
    per_base_mole = moles_each / 0.25
    assert got.fractions["W"] / got.fractions["Co"] == pytest.approx(per_base_mole, rel=1e-12)
    assert round(got.fractions["W"] / got.fractions["Co"], 2) == 0.12
    assert got.fractions["C"] / got.fractions["Ni"] == pytest.approx(per_base_mole, rel=1e-12)


def test_weight_additions_refractory_example():
    base = parse_formula("NbTaTiZr")
    additions = from_weight_dict({"Mo": 50, "W": 50})
    got = with_weight_additions(base, additions, 0.05)
    # independent recomputation from molar masses
    base_mass = sum(0.25 * MOLAR_MASS[e] for e in ("Nb", "Ta", "Ti", "Zr"))
    additive_mass = 0.05 * base_mass
    moles = {e: 0.25 for e in ("Nb", "Ta", "Ti", "Zr")}
    for e, f in additions.fractions.items():
        recipe_mass = sum(fr * MOLAR_MASS[el] for el, fr in additions.fractions.items())
        moles[e] = moles.get(e, 0.0) + additive_mass * f / recipe_mass
    total = sum(moles.values())
    assert_fractions(got, {e: m / total for e, m in moles.items()})


def test_weight_additions_zero_limit():
    base = parse_formula("CoCrFeNi")
    got = with_weight_additions(base, parse_formula("WC"), 1e-9)
    for element, fraction in base.fractions.items():
        assert abs(got.fractions[element] - fraction) < 1e-8


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 5.0])
def test_weight_additions_fraction_domain(bad):
    with pytest.raises(NonPositiveFraction):
        with_weight_additions(parse_formula("CoCrFeNi"), parse_formula("WC"), bad)


def test_weight_additions_monotone_in_fraction():
    base = parse_formula("CoCrFeNi")
    additions = parse_formula("WC")
    previous = 0.0
    for frac in (0.01, 0.05, 0.1, 0.2, 0.4):
        got = with_weight_additions(base, additions, frac)
        assert got.fractions["W"] > previous
        previous = got.fractions["W"]


def test_weight_round_trip():
    original = {"Ni": 60.0, "Co": 20.0, "Cr": 20.0}
    back = from_weight_dict(original).to_weight_dict()
    for element, weight in original.items():
        assert back[element] == pytest.approx(weight, abs=1e-9)


def test_distance_examples():
    base = parse_formula("CoCrFeNi")
    assert distance(base, base) == 0.0
    five = from_atomic_dict({"Fe": 24.1, "Co": 24.1, "Cr": 24.1, "Ni": 24.1, "Mo": 3.6})
    assert distance(base, five) == pytest.approx(0.036, abs=1e-12)
    assert distance(parse_formula("Fe"), parse_formula("Ni")) == 1.0


def _random_composition(rng: random.Random) -> Composition:
    elements = rng.sample(sorted(MOLAR_MASS), rng.randint(1, 6))
    amounts = {e: rng.uniform(0.05, 10.0) for e in elements}
    total = sum(amounts.values())
    return Composition({e: a / total for e, a in amounts.items()})


def test_distance_is_a_metric_on_random_triples():
    rng = random.Random(7)
    for _ in range(300):
        a, b, c = (_random_composition(rng) for _ in range(3))
        assert distance(a, b) == distance(b, a)
        assert distance(a, a) == 0.0
        assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12
        if a.fractions != b.fractions:
            assert distance(a, b) > 0.0


@given(st.integers(min_value=0, max_value=10**6))
def test_atomic_dict_keeps_declared_total(seed):
    rng = random.Random(seed)
    elements = rng.sample(sorted(MOLAR_MASS), 3)
    percents = {e: rng.uniform(1, 60) for e in elements}
    got = from_atomic_dict(percents)
    assert got.declared_total == pytest.approx(sum(percents.values()))
    assert math.fsum(got.fractions.values()) == pytest.approx(1.0, abs=1e-9)


def test_unknown_element_rejected_everywhere():
    with pytest.raises(UnknownElement):
        from_weight_dict({"Qq": 50, "Fe": 50})
    with pytest.raises(UnknownElement):
        balance_composition("Qq", {"Fe": 10})
    with pytest.raises(UnknownElement):
        from_atomic_dict({"Zz": 100})
