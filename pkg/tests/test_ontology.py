import pytest

from alloybench import ontology
from alloybench.ontology import (
    AlloyMeasurementKind,
    ConfigTag,
    CrysStruct,
    MeasurementMethod,
    MeasurementStatistic,
    PhaseMeasurementKind,
    ProcessKind,
    RawMaterialKind,
    UnknownMember,
    normalize,
    parse_enum,
    render_enum,
)

EXACT_SIZES = {
    AlloyMeasurementKind: 32,
    PhaseMeasurementKind: 4,
    ProcessKind: 38,
    CrysStruct: 18,
    ConfigTag: 20,
    RawMaterialKind: 5,
    MeasurementMethod: 27,
    MeasurementStatistic: 5,
}


@pytest.mark.parametrize("enum_cls,size", EXACT_SIZES.items())
def test_vocabulary_sizes_are_pinned(enum_cls, size):
    assert len(enum_cls) == size


def test_parse_enum_examples():
    assert parse_enum("ProcessKind", "ArcMelting") is ProcessKind.ArcMelting
    assert parse_enum("CrysStruct", "FCC") is CrysStruct.FCC
    with pytest.raises(UnknownMember):
        parse_enum("AlloyMeasurementKind", "hardness")


def test_parse_enum_is_case_sensitive():
    with pytest.raises(UnknownMember):
        parse_enum("ProcessKind", "arcmelting")
    with pytest.raises(UnknownMember):
        parse_enum("CrysStruct", "fcc")


def test_parse_enum_unknown_family():
    with pytest.raises(UnknownMember):
        parse_enum("NoSuchFamily", "FCC")


@pytest.mark.parametrize("family,enum_cls", sorted(ontology.ENUM_FAMILIES.items()))
def test_round_trip_every_member(family, enum_cls):
    for member in enum_cls:
        token = member.name if family == "ValueQualifier" else render_enum(member)
        assert parse_enum(family, token) is member


def test_melting_and_casting_subsets():
    melting = {k for k in ProcessKind if k.is_melting}
    casting = {k for k in ProcessKind if k.is_casting}
    assert melting == {ProcessKind.ArcMelting, ProcessKind.InductionMelting}
    assert casting == {
        ProcessKind.CastingUnspecified,
        ProcessKind.AsCast,
        ProcessKind.GravityCasting,
        ProcessKind.DropCasting,
        ProcessKind.SuctionCasting,
        ProcessKind.DirectionalSolidification,
    }
    assert not melting & casting


def test_normalize_returns_value_unchanged():
    member, record = normalize(
        AlloyMeasurementKind.yield_strength_compression, "Yield Strength"
    )
    assert member is AlloyMeasurementKind.yield_strength_compression
    assert record.paper_term == "Yield Strength"
    assert record.redundant is False
    assert record.source is None


def test_normalize_vacuum_arc_melting():
    member, record = normalize(ProcessKind.ArcMelting, "Vacuum Arc Melting", source="methods")
    assert member is ProcessKind.ArcMelting
    assert record.source == "methods"
    assert not record.redundant


def test_normalize_flags_redundant_identity():
    member, record = normalize(CrysStruct.FCC, "FCC")
    assert member is CrysStruct.FCC
    assert record.redundant is True


def test_rendering_is_stable():
    assert render_enum(ProcessKind.SparkPlasmaSintering) == "SparkPlasmaSintering"
    assert str(AlloyMeasurementKind.vickers_hardness) == "vickers_hardness"
