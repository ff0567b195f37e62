"""Closed categorical vocabularies for alloy experiment records.

Every categorical field in an extraction document draws from one of the
enumerations below. Membership is closed and matching is case-sensitive:
fuzzy mapping of paper terminology onto these canonical values is the
extractor's job, recorded through :func:`normalize`, never guessed here.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional


class UnknownMember(ValueError):
    """Raised when a token is not a member of the requested enum family."""

    def __init__(self, family: str, token: str):
        super().__init__(f"{token!r} is not a member of {family}")
        self.family = family
        self.token = token


class _Canonical(str, Enum):
    """Base for canonical-value enums: value equals the member name."""

    def __str__(self) -> str:  # stable rendering used by the wire format
        return self.value


class AlloyMeasurementKind(_Canonical):
    vickers_hardness = "vickers_hardness"
    berkovich_hardness = "berkovich_hardness"
    pugh_ductility_ratio = "pugh_ductility_ratio"
    density = "density"
    yield_strength_tension = "yield_strength_tension"
    ultimate_strain_tension = "ultimate_strain_tension"
    ultimate_tensile_strength = "ultimate_tensile_strength"
    fracture_strain_tension = "fracture_strain_tension"
    fracture_strength_tension = "fracture_strength_tension"
    strain_hardening_exponent_tension = "strain_hardening_exponent_tension"
    poissons_ratio_tension = "poissons_ratio_tension"
    fracture_energy_tension = "fracture_energy_tension"
    true_stress_tension = "true_stress_tension"
    yield_strength_compression = "yield_strength_compression"
    ultimate_strain_compression = "ultimate_strain_compression"
    ultimate_compressive_strength = "ultimate_compressive_strength"
    fracture_strain_compression = "fracture_strain_compression"
    fracture_strength_compression = "fracture_strength_compression"
    strain_hardening_exponent_compression = "strain_hardening_exponent_compression"
    poissons_ratio_compression = "poissons_ratio_compression"
    fracture_energy_compression = "fracture_energy_compression"
    true_stress_compression = "true_stress_compression"
    elastic_limit_compression = "elastic_limit_compression"
    elastic_limit_tension = "elastic_limit_tension"
    youngs_modulus = "youngs_modulus"
    fracture_toughness = "fracture_toughness"
    work_of_fracture = "work_of_fracture"
    crystallite_size = "crystallite_size"
    lattice_strain = "lattice_strain"
    melting_point = "melting_point"
    solidus = "solidus"
    liquidus = "liquidus"


class PhaseMeasurementKind(_Canonical):
    volume_fraction = "volume_fraction"
    length = "length"
    grain_size = "grain_size"
    phase_size = "phase_size"


class ProcessKind(_Canonical):
    Mixing = "Mixing"
    MechanicalAlloying = "MechanicalAlloying"
    PlanetaryMilling = "PlanetaryMilling"
    GasAtomization = "GasAtomization"
    ArcMelting = "ArcMelting"
    InductionMelting = "InductionMelting"
    CastingUnspecified = "CastingUnspecified"
    AsCast = "AsCast"
    GravityCasting = "GravityCasting"
    DropCasting = "DropCasting"
    SuctionCasting = "SuctionCasting"
    DirectionalSolidification = "DirectionalSolidification"
    SparkPlasmaSintering = "SparkPlasmaSintering"
    HotPressingSintering = "HotPressingSintering"
    VacuumFurnace = "VacuumFurnace"
    Homogenization = "Homogenization"
    Annealing = "Annealing"
    NonIsothermalAnnealing = "NonIsothermalAnnealing"
    IsothermalHolding = "IsothermalHolding"
    WaterQuenching = "WaterQuenching"
    SolutionHeatTreatment = "SolutionHeatTreatment"
    HotExtrusion = "HotExtrusion"
    HotRolling = "HotRolling"
    ColdRolling = "ColdRolling"
    CrossRolling = "CrossRolling"
    ColdForging = "ColdForging"
    Press = "Press"
    FrictionStirProcessing = "FrictionStirProcessing"
    ElectricalDischargeMachining = "ElectricalDischargeMachining"
    Cut = "Cut"
    Grinding = "Grinding"
    Polishing = "Polishing"
    Etching = "Etching"
    AquaRegia = "AquaRegia"
    SandBlasting = "SandBlasting"
    Degreased = "Degreased"
    UltrasonicBath = "UltrasonicBath"
    AirDrying = "AirDrying"

    @property
    def is_melting(self) -> bool:
        return self in _MELTING

    @property
    def is_casting(self) -> bool:
        return self in _CASTING


_MELTING = frozenset({ProcessKind.ArcMelting, ProcessKind.InductionMelting})
_CASTING = frozenset(
    {
        ProcessKind.CastingUnspecified,
        ProcessKind.AsCast,
        ProcessKind.GravityCasting,
        ProcessKind.DropCasting,
        ProcessKind.SuctionCasting,
        ProcessKind.DirectionalSolidification,
    }
)


class CrysStruct(_Canonical):
    FCC = "FCC"
    BCC = "BCC"
    HCP = "HCP"
    DHCP = "DHCP"
    Diamond = "Diamond"
    L12 = "L12"
    L10 = "L10"
    B2 = "B2"
    D019 = "D019"
    D03 = "D03"
    Heusler = "Heusler"
    Rocksalt = "Rocksalt"
    Zincblende = "Zincblende"
    C14 = "C14"
    C15 = "C15"
    Perovskite = "Perovskite"
    Amorphous = "Amorphous"
    Unknown = "Unknown"


class ConfigTag(_Canonical):
    Dendrite = "Dendrite"
    Interdendritic = "Interdendritic"
    Equiaxed = "Equiaxed"
    Columnar = "Columnar"
    Eutectic = "Eutectic"
    Coring = "Coring"
    Lath = "Lath"
    Martensite = "Martensite"
    Acicular = "Acicular"
    Lamellar = "Lamellar"
    Widmanstatten = "Widmanstatten"
    Matrix = "Matrix"
    Precipitate = "Precipitate"
    Intragranular = "Intragranular"
    Intergranular = "Intergranular"
    Segregation = "Segregation"
    Twin = "Twin"
    Subgrain = "Subgrain"
    Structure = "Structure"
    Unknown = "Unknown"


class RawMaterialKind(_Canonical):
    Ingot = "Ingot"
    Powder = "Powder"
    Plate = "Plate"
    Unspecified = "Unspecified"
    Other = "Other"


class MeasurementMethod(_Canonical):
    XRD = "XRD"
    DSC = "DSC"
    TensileTest = "TensileTest"
    CompressionTest = "CompressionTest"
    VickersHardnessTest = "VickersHardnessTest"
    NanoindentTest = "NanoindentTest"
    ArchimedesMethod = "ArchimedesMethod"
    OpticalMicroscope = "OpticalMicroscope"
    SEM = "SEM"
    TEM = "TEM"
    STEM = "STEM"
    EBSD = "EBSD"
    UniversalTestingMachine = "UniversalTestingMachine"
    ResonanceUltrasoundSpectroscopy = "ResonanceUltrasoundSpectroscopy"
    FractureToughnessTest = "FractureToughnessTest"
    Balance = "Balance"
    EDS = "EDS"
    TEM_EDS = "TEM_EDS"
    WDS = "WDS"
    EPMA = "EPMA"
    LIBS = "LIBS"
    ED_XRF = "ED_XRF"
    WD_XRF = "WD_XRF"
    Spark_OES = "Spark_OES"
    ICP_OES = "ICP_OES"
    ICP_MS = "ICP_MS"
    Unspecified = "Unspecified"


class MeasurementStatistic(_Canonical):
    mean = "mean"
    median = "median"
    lower = "lower"
    upper = "upper"
    percentile = "percentile"


# Families addressable by name through parse_enum. ValueQualifier lives in
# the quantities module (its members render as value prefixes, not names)
# and registers itself here on import.
ENUM_FAMILIES: dict[str, type[Enum]] = {
    "AlloyMeasurementKind": AlloyMeasurementKind,
    "PhaseMeasurementKind": PhaseMeasurementKind,
    "ProcessKind": ProcessKind,
    "CrysStruct": CrysStruct,
    "ConfigTag": ConfigTag,
    "RawMaterialKind": RawMaterialKind,
    "MeasurementMethod": MeasurementMethod,
    "MeasurementStatistic": MeasurementStatistic,
}


def parse_enum(family: str, token: str) -> Enum:
    """Look up `token` in the named enum family; exact, case-sensitive.

    Raises UnknownMember for unknown families as well as unknown tokens, so
    callers have a single failure mode for "not a canonical value".
    """
    enum_cls = ENUM_FAMILIES.get(family)
    if enum_cls is None:
        raise UnknownMember(family, token)
    try:
        return enum_cls(token)
    except ValueError:
        pass
    # families whose values are not their names (qualifier prefixes) match by name
    try:
        return enum_cls[token]
    except KeyError:
        raise UnknownMember(family, token) from None


def render_enum(member: Enum) -> str:
    """Stable string form of a canonical value (inverse of parse_enum)."""
    return str(member.value)


@dataclass(frozen=True)
class NormalizationRecord:
    """Audit entry mapping a paper's own wording to a canonical value."""

    canonical_value: Enum
    paper_term: str
    source: Optional[str] = None
    redundant: bool = False


def normalize(
    canonical, paper_term: str, source: Optional[str] = None
) -> tuple[Enum, NormalizationRecord]:
    """Record that `paper_term` was mapped onto `canonical`.

    Returns the canonical member unchanged together with the audit record.
    A mapping whose paper term already equals the canonical rendering is
    legal but flagged redundant, since it documents nothing.
    """
    record = NormalizationRecord(
        canonical_value=canonical,
        paper_term=paper_term,
        source=source,
        redundant=(paper_term == render_enum(canonical)),
    )
    return canonical, record
