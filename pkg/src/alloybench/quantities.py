"""Units, physical quantities and qualified numeric values.

The unit registry is closed: it contains exactly the tokens the wire format
accepts (both spellings where the format uses two) plus a small alias table.
Each dimension converts through one canonical hub unit, so value equality
between different units is a single affine trip each way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from . import ontology


class MalformedValue(ValueError):
    """A value token whose prefix or numeric remainder cannot be parsed."""


class DimensionMismatch(ValueError):
    """Conversion requested between units of different dimensions."""


class UnknownUnit(KeyError):
    """A unit token outside the closed registry."""


class ValueQualifier(Enum):
    """How a paper hedges a number; rendered as a prefix on the value."""

    exact = ""
    approx = "~"
    gt = ">"
    lt = "<"
    ge = ">="
    le = "<="
    much_gt = ">>"
    much_lt = "<<"

    @property
    def prefix(self) -> str:
        return self.value


# Addressable alongside the ontology vocabularies; members are looked up by
# name because their values are operator prefixes.
ontology.ENUM_FAMILIES["ValueQualifier"] = ValueQualifier

# Longest first so ">=" is never read as ">" followed by "=5...".
_PREFIXES = sorted(
    (q for q in ValueQualifier if q.prefix), key=lambda q: -len(q.prefix)
)


@dataclass(frozen=True)
class Unit:
    """A named unit with an affine map into its dimension's canonical unit."""

    name: str
    dimension: str
    scale: float = 1.0
    offset: float = 0.0

    def to_canonical(self, value: float) -> float:
        return value * self.scale + self.offset

    def from_canonical(self, value: float) -> float:
        return (value - self.offset) / self.scale


def _build_registry() -> dict[str, Unit]:
    units = {
        "MegaPascal": Unit("MegaPascal", "pressure", 1.0),
        "GigaPascal": Unit("GigaPascal", "pressure", 1000.0),
        "HV": Unit("HV", "pressure", 9.807),
        "atm": Unit("atm", "pressure", 0.101325),
        "micrometer": Unit("micrometer", "length", 1e-6),
        "nanometer": Unit("nanometer", "length", 1e-9),
        "millimeter": Unit("millimeter", "length", 1e-3),
        "meter": Unit("meter", "length", 1.0),
        "angstrom": Unit("angstrom", "length", 1e-10),
        "gram_per_cm3": Unit("gram_per_cm3", "density", 1.0),
        "percent": Unit("percent", "fraction", 1.0),
        "dimensionless": Unit("dimensionless", "dimensionless", 1.0),
        "celsius": Unit("celsius", "temperature", 1.0, 273.15),
        "kelvin": Unit("kelvin", "temperature", 1.0),
        "second": Unit("second", "time", 1.0),
        "minute": Unit("minute", "time", 60.0),
        "hour": Unit("hour", "time", 3600.0),
        "joule": Unit("joule", "energy", 1.0),
        "MPa*m^0.5": Unit("MPa*m^0.5", "toughness", 1.0),
    }
    aliases = {
        "MPa": "MegaPascal",
        "GPa": "GigaPascal",
        "um": "micrometer",
        "nm": "nanometer",
        "mm": "millimeter",
        "m": "meter",
        "Micrometer": "micrometer",
        "Nanometer": "nanometer",
        "Celsius": "celsius",
        "Kelvin": "kelvin",
        "K": "kelvin",
        "Atm": "atm",
        "s": "second",
        "min": "minute",
        "h": "hour",
        "J": "joule",
        "MPa.m^0.5": "MPa*m^0.5",
    }
    for alias, target in aliases.items():
        units[alias] = units[target]
    return units


UNIT_REGISTRY: dict[str, Unit] = _build_registry()

# Canonical hub per dimension, for reporting and canonical-unit contracts.
CANONICAL_UNITS: dict[str, Unit] = {
    "pressure": UNIT_REGISTRY["MegaPascal"],
    "length": UNIT_REGISTRY["meter"],
    "density": UNIT_REGISTRY["gram_per_cm3"],
    "fraction": UNIT_REGISTRY["percent"],
    "dimensionless": UNIT_REGISTRY["dimensionless"],
    "temperature": UNIT_REGISTRY["kelvin"],
    "time": UNIT_REGISTRY["second"],
    "energy": UNIT_REGISTRY["joule"],
    "toughness": UNIT_REGISTRY["MPa*m^0.5"],
}


def parse_unit(token: str) -> Unit:
    """Resolve a unit token; aliases collapse onto one Unit instance."""
    try:
        return UNIT_REGISTRY[token]
    except KeyError:
        raise UnknownUnit(token) from None


@dataclass(frozen=True)
class Quantity:
    """A plain number with a unit (no hedging qualifier).

    `value` may be a template placeholder string such as "[Temp]" while a
    synthesis group is still unbound; everywhere else it is numeric. `unit`
    is Optional only so an incomplete in-memory object can be flagged by the
    validator; the wire format always requires it.
    """

    value: Union[float, str]
    unit: Optional[Unit]

    def is_placeholder(self) -> bool:
        return isinstance(self.value, str)


@dataclass(frozen=True)
class QualifiedValue:
    qualifier: ValueQualifier
    magnitude: float

    def render(self) -> Union[float, str]:
        """Wire form: a bare number when exact, else prefix + number."""
        if self.qualifier is ValueQualifier.exact:
            return self.magnitude
        return f"{self.qualifier.prefix}{self.magnitude!r}"


def parse_qualified(token: Union[int, float, str]) -> QualifiedValue:
    """Parse a number or prefixed numeric string into a QualifiedValue."""
    if isinstance(token, bool):
        raise MalformedValue(f"not a numeric value: {token!r}")
    if isinstance(token, (int, float)):
        return QualifiedValue(ValueQualifier.exact, float(token))
    if not isinstance(token, str):
        raise MalformedValue(f"not a numeric value: {token!r}")
    text = token.strip()
    qualifier = ValueQualifier.exact
    for candidate in _PREFIXES:
        if text.startswith(candidate.prefix):
            qualifier = candidate
            text = text[len(candidate.prefix) :].strip()
            break
    try:
        magnitude = float(text)
    except ValueError:
        raise MalformedValue(f"malformed value token: {token!r}") from None
    if math.isnan(magnitude) or math.isinf(magnitude):
        raise MalformedValue(f"non-finite value token: {token!r}")
    return QualifiedValue(qualifier, magnitude)


def convert(quantity: Quantity, target: Unit) -> Quantity:
    """Affine conversion within one dimension."""
    if quantity.unit is None or quantity.is_placeholder():
        raise DimensionMismatch("cannot convert an incomplete quantity")
    if quantity.unit.dimension != target.dimension:
        raise DimensionMismatch(
            f"{quantity.unit.name} ({quantity.unit.dimension}) -> "
            f"{target.name} ({target.dimension})"
        )
    return Quantity(target.from_canonical(quantity.unit.to_canonical(quantity.value)), target)


def values_match(
    a: tuple[QualifiedValue, Unit],
    b: tuple[QualifiedValue, Unit],
    rel_tol: float = 1e-6,
) -> bool:
    """Unit-aware magnitude equality; qualifiers intentionally ignored.

    The hedging qualifier is compared elsewhere as its own scored attribute,
    so "~50 HV" and "50 HV" match here. Dimension mismatch is just False.
    """
    (va, ua), (vb, ub) = a, b
    if ua.dimension != ub.dimension:
        return False
    return math.isclose(
        ua.to_canonical(va.magnitude),
        ub.to_canonical(vb.magnitude),
        rel_tol=rel_tol,
        abs_tol=0.0,
    )


def quantities_match(a: Optional[Quantity], b: Optional[Quantity], rel_tol: float = 1e-6) -> bool:
    """Equality for optional quantity attributes (temperature, pressure).

    Absent on both sides counts as equal; absent on one side does not.
    """
    if a is None and b is None:
        return True
    if a is None or b is None:
        return False
    if a.unit is None or b.unit is None or a.is_placeholder() or b.is_placeholder():
        return False
    if a.unit.dimension != b.unit.dimension:
        return False
    return math.isclose(
        a.unit.to_canonical(a.value),
        b.unit.to_canonical(b.value),
        rel_tol=rel_tol,
        abs_tol=0.0,
    )
