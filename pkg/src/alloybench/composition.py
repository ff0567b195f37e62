"""Chemical composition algebra on the atomic-fraction simplex.

A Composition is a normalized element -> atomic-fraction map. Constructors
cover the four input styles extraction documents use: a plain formula, a
weight-percent dictionary, balance notation (main element fills to 100 wt%),
and mass-fraction additions on top of a base alloy. The molar-mass table is
pinned here as data so derived values stay reproducible.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Optional


class CompositionError(ValueError):
    pass


class UnknownElement(CompositionError):
    pass


class EmptyFormula(CompositionError):
    pass


class MalformedSubscript(CompositionError):
    pass


class NonPositiveWeight(CompositionError):
    pass


class AdditionsExceedBalance(CompositionError):
    pass


class NonPositiveFraction(CompositionError):
    pass


# Standard atomic weights (abridged), pinned. Tc and Pm use the conventional
# mass numbers of their longest-lived isotopes.
MOLAR_MASS: dict[str, float] = {
    "H": 1.008, "He": 4.0026, "Li": 6.94, "Be": 9.0122, "B": 10.81,
    "C": 12.011, "N": 14.007, "O": 15.999, "F": 18.998, "Ne": 20.180,
    "Na": 22.990, "Mg": 24.305, "Al": 26.982, "Si": 28.085, "P": 30.974,
    "S": 32.06, "Cl": 35.45, "Ar": 39.95, "K": 39.098, "Ca": 40.078,
    "Sc": 44.956, "Ti": 47.867, "V": 50.942, "Cr": 51.996, "Mn": 54.938,
    "Fe": 55.845, "Co": 58.933, "Ni": 58.693, "Cu": 63.546, "Zn": 65.38,
    "Ga": 69.723, "Ge": 72.630, "As": 74.922, "Se": 78.971, "Br": 79.904,
    "Kr": 83.798, "Rb": 85.468, "Sr": 87.62, "Y": 88.906, "Zr": 91.224,
    "Nb": 92.906, "Mo": 95.95, "Tc": 97.91, "Ru": 101.07, "Rh": 102.91,
    "Pd": 106.42, "Ag": 107.87, "Cd": 112.41, "In": 114.82, "Sn": 118.71,
    "Sb": 121.76, "Te": 127.60, "I": 126.90, "Xe": 131.29, "Cs": 132.91,
    "Ba": 137.33, "La": 138.91, "Ce": 140.12, "Pr": 140.91, "Nd": 144.24,
    "Pm": 144.91, "Sm": 150.36, "Eu": 151.96, "Gd": 157.25, "Tb": 158.93,
    "Dy": 162.50, "Ho": 164.93, "Er": 167.26, "Tm": 168.93, "Yb": 173.05,
    "Lu": 174.97, "Hf": 178.49, "Ta": 180.95, "W": 183.84, "Re": 186.21,
    "Os": 190.23, "Ir": 192.22, "Pt": 195.08, "Au": 196.97, "Hg": 200.59,
    "Tl": 204.38, "Pb": 207.2, "Bi": 208.98, "Po": 208.98, "At": 209.99,
    "Rn": 222.02, "Fr": 223.02, "Ra": 226.03, "Ac": 227.03, "Th": 232.04,
    "Pa": 231.04, "U": 238.03,
}


def molar_mass(element: str) -> float:
    try:
        return MOLAR_MASS[element]
    except KeyError:
        raise UnknownElement(f"unknown element symbol {element!r}") from None


@dataclass(frozen=True)
class Composition:
    """Normalized atomic fractions, plus how the value was constructed.

    `declared_total` keeps the pre-normalization sum for dictionary-style
    inputs (atomic or weight percent) so the sums-to-100 validation rule can
    run on what the document actually said. `input_repr` keeps the original
    wire value so re-encoding is faithful.
    """

    fractions: dict[str, float]
    provenance: str = "formula"
    declared_total: Optional[float] = None
    input_repr: Any = field(default=None, compare=False)

    def __post_init__(self):
        for element, value in self.fractions.items():
            molar_mass(element)
            if value <= 0:
                raise CompositionError(f"non-positive fraction for {element}")
        total = math.fsum(self.fractions.values())
        if abs(total - 1.0) > 1e-9:
            raise CompositionError(f"fractions sum to {total}, expected 1")

    def to_weight_dict(self) -> dict[str, float]:
        """Weight-percent view of the composition."""
        masses = {e: f * molar_mass(e) for e, f in self.fractions.items()}
        total = math.fsum(masses.values())
        return {e: 100.0 * m / total for e, m in masses.items()}


def _normalized(moles: dict[str, float]) -> dict[str, float]:
    total = math.fsum(moles.values())
    return {e: m / total for e, m in moles.items()}


_FORMULA_TOKEN = re.compile(r"([A-Z][a-z]?)(\d*\.?\d*)")


def parse_formula(formula: str) -> Composition:
    """Parse an atomic-ratio formula such as "Al0.5CoCrFeNi".

    Subscripts default to 1 and may be decimal; parentheses, hydration dots
    and trailing annotations are rejected.
    """
    text = formula.strip()
    if not text:
        raise EmptyFormula("empty formula")
    moles: dict[str, float] = {}
    pos = 0
    while pos < len(text):
        match = _FORMULA_TOKEN.match(text, pos)
        if match is None or match.start() != pos or not match.group(1):
            raise MalformedSubscript(f"cannot parse formula at {text[pos:]!r}")
        element, subscript = match.group(1), match.group(2)
        molar_mass(element)
        if subscript:
            if subscript == ".":
                raise MalformedSubscript(f"bad subscript in {formula!r}")
            amount = float(subscript)
            if amount <= 0:
                raise MalformedSubscript(f"zero subscript for {element} in {formula!r}")
        else:
            amount = 1.0
        moles[element] = moles.get(element, 0.0) + amount
        pos = match.end()
    return Composition(_normalized(moles), provenance="formula", input_repr=formula)


def from_atomic_dict(percents: dict[str, float]) -> Composition:
    """Composition from an atomic-percent dictionary (ratios as given)."""
    if not percents:
        raise EmptyFormula("empty composition dictionary")
    moles = {}
    for element, value in percents.items():
        molar_mass(element)
        if not isinstance(value, (int, float)) or value <= 0:
            raise NonPositiveWeight(f"non-positive amount for {element}: {value!r}")
        moles[element] = float(value)
    return Composition(
        _normalized(moles),
        provenance="formula",
        declared_total=math.fsum(moles.values()),
        input_repr=dict(percents),
    )


def from_weight_dict(weights: dict[str, float]) -> Composition:
    """Composition from weight percents: moles of e scale as w[e]/M(e)."""
    if not weights:
        raise EmptyFormula("empty weight dictionary")
    moles = {}
    for element, value in weights.items():
        if not isinstance(value, (int, float)) or value <= 0:
            raise NonPositiveWeight(f"non-positive weight for {element}: {value!r}")
        moles[element] = float(value) / molar_mass(element)
    return Composition(
        _normalized(moles),
        provenance="weight_dict",
        declared_total=math.fsum(float(v) for v in weights.values()),
        input_repr={"_helper": "from_weight_dict", "weights": dict(weights)},
    )


def balance_composition(main_element: str, additions: dict[str, float]) -> Composition:
    """Balance notation: the main element makes up the remainder to 100 wt%."""
    molar_mass(main_element)
    for element, value in additions.items():
        molar_mass(element)
        if not isinstance(value, (int, float)) or value <= 0:
            raise NonPositiveWeight(f"non-positive weight for {element}: {value!r}")
    total_additions = math.fsum(float(v) for v in additions.values())
    if total_additions >= 100.0:
        raise AdditionsExceedBalance(f"additions sum to {total_additions} wt%")
    weights = {main_element: 100.0 - total_additions}
    weights.update({e: float(v) for e, v in additions.items()})
    converted = from_weight_dict(weights)
    return Composition(
        converted.fractions,
        provenance="balance",
        input_repr={
            "_helper": "balance_composition",
            "main_element": main_element,
            "additions": dict(additions),
        },
    )


def with_weight_additions(
    base: Composition, additions: Composition, addition_wt_frac: float
) -> Composition:
    """Blend `additions` into `base` at a mass ratio of the base alloy.

    One mole of base atoms weighs sum(f_e * M_e); the additive contributes
    `addition_wt_frac` times that mass, split across its elements by the
    additive recipe's own weight fractions, then converted back to moles and
    merged. The result is scale-free, so any base amount gives the same
    normalized composition.
    """
    if not 0.0 < addition_wt_frac < 1.0:
        raise NonPositiveFraction(
            f"addition_wt_frac must be a decimal fraction in (0, 1), got {addition_wt_frac}"
        )
    base_mass = math.fsum(f * molar_mass(e) for e, f in base.fractions.items())
    additive_mass = addition_wt_frac * base_mass
    additions_mass = math.fsum(f * molar_mass(e) for e, f in additions.fractions.items())
    moles = dict(base.fractions)
    for element, fraction in additions.fractions.items():
        # mass share f*M/additions_mass, back to moles: divide by M again
        moles[element] = moles.get(element, 0.0) + additive_mass * fraction / additions_mass
    input_repr = None
    if isinstance(base.input_repr, str) and additions.provenance == "weight_dict":
        input_repr = {
            "_helper": "weight_additions",
            "base": base.input_repr,
            "additions_weights": dict(additions.input_repr["weights"]),
            "fraction": addition_wt_frac,
        }
    return Composition(_normalized(moles), provenance="weight_addition", input_repr=input_repr)


def distance(a: Composition, b: Composition) -> float:
    """L-infinity distance over the union of elements; in [0, 1]."""
    elements = set(a.fractions) | set(b.fractions)
    return max(
        abs(a.fractions.get(e, 0.0) - b.fractions.get(e, 0.0)) for e in elements
    ) if elements else 0.0
