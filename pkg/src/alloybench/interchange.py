"""Reader and writer for the JSON extraction-document format.

A document is a JSON array of experiment objects (optionally wrapped in a
fenced code block). Measurement entries are discriminated by `_type`, and
composition values may be a formula string, an element dict, or a `_helper`
object naming one of the composition constructors. Decoding is strict: every
violation is collected as a SchemaError with a path into the document, and
nothing is silently defaulted.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from typing import Any, Optional, Union

from . import composition as comp
from . import datamodel as dm
from . import ontology
from . import quantities as qty

PathSegment = Union[str, int]

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class Key(str):
    """A document-data map key (as opposed to a schema field name).

    Data keys are always rendered bracket-quoted, so user-chosen names stand
    apart from schema fields and may contain any characters.
    """


def render_path(segments: list[PathSegment]) -> str:
    """Join path segments: ints as [i], field names dotted, data keys quoted."""
    out = []
    for segment in segments:
        if isinstance(segment, int):
            out.append(f"[{segment}]")
        elif not isinstance(segment, Key) and _IDENT.match(segment):
            out.append(f".{segment}" if out else segment)
        else:
            escaped = segment.replace("\\", "\\\\").replace("'", "\\'")
            out.append(f"['{escaped}']")
    return "".join(out)


_PATH_TOKEN = re.compile(
    r"""
    \.?(?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | \[(?P<index>\d+)\]
    | \['(?P<key>(?:[^'\\]|\\.)*)'\]
    """,
    re.VERBOSE,
)


def parse_path(text: str) -> list[PathSegment]:
    """Inverse of render_path."""
    segments: list[PathSegment] = []
    pos = 0
    while pos < len(text):
        match = _PATH_TOKEN.match(text, pos)
        if match is None:
            raise ValueError(f"bad document path {text!r} at offset {pos}")
        if match.group("ident") is not None:
            segments.append(match.group("ident"))
        elif match.group("index") is not None:
            segments.append(int(match.group("index")))
        else:
            raw = match.group("key")
            segments.append(raw.replace("\\'", "'").replace("\\\\", "\\"))
        pos = match.end()
    return segments


@dataclass(frozen=True)
class SchemaError:
    path: str
    expected: str
    found: str

    @property
    def message(self) -> str:
        return f"expected {self.expected}, found {self.found}"


class DecodeFailed(ValueError):
    """Raised with every schema violation found in the document."""

    def __init__(self, errors: list[SchemaError]):
        lines = "; ".join(f"{e.path}: {e.message}" for e in errors[:5])
        more = f" (+{len(errors) - 5} more)" if len(errors) > 5 else ""
        super().__init__(f"{len(errors)} schema error(s): {lines}{more}")
        self.errors = errors


_FENCE = re.compile(r"^```[^\n]*\n(.*?)\n?```\s*$", re.DOTALL)


def strip_fences(text: str) -> str:
    match = _FENCE.match(text.strip())
    return match.group(1) if match else text


def _describe(value: Any) -> str:
    if value is _MISSING:
        return "nothing (field missing)"
    if value is None:
        return "null"
    if isinstance(value, bool):
        return f"boolean {value}"
    if isinstance(value, (int, float)):
        return f"number {value!r}"
    if isinstance(value, str):
        return f"string {value!r}" if len(value) < 40 else f"string {value[:37]!r}..."
    if isinstance(value, list):
        return f"array of {len(value)}"
    if isinstance(value, dict):
        return "object"
    return type(value).__name__


class _MissingType:
    def __repr__(self):
        return "<missing>"


_MISSING = _MissingType()


class _Decoder:
    def __init__(self):
        self.errors: list[SchemaError] = []
        self._group_counter = 0

    def error(self, path: list[PathSegment], expected: str, found: Any) -> None:
        self.errors.append(SchemaError(render_path(path), expected, _describe(found)))

    def fresh_group_id(self) -> str:
        self._group_counter += 1
        return f"g{self._group_counter}"

    # --- field helpers -----------------------------------------------------

    def take(self, obj: dict, consumed: set, key: str):
        consumed.add(key)
        return obj.get(key, _MISSING)

    def optional_str(self, obj, consumed, key, path) -> Optional[str]:
        value = self.take(obj, consumed, key)
        if value is _MISSING:
            return None
        if not isinstance(value, str):
            self.error(path + [key], "a string", value)
            return None
        return value

    def reject_unknown(self, obj: dict, consumed: set, path) -> None:
        for key in obj:
            if key not in consumed:
                self.error(path + [key], "no such field", obj[key])

    # --- leaf parsers ------------------------------------------------------

    def enum(self, family: str, token, path):
        if not isinstance(token, str):
            self.error(path, f"a {family} name", token)
            return None
        try:
            return ontology.parse_enum(family, token)
        except ontology.UnknownMember:
            self.error(path, f"a {family} member", token)
            return None

    def measurement_kind(self, token, path):
        if not isinstance(token, str):
            self.error(path, "a measurement kind name", token)
            return None
        for family in ("AlloyMeasurementKind", "PhaseMeasurementKind"):
            try:
                return ontology.parse_enum(family, token)
            except ontology.UnknownMember:
                continue
        self.error(path, "an AlloyMeasurementKind or PhaseMeasurementKind member", token)
        return None

    def unit(self, token, path) -> Optional[qty.Unit]:
        if not isinstance(token, str):
            self.error(path, "a unit token", token)
            return None
        try:
            return qty.parse_unit(token)
        except qty.UnknownUnit:
            self.error(path, "a registered unit token", token)
            return None

    def quantity(self, value, path, allow_placeholder=False) -> Optional[qty.Quantity]:
        if not isinstance(value, dict):
            self.error(path, 'a quantity object {"value", "unit"}', value)
            return None
        consumed: set = set()
        raw_value = self.take(value, consumed, "value")
        raw_unit = self.take(value, consumed, "unit")
        self.reject_unknown(value, consumed, path)
        ok = True
        if raw_value is _MISSING:
            self.error(path + ["value"], "a value (both value and unit are required)", _MISSING)
            ok = False
        if raw_unit is _MISSING:
            self.error(path + ["unit"], "a unit (both value and unit are required)", _MISSING)
            ok = False
        if not ok:
            return None
        unit = self.unit(raw_unit, path + ["unit"])
        if isinstance(raw_value, bool) or not isinstance(raw_value, (int, float, str)):
            self.error(path + ["value"], "a number", raw_value)
            return None
        if isinstance(raw_value, str):
            if allow_placeholder and dm.placeholder_name(raw_value):
                return qty.Quantity(raw_value, unit)
            self.error(path + ["value"], "a number (placeholders only in groups)", raw_value)
            return None
        return qty.Quantity(float(raw_value), unit)

    def qualified(self, value, path) -> Optional[qty.QualifiedValue]:
        try:
            return qty.parse_qualified(value)
        except qty.MalformedValue:
            self.error(path, "a number or prefixed numeric string", value)
            return None

    def composition_value(self, value, path) -> Optional[comp.Composition]:
        try:
            if isinstance(value, str):
                return comp.parse_formula(value)
            if isinstance(value, dict) and "_helper" in value:
                return self.helper(value, path)
            if isinstance(value, dict):
                bad = [k for k, v in value.items() if isinstance(v, bool) or not isinstance(v, (int, float))]
                if bad:
                    self.error(path + [bad[0]], "a number", value[bad[0]])
                    return None
                return comp.from_atomic_dict(value)
        except comp.CompositionError as err:
            self.error(path, "a parseable composition", f"{value!r} ({err})")
            return None
        self.error(path, "a formula string, element dict or _helper object", value)
        return None

    def helper(self, obj: dict, path) -> Optional[comp.Composition]:
        tag = obj.get("_helper")
        consumed = {"_helper"}
        if tag == "balance_composition":
            main = self.take(obj, consumed, "main_element")
            additions = self.take(obj, consumed, "additions")
            self.reject_unknown(obj, consumed, path)
            if not isinstance(main, str):
                self.error(path + ["main_element"], "an element symbol", main)
                return None
            if not isinstance(additions, dict):
                self.error(path + ["additions"], "an element->weight object", additions)
                return None
            result = comp.balance_composition(main, additions)
        elif tag == "from_weight_dict":
            weights = self.take(obj, consumed, "weights")
            self.reject_unknown(obj, consumed, path)
            if not isinstance(weights, dict):
                self.error(path + ["weights"], "an element->weight object", weights)
                return None
            result = comp.from_weight_dict(weights)
        elif tag == "weight_additions":
            base = self.take(obj, consumed, "base")
            additions = self.take(obj, consumed, "additions_weights")
            fraction = self.take(obj, consumed, "fraction")
            self.reject_unknown(obj, consumed, path)
            if not isinstance(base, str):
                self.error(path + ["base"], "a base formula string", base)
                return None
            if not isinstance(additions, dict):
                self.error(path + ["additions_weights"], "an element->weight object", additions)
                return None
            if isinstance(fraction, bool) or not isinstance(fraction, (int, float)):
                self.error(path + ["fraction"], "a decimal fraction", fraction)
                return None
            result = comp.with_weight_additions(
                comp.parse_formula(base), comp.from_weight_dict(additions), float(fraction)
            )
        else:
            self.error(path + ["_helper"], "a known _helper tag", tag)
            return None
        return replace(result, input_repr=dict(obj))

    # --- structure parsers ---------------------------------------------------

    def measurement_item(self, value, path):
        if not isinstance(value, dict):
            self.error(path, "a measurement object", value)
            return []
        tag = value.get("_type")
        if tag == "composition":
            item = self.comp_measurement(value, path)
        elif tag == "measurement":
            item = self.scalar_measurement(value, path)
        elif tag == "group_measurements":
            return self.group_measurements(value, path)
        elif tag == "lattice_param":
            item = self.lattice_param(value, path)
        elif tag == "configuration":
            item = self.configuration(value, path)
        else:
            self.error(path + ["_type"], "a known _type tag", value.get("_type", _MISSING))
            return []
        return [item] if item is not None else []

    def comp_measurement(self, obj, path):
        consumed = {"_type"}
        raw = self.take(obj, consumed, "composition")
        method = self.take(obj, consumed, "method")
        source = self.optional_str(obj, consumed, "source", path)
        self.reject_unknown(obj, consumed, path)
        if raw is _MISSING:
            self.error(path + ["composition"], "a composition value", _MISSING)
            return None
        parsed = self.composition_value(raw, path + ["composition"])
        method_member = None
        if method is not _MISSING:
            method_member = self.enum("MeasurementMethod", method, path + ["method"])
        if parsed is None:
            return None
        return dm.CompMeasurement(composition=parsed, method=method_member, source=source)

    def scalar_measurement(self, obj, path, forced_group: Optional[str] = None):
        consumed = {"_type"}
        kind = self.take(obj, consumed, "kind")
        value = self.take(obj, consumed, "value")
        unit = self.take(obj, consumed, "unit")
        uncertainty = self.take(obj, consumed, "uncertainty")
        method = self.take(obj, consumed, "measurement_method")
        temperature = self.take(obj, consumed, "temperature")
        pressure = self.take(obj, consumed, "pressure")
        statistic = self.take(obj, consumed, "measurement_statistic")
        source = self.optional_str(obj, consumed, "source", path)
        self.reject_unknown(obj, consumed, path)

        problems = False
        for name, raw in (("kind", kind), ("value", value), ("unit", unit)):
            if raw is _MISSING:
                self.error(path + [name], f"{name} (kind, value and unit must all be present)", _MISSING)
                problems = True
        if problems:
            return None
        kind_member = self.measurement_kind(kind, path + ["kind"])
        qualified = self.qualified(value, path + ["value"])
        unit_member = self.unit(unit, path + ["unit"])
        uncertainty_value = None
        if uncertainty is not _MISSING:
            if isinstance(uncertainty, bool) or not isinstance(uncertainty, (int, float)) or uncertainty < 0:
                self.error(path + ["uncertainty"], "a non-negative number", uncertainty)
            else:
                uncertainty_value = float(uncertainty)
        method_member = None
        if method is not _MISSING:
            method_member = self.enum("MeasurementMethod", method, path + ["measurement_method"])
        temperature_q = None
        if temperature is not _MISSING:
            temperature_q = self.quantity(temperature, path + ["temperature"])
        pressure_q = None
        if pressure is not _MISSING:
            pressure_q = self.quantity(pressure, path + ["pressure"])
        statistic_member = None
        if statistic is not _MISSING:
            statistic_member = self.enum("MeasurementStatistic", statistic, path + ["measurement_statistic"])
        if kind_member is None or qualified is None or unit_member is None:
            return None
        return dm.Measurement(
            kind=kind_member,
            value=qualified,
            unit=unit_member,
            uncertainty=uncertainty_value,
            method=method_member,
            temperature=temperature_q,
            pressure=pressure_q,
            statistic=statistic_member,
            group_id=forced_group,
            source=source,
        )

    def group_measurements(self, obj, path) -> list:
        consumed = {"_type"}
        kind = self.take(obj, consumed, "kind")
        unit = self.take(obj, consumed, "unit")
        values = self.take(obj, consumed, "values")
        source = self.optional_str(obj, consumed, "source", path)
        self.reject_unknown(obj, consumed, path)
        problems = False
        for name, raw in (("kind", kind), ("unit", unit), ("values", values)):
            if raw is _MISSING:
                self.error(path + [name], f"{name} (kind, unit and values must all be present)", _MISSING)
                problems = True
        if problems:
            return []
        kind_member = self.measurement_kind(kind, path + ["kind"])
        unit_member = self.unit(unit, path + ["unit"])
        if not isinstance(values, list) or not values:
            self.error(path + ["values"], "a non-empty array of {statistic, value}", values)
            return []
        group_id = self.fresh_group_id()
        members = []
        for i, entry in enumerate(values):
            entry_path = path + ["values", i]
            if not isinstance(entry, dict):
                self.error(entry_path, "an object {statistic, value}", entry)
                continue
            entry_consumed: set = set()
            statistic = self.take(entry, entry_consumed, "statistic")
            value = self.take(entry, entry_consumed, "value")
            self.reject_unknown(entry, entry_consumed, entry_path)
            statistic_member = self.enum(
                "MeasurementStatistic", statistic if statistic is not _MISSING else None,
                entry_path + ["statistic"],
            )
            qualified = None
            if value is _MISSING:
                self.error(entry_path + ["value"], "a value", _MISSING)
            else:
                qualified = self.qualified(value, entry_path + ["value"])
            if kind_member is None or unit_member is None or statistic_member is None or qualified is None:
                continue
            members.append(
                dm.Measurement(
                    kind=kind_member,
                    value=qualified,
                    unit=unit_member,
                    statistic=statistic_member,
                    group_id=group_id,
                    source=source,
                )
            )
        return members

    def lattice_param(self, obj, path):
        consumed = {"_type"}
        lattice = self.take(obj, consumed, "lattice")
        struct = self.take(obj, consumed, "struct")
        phase_fraction = self.take(obj, consumed, "phase_fraction")
        name = self.optional_str(obj, consumed, "name", path)
        source = self.optional_str(obj, consumed, "source", path)
        self.reject_unknown(obj, consumed, path)
        if not isinstance(lattice, dict):
            self.error(path + ["lattice"], 'a lattice object {"type", "a", ...}', lattice)
            return None
        lat_consumed: set = set()
        family = self.take(lattice, lat_consumed, "type")
        lengths = {}
        for axis in ("a", "b", "c"):
            raw = self.take(lattice, lat_consumed, axis)
            if raw is _MISSING:
                continue
            if isinstance(raw, bool) or not isinstance(raw, (int, float)):
                self.error(path + ["lattice", axis], "a number", raw)
                return None
            lengths[axis] = float(raw)
        self.reject_unknown(lattice, lat_consumed, path + ["lattice"])
        if family not in dm.LATTICE_PARAMS:
            self.error(path + ["lattice", "type"], "one of cubic/hexagonal/tetragonal/orthorhombic",
                       family if family is not _MISSING else _MISSING)
            return None
        try:
            lattice_value = dm.LatticeMeasurement(family=family, **lengths)
        except ValueError as err:
            self.error(path + ["lattice"], str(err), lattice)
            return None
        struct_member = None
        if struct is not _MISSING:
            struct_member = self.enum("CrysStruct", struct, path + ["struct"])
        fraction_q = None
        if phase_fraction is not _MISSING:
            fraction_q = self.quantity(phase_fraction, path + ["phase_fraction"])
        return dm.GlobalLatticeParam(
            lattice=lattice_value,
            struct=struct_member,
            phase_fraction=fraction_q,
            name=name,
            source=source,
        )

    def configuration(self, obj, path):
        consumed = {"_type"}
        name = self.take(obj, consumed, "name")
        tags = self.take(obj, consumed, "tags")
        struct = self.take(obj, consumed, "struct")
        within = self.take(obj, consumed, "within")
        measurements = self.take(obj, consumed, "measurements")
        source = self.optional_str(obj, consumed, "source", path)
        self.reject_unknown(obj, consumed, path)
        if not isinstance(name, str) or not name:
            self.error(path + ["name"], "a configuration name", name)
            return None
        if not isinstance(tags, list):
            self.error(path + ["tags"], "an array of ConfigTag values", tags)
            return None
        tag_members = []
        for i, token in enumerate(tags):
            member = self.enum("ConfigTag", token, path + ["tags", i])
            if member is not None:
                tag_members.append(member)
        struct_member = None
        if struct is not _MISSING:
            struct_member = self.enum("CrysStruct", struct, path + ["struct"])
        within_name = None
        if within is not _MISSING:
            if not isinstance(within, str):
                self.error(path + ["within"], "a configuration name", within)
            else:
                within_name = within
        nested = []
        if measurements is _MISSING or not isinstance(measurements, list):
            self.error(path + ["measurements"], "an array of measurements", measurements)
        else:
            for i, entry in enumerate(measurements):
                for item in self.measurement_item(entry, path + ["measurements", i]):
                    if isinstance(item, dm.Configuration):
                        self.error(
                            path + ["measurements", i],
                            "a non-configuration measurement (configurations do not nest directly)",
                            entry,
                        )
                    else:
                        nested.append(item)
        return dm.Configuration(
            name=name,
            tags=frozenset(tag_members),
            struct=struct_member,
            within=within_name,
            measurements=tuple(nested),
            source=source,
        )

    def material(self, obj, path):
        if not isinstance(obj, dict):
            self.error(path, "a material object", obj)
            return None
        consumed: set = set()
        process = self.take(obj, consumed, "process")
        name = self.optional_str(obj, consumed, "name", path)
        measurements = self.take(obj, consumed, "measurements")
        self.reject_unknown(obj, consumed, path)
        if not isinstance(process, str):
            self.error(path + ["process"], "a process string", process)
            return None
        try:
            spec = dm.parse_process(process)
        except dm.ProcessSyntaxError as err:
            self.error(path + ["process"], f"a well-formed process string ({err})", process)
            return None
        items = []
        if not isinstance(measurements, list):
            self.error(path + ["measurements"], "an array of measurements", measurements)
        else:
            for i, entry in enumerate(measurements):
                items.extend(self.measurement_item(entry, path + ["measurements", i]))
        return dm.Material(process=spec, measurements=tuple(items), name=name)

    def raw_material(self, obj, path):
        if not isinstance(obj, dict):
            self.error(path, "a raw material object", obj)
            return None
        consumed: set = set()
        kind = self.take(obj, consumed, "kind")
        description = self.optional_str(obj, consumed, "description", path)
        source = self.optional_str(obj, consumed, "source", path)
        self.reject_unknown(obj, consumed, path)
        member = self.enum("RawMaterialKind", kind if kind is not _MISSING else None, path + ["kind"])
        if member is None:
            return None
        return dm.RawMaterial(kind=member, description=description, source=source)

    def process_event(self, obj, path):
        if not isinstance(obj, dict):
            self.error(path, "a process event object", obj)
            return None
        consumed: set = set()
        kind = self.take(obj, consumed, "kind")
        temperature = self.take(obj, consumed, "temperature")
        duration = self.take(obj, consumed, "duration")
        description = self.optional_str(obj, consumed, "description", path)
        source = self.optional_str(obj, consumed, "source", path)
        inputs = self.take(obj, consumed, "inputs")
        self.reject_unknown(obj, consumed, path)
        member = self.enum("ProcessKind", kind if kind is not _MISSING else None, path + ["kind"])
        temperature_q = None
        if temperature is not _MISSING:
            temperature_q = self.quantity(temperature, path + ["temperature"], allow_placeholder=True)
        duration_q = None
        if duration is not _MISSING:
            duration_q = self.quantity(duration, path + ["duration"], allow_placeholder=True)
        inputs_value = None
        if inputs is not _MISSING:
            if not isinstance(inputs, list) or not all(isinstance(t, str) for t in inputs):
                self.error(path + ["inputs"], "an array of names", inputs)
            else:
                inputs_value = tuple(inputs)
        if member is None:
            return None
        return dm.ProcessEvent(
            kind=member,
            temperature=temperature_q,
            duration=duration_q,
            description=description,
            source=source,
            inputs=inputs_value,
        )

    def description_group(self, obj, path):
        if not isinstance(obj, dict):
            self.error(path, "a description group object", obj)
            return None
        consumed: set = set()
        kinds = self.take(obj, consumed, "kinds")
        method = self.take(obj, consumed, "method")
        desc = self.take(obj, consumed, "desc")
        self.reject_unknown(obj, consumed, path)
        members = []
        if not isinstance(kinds, list):
            self.error(path + ["kinds"], "an array of canonical values", kinds)
        else:
            for i, token in enumerate(kinds):
                member = None
                if isinstance(token, str):
                    for family in ("AlloyMeasurementKind", "PhaseMeasurementKind",
                                   "ProcessKind", "MeasurementMethod"):
                        try:
                            member = ontology.parse_enum(family, token)
                            break
                        except ontology.UnknownMember:
                            continue
                if member is None:
                    self.error(path + ["kinds", i], "a measurement kind, process kind or method", token)
                else:
                    members.append(member)
        method_member = None
        if method is not _MISSING:
            method_member = self.enum("MeasurementMethod", method, path + ["method"])
        if not isinstance(desc, str) or not desc:
            self.error(path + ["desc"], "a non-empty description string", desc)
            return None
        return dm.DescriptionGroup(kinds=tuple(members), desc=desc, method=method_member)

    def experiment(self, obj, path) -> Optional[dm.Experiment]:
        if not isinstance(obj, dict):
            self.error(path, "an experiment object", obj)
            return None
        consumed: set = set()
        raw_materials = self.take(obj, consumed, "raw_materials")
        synthesis_groups = self.take(obj, consumed, "synthesis_groups")
        descriptions = self.take(obj, consumed, "descriptions")
        output_materials = self.take(obj, consumed, "output_materials")
        self.reject_unknown(obj, consumed, path)

        raws = {}
        if not isinstance(raw_materials, dict):
            self.error(path + ["raw_materials"], "an object of raw materials", raw_materials)
        else:
            for name, value in raw_materials.items():
                parsed = self.raw_material(value, path + ["raw_materials", Key(name)])
                if parsed is not None:
                    raws[name] = parsed

        groups = {}
        if not isinstance(synthesis_groups, dict):
            self.error(path + ["synthesis_groups"], "an object of synthesis groups", synthesis_groups)
        else:
            for key, events in synthesis_groups.items():
                group_path = path + ["synthesis_groups", Key(key)]
                try:
                    name, params = dm.parse_group_key(key)
                except dm.ProcessSyntaxError as err:
                    self.error(group_path, f"a group key name[Var,...] ({err})", key)
                    continue
                if not isinstance(events, list) or not events:
                    self.error(group_path, "a non-empty array of process events", events)
                    continue
                parsed_events = []
                for i, event in enumerate(events):
                    parsed = self.process_event(event, group_path + [i])
                    if parsed is not None:
                        parsed_events.append(parsed)
                groups[key] = dm.SynthesisGroup(name=name, params=params, events=tuple(parsed_events))

        description_groups = []
        if descriptions is not _MISSING:
            if not isinstance(descriptions, list):
                self.error(path + ["descriptions"], "an array of description groups", descriptions)
            else:
                for i, entry in enumerate(descriptions):
                    parsed = self.description_group(entry, path + ["descriptions", i])
                    if parsed is not None:
                        description_groups.append(parsed)

        materials = []
        if not isinstance(output_materials, list):
            self.error(path + ["output_materials"], "an array of materials", output_materials)
        else:
            for i, entry in enumerate(output_materials):
                parsed = self.material(entry, path + ["output_materials", i])
                if parsed is not None:
                    materials.append(parsed)

        return dm.Experiment(
            raw_materials=raws,
            synthesis_groups=groups,
            output_materials=tuple(materials),
            descriptions=tuple(description_groups),
        )


def decode(data: Union[bytes, str]) -> list[dm.Experiment]:
    """Parse a document into experiments; raises DecodeFailed with every violation."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    text = strip_fences(text)
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as err:
        raise DecodeFailed([SchemaError("", "valid JSON", f"unparseable text ({err})")]) from None
    if not isinstance(tree, list):
        raise DecodeFailed([SchemaError("", "a top-level array of experiments", _describe(tree))])
    decoder = _Decoder()
    experiments = []
    for i, entry in enumerate(tree):
        experiment = decoder.experiment(entry, [i])
        if experiment is not None:
            experiments.append(experiment)
    if decoder.errors:
        raise DecodeFailed(decoder.errors)
    return experiments


# --- encoding ----------------------------------------------------------------


def _encode_quantity(quantity: qty.Quantity) -> dict:
    return {"value": quantity.value, "unit": quantity.unit.name if quantity.unit else None}


def _encode_composition(value: comp.Composition):
    if value.input_repr is not None:
        return value.input_repr
    return {element: fraction * 100.0 for element, fraction in value.fractions.items()}


def _encode_measurement(m: dm.Measurement) -> dict:
    out: dict[str, Any] = {"_type": "measurement", "kind": m.kind.value, "value": m.value.render()}
    out["unit"] = m.unit.name if m.unit else None
    if m.uncertainty is not None:
        out["uncertainty"] = m.uncertainty
    if m.method is not None:
        out["measurement_method"] = m.method.value
    if m.temperature is not None:
        out["temperature"] = _encode_quantity(m.temperature)
    if m.pressure is not None:
        out["pressure"] = _encode_quantity(m.pressure)
    if m.statistic is not None:
        out["measurement_statistic"] = m.statistic.value
    if m.source is not None:
        out["source"] = m.source
    return out


def _encode_items(items) -> list:
    """Encode a measurement list, re-folding grouped measurements."""
    out = []
    emitted_groups: set[str] = set()
    members_by_group: dict[str, list[dm.Measurement]] = {}
    for item in items:
        if isinstance(item, dm.Measurement) and item.group_id is not None:
            members_by_group.setdefault(item.group_id, []).append(item)
    for item in items:
        if isinstance(item, dm.Measurement) and item.group_id is not None:
            if item.group_id in emitted_groups:
                continue
            emitted_groups.add(item.group_id)
            members = members_by_group[item.group_id]
            block: dict[str, Any] = {
                "_type": "group_measurements",
                "kind": members[0].kind.value,
                "unit": members[0].unit.name if members[0].unit else None,
                "values": [
                    {
                        "statistic": m.statistic.value if m.statistic else None,
                        "value": m.value.render(),
                    }
                    for m in members
                ],
            }
            if members[0].source is not None:
                block["source"] = members[0].source
            out.append(block)
        elif isinstance(item, dm.Measurement):
            out.append(_encode_measurement(item))
        elif isinstance(item, dm.CompMeasurement):
            block = {"_type": "composition", "composition": _encode_composition(item.composition)}
            if item.method is not None:
                block["method"] = item.method.value
            if item.source is not None:
                block["source"] = item.source
            out.append(block)
        elif isinstance(item, dm.GlobalLatticeParam):
            lattice: dict[str, Any] = {"type": item.lattice.family}
            for axis in dm.LATTICE_PARAMS[item.lattice.family]:
                lattice[axis] = getattr(item.lattice, axis)
            block = {"_type": "lattice_param", "lattice": lattice}
            if item.struct is not None:
                block["struct"] = item.struct.value
            if item.phase_fraction is not None:
                block["phase_fraction"] = _encode_quantity(item.phase_fraction)
            if item.name is not None:
                block["name"] = item.name
            if item.source is not None:
                block["source"] = item.source
            out.append(block)
        elif isinstance(item, dm.Configuration):
            block = {"_type": "configuration", "name": item.name}
            if item.struct is not None:
                block["struct"] = item.struct.value
            block["tags"] = sorted(tag.value for tag in item.tags)
            if item.within is not None:
                block["within"] = item.within
            block["measurements"] = _encode_items(item.measurements)
            if item.source is not None:
                block["source"] = item.source
            out.append(block)
        else:
            raise TypeError(f"cannot encode measurement item {item!r}")
    return out


def _encode_event(event: dm.ProcessEvent) -> dict:
    out: dict[str, Any] = {"kind": event.kind.value}
    if event.temperature is not None:
        out["temperature"] = _encode_quantity(event.temperature)
    if event.duration is not None:
        out["duration"] = _encode_quantity(event.duration)
    if event.description is not None:
        out["description"] = event.description
    if event.source is not None:
        out["source"] = event.source
    if event.inputs is not None:
        out["inputs"] = list(event.inputs)
    return out


def _encode_experiment(experiment: dm.Experiment) -> dict:
    out: dict[str, Any] = {"raw_materials": {}, "synthesis_groups": {}}
    for name, raw in experiment.raw_materials.items():
        block: dict[str, Any] = {"kind": raw.kind.value}
        if raw.description is not None:
            block["description"] = raw.description
        if raw.source is not None:
            block["source"] = raw.source
        out["raw_materials"][name] = block
    for key, group in experiment.synthesis_groups.items():
        out["synthesis_groups"][key] = [_encode_event(e) for e in group.events]
    if experiment.descriptions:
        out["descriptions"] = []
        for entry in experiment.descriptions:
            block = {"kinds": [k.value for k in entry.kinds]}
            if entry.method is not None:
                block["method"] = entry.method.value
            block["desc"] = entry.desc
            out["descriptions"].append(block)
    out["output_materials"] = []
    for material in experiment.output_materials:
        block = {"process": dm.render_process(material.process)}
        if material.name is not None:
            block["name"] = material.name
        block["measurements"] = _encode_items(material.measurements)
        out["output_materials"].append(block)
    return out


def encode(experiments: list[dm.Experiment]) -> str:
    """Serialize experiments back to document text; decode(encode(x)) == x."""
    return json.dumps([_encode_experiment(e) for e in experiments], indent=2)
