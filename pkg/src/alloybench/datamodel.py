"""Experiment schema and the process-notation DSL.

A material's identity is its processing lineage: a chain of synthesis-group
references written in arrow notation ("elements->creation->annealing[Temp=700]"),
where groups are named, optionally parameterized event lists declared once per
experiment. Resolution expands each material's chain, substitutes template
bindings, wires parent edges to other materials, and linearizes ancestor
chains in topological order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Union

from .composition import Composition
from .ontology import (
    ConfigTag,
    CrysStruct,
    MeasurementMethod,
    MeasurementStatistic,
    NormalizationRecord,
    ProcessKind,
    RawMaterialKind,
)
from .quantities import QualifiedValue, Quantity, Unit


class ProcessSyntaxError(ValueError):
    pass


class EmptyInputs(ProcessSyntaxError):
    pass


class DanglingArrow(ProcessSyntaxError):
    pass


class MalformedBinding(ProcessSyntaxError):
    pass


class ResolutionError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class UnknownName(ResolutionError):
    pass


class UnboundParam(ResolutionError):
    pass


class UnusedBinding(ResolutionError):
    pass


class CycleDetected(ResolutionError):
    pass


PLACEHOLDER = re.compile(r"^\[([A-Za-z_][A-Za-z0-9_]*)\]$")


def placeholder_name(value) -> Optional[str]:
    """The variable name if `value` is exactly a "[Var]" token, else None."""
    if isinstance(value, str):
        match = PLACEHOLDER.match(value)
        if match:
            return match.group(1)
    return None


@dataclass(frozen=True)
class RawMaterial:
    kind: RawMaterialKind
    description: Optional[str] = None
    source: Optional[str] = None


@dataclass(frozen=True)
class ProcessEvent:
    kind: ProcessKind
    temperature: Optional[Quantity] = None
    duration: Optional[Quantity] = None
    description: Optional[str] = None
    source: Optional[str] = None
    inputs: Optional[tuple[str, ...]] = None

    def placeholders(self) -> set[str]:
        names = set()
        for quantity in (self.temperature, self.duration):
            if quantity is not None:
                name = placeholder_name(quantity.value)
                if name:
                    names.add(name)
        for token in self.inputs or ():
            name = placeholder_name(token)
            if name:
                names.add(name)
        return names


@dataclass(frozen=True)
class SynthesisGroup:
    """A named, optionally parameterized ordered list of process events."""

    name: str
    params: tuple[str, ...]
    events: tuple[ProcessEvent, ...]

    @property
    def signature(self) -> str:
        if self.params:
            return f"{self.name}[{','.join(self.params)}]"
        return self.name


_GROUP_KEY = re.compile(r"^([^\[\]]+)(?:\[([^\[\]]*)\])?$")


def parse_group_key(key: str) -> tuple[str, tuple[str, ...]]:
    """Split a synthesis-group map key "name[Var1,Var2]" into name + params."""
    match = _GROUP_KEY.match(key.strip())
    if not match:
        raise MalformedBinding(f"bad synthesis group key {key!r}")
    name = match.group(1).strip()
    raw_params = match.group(2)
    if raw_params is None:
        return name, ()
    params = tuple(p.strip() for p in raw_params.split(","))
    if not name or any(not p for p in params):
        raise MalformedBinding(f"bad synthesis group key {key!r}")
    return name, params


BindingValue = Union[float, str]


@dataclass(frozen=True)
class ProcessStep:
    group: str
    bindings: dict[str, BindingValue] = field(default_factory=dict)

    def __hash__(self):
        return hash((self.group, tuple(sorted(self.bindings.items()))))


@dataclass(frozen=True)
class ProcessChainSpec:
    inputs: tuple[str, ...]
    steps: tuple[ProcessStep, ...]


def _parse_binding_value(token: str) -> BindingValue:
    try:
        return float(token)
    except ValueError:
        return token


def parse_process(text: str) -> ProcessChainSpec:
    """Parse arrow notation: `in1,in2 -> group -> group[Var=value,...]`.

    Whitespace around separators is ignored. Binding values parse as numbers
    when they look numeric, otherwise they stay strings (and may later
    resolve to material names).
    """
    if not isinstance(text, str) or not text.strip():
        raise EmptyInputs("empty process string")
    segments = [seg.strip() for seg in text.split("->")]
    if any(not seg for seg in segments):
        raise DanglingArrow(f"dangling arrow in {text!r}")
    inputs = tuple(name.strip() for name in segments[0].split(","))
    if any(not name for name in inputs):
        raise EmptyInputs(f"empty input name in {text!r}")
    steps = []
    for segment in segments[1:]:
        match = _GROUP_KEY.match(segment)
        if not match or not match.group(1).strip():
            raise MalformedBinding(f"bad process step {segment!r}")
        group = match.group(1).strip()
        bindings: dict[str, BindingValue] = {}
        raw = match.group(2)
        if raw is not None:
            if not raw.strip():
                raise MalformedBinding(f"empty binding list in {segment!r}")
            for item in raw.split(","):
                if "=" not in item:
                    raise MalformedBinding(f"binding {item!r} lacks '='")
                key, _, value = item.partition("=")
                key, value = key.strip(), value.strip()
                if not key or not value:
                    raise MalformedBinding(f"bad binding {item!r}")
                if key in bindings:
                    raise MalformedBinding(f"duplicate binding {key!r}")
                bindings[key] = _parse_binding_value(value)
        steps.append(ProcessStep(group, bindings))
    return ProcessChainSpec(inputs, tuple(steps))


def _render_binding_value(value: BindingValue) -> str:
    if isinstance(value, float):
        return repr(int(value)) if value.is_integer() else repr(value)
    return value


def render_process(spec: ProcessChainSpec) -> str:
    """Inverse of parse_process."""
    parts = [",".join(spec.inputs)]
    for step in spec.steps:
        if step.bindings:
            inner = ",".join(
                f"{k}={_render_binding_value(v)}" for k, v in step.bindings.items()
            )
            parts.append(f"{step.group}[{inner}]")
        else:
            parts.append(step.group)
    return "->".join(parts)


@dataclass(frozen=True)
class Measurement:
    kind: Enum  # AlloyMeasurementKind or PhaseMeasurementKind
    value: QualifiedValue
    unit: Optional[Unit]
    uncertainty: Optional[float] = None
    method: Optional[MeasurementMethod] = None
    temperature: Optional[Quantity] = None
    pressure: Optional[Quantity] = None
    statistic: Optional[MeasurementStatistic] = None
    group_id: Optional[str] = None
    source: Optional[str] = None


@dataclass(frozen=True)
class CompMeasurement:
    composition: Composition
    method: Optional[MeasurementMethod] = None
    source: Optional[str] = None


LATTICE_PARAMS = {
    "cubic": ("a",),
    "hexagonal": ("a", "c"),
    "tetragonal": ("a", "c"),
    "orthorhombic": ("a", "b", "c"),
}


@dataclass(frozen=True)
class LatticeMeasurement:
    """Lattice lengths for one of the four supported families."""

    family: str
    a: float
    b: Optional[float] = None
    c: Optional[float] = None

    def __post_init__(self):
        required = LATTICE_PARAMS.get(self.family)
        if required is None:
            raise ValueError(f"unsupported lattice family {self.family!r}")
        for param in ("a", "b", "c"):
            present = getattr(self, param) is not None
            if present != (param in required):
                raise ValueError(
                    f"lattice family {self.family!r} requires exactly {required}"
                )

    def lengths(self) -> tuple[float, ...]:
        return tuple(
            getattr(self, p) for p in LATTICE_PARAMS[self.family]
        )


@dataclass(frozen=True)
class GlobalLatticeParam:
    lattice: LatticeMeasurement
    struct: Optional[CrysStruct] = None
    phase_fraction: Optional[Quantity] = None
    name: Optional[str] = None
    source: Optional[str] = None


@dataclass(frozen=True)
class Configuration:
    """A microstructural feature with its own measurements, optionally nested."""

    name: str
    tags: frozenset[ConfigTag]
    struct: Optional[CrysStruct] = None
    within: Optional[str] = None
    measurements: tuple = ()
    source: Optional[str] = None


MeasurementItem = Union[Measurement, CompMeasurement, GlobalLatticeParam, Configuration]


@dataclass(frozen=True)
class Material:
    process: ProcessChainSpec
    measurements: tuple[MeasurementItem, ...]
    name: Optional[str] = None

    def scalar_pool(self) -> list:
        """Measurement-family items, own plus configuration-nested."""
        pool = []
        for item in self.measurements:
            if isinstance(item, Configuration):
                pool.extend(item.measurements)
            else:
                pool.append(item)
        return pool

    def configurations(self) -> list[Configuration]:
        return [m for m in self.measurements if isinstance(m, Configuration)]


@dataclass(frozen=True)
class DescriptionGroup:
    kinds: tuple[Enum, ...]
    desc: str
    method: Optional[MeasurementMethod] = None


@dataclass(frozen=True)
class Experiment:
    raw_materials: dict[str, RawMaterial]
    synthesis_groups: dict[str, SynthesisGroup]
    output_materials: tuple[Material, ...]
    descriptions: tuple[DescriptionGroup, ...] = ()
    audit: tuple[NormalizationRecord, ...] = ()


def material_id(material: Material, index: int) -> str:
    """Explicit name, or a stable synthetic id in document order."""
    return material.name if material.name else f"material#{index + 1}"


@dataclass(frozen=True)
class ResolvedMaterial:
    material: Material
    name: str
    index: int
    parents: tuple[str, ...]
    own_chain: tuple[ProcessEvent, ...]
    linear_chain: tuple[ProcessEvent, ...]
    # document path of the group event each linear_chain entry came from
    linear_origins: tuple[str, ...] = ()


def linearize(resolved: ResolvedMaterial) -> list[ProcessKind]:
    return [event.kind for event in resolved.linear_chain]


def _substitute(event: ProcessEvent, bindings: dict[str, BindingValue], path: str) -> ProcessEvent:
    """Whole-field placeholder substitution for one event."""

    def bind(var: str) -> BindingValue:
        if var not in bindings:
            raise UnboundParam(path, f"placeholder [{var}] has no binding")
        return bindings[var]

    changes = {}
    for attr in ("temperature", "duration"):
        quantity = getattr(event, attr)
        if quantity is not None:
            var = placeholder_name(quantity.value)
            if var:
                changes[attr] = Quantity(bind(var), quantity.unit)
    if event.inputs:
        new_inputs = []
        for token in event.inputs:
            var = placeholder_name(token)
            if var:
                value = bind(var)
                new_inputs.append(value if isinstance(value, str) else repr(value))
            else:
                new_inputs.append(token)
        changes["inputs"] = tuple(new_inputs)
    return replace(event, **changes) if changes else event


class _Resolver:
    """Shared machinery behind resolve() and the validation rule engine.

    `strict` mode raises on the first problem; lenient mode collects
    (path, error) pairs and presses on so validation can report everything.
    """

    def __init__(self, experiment: Experiment, mode: str = "graph", strict: bool = True):
        if mode not in ("graph", "flat"):
            raise ValueError(f"mode must be 'graph' or 'flat', not {mode!r}")
        self.experiment = experiment
        self.mode = mode
        self.strict = strict
        self.problems: list[ResolutionError] = []
        self.used_groups: set[str] = set()
        self.referenced_raw: set[str] = set()
        self.groups: dict[str, list[SynthesisGroup]] = {}
        for key in experiment.synthesis_groups:
            group = experiment.synthesis_groups[key]
            self.groups.setdefault(group.name, []).append(group)
        self.material_names = {
            material_id(m, i) for i, m in enumerate(experiment.output_materials)
        }
        self.raw_names = set(experiment.raw_materials)

    def _report(self, error: ResolutionError):
        if self.strict:
            raise error
        self.problems.append(error)

    def _classify(self, token: str, path: str, allow_materials: bool) -> Optional[str]:
        """Returns "raw", "material" or None (reporting the problem)."""
        if token in self.raw_names:
            self.referenced_raw.add(token)
            return "raw"
        if token in self.material_names:
            if allow_materials and self.mode == "graph":
                return "material"
            if allow_materials:
                self._report(
                    UnknownName(path, f"{token!r} is a material; flat mode requires raw-material starts")
                )
                return None
        self._report(UnknownName(path, f"unknown input name {token!r}"))
        return None

    def _lookup_group(self, step: ProcessStep, path: str) -> Optional[SynthesisGroup]:
        candidates = self.groups.get(step.group)
        if not candidates:
            self._report(UnknownName(path, f"unknown synthesis group {step.group!r}"))
            return None
        keys = set(step.bindings)
        for group in candidates:
            if set(group.params) == keys:
                self.used_groups.add(group.signature)
                return group
        group = min(candidates, key=lambda g: len(set(g.params) ^ keys))
        self.used_groups.add(group.signature)
        missing = set(group.params) - keys
        extra = keys - set(group.params)
        if missing:
            self._report(
                UnboundParam(path, f"group {group.signature!r} missing bindings {sorted(missing)}")
            )
        if extra:
            self._report(
                UnusedBinding(path, f"group {group.signature!r} got unknown bindings {sorted(extra)}")
            )
        return None

    def expand_material(
        self, index: int
    ) -> tuple[tuple[ProcessEvent, ...], tuple[str, ...], list[str]]:
        """Expand one material's own steps.

        Returns (expanded events, origin path per event, parent names).
        """
        material = self.experiment.output_materials[index]
        base = f"output_materials[{index}].process"
        parents: list[str] = []

        def note_parent(name: str):
            if name not in parents:
                parents.append(name)

        for token in material.process.inputs:
            role = self._classify(token, base, allow_materials=True)
            if role == "material":
                note_parent(token)
        events: list[ProcessEvent] = []
        origins: list[str] = []
        for step_idx, step in enumerate(material.process.steps):
            path = f"{base}.steps[{step_idx}]"
            group = self._lookup_group(step, path)
            if group is None:
                continue
            for value in step.bindings.values():
                if isinstance(value, str):
                    if value in self.raw_names:
                        self.referenced_raw.add(value)
                    elif value in self.material_names:
                        if self.mode == "flat":
                            self._report(
                                UnknownName(
                                    path,
                                    f"{value!r} is a material; flat mode forbids material bindings",
                                )
                            )
                        else:
                            note_parent(value)
            group_path = f"synthesis_groups[{group.signature!r}]"
            for event_idx, event in enumerate(group.events):
                try:
                    expanded = _substitute(event, step.bindings, path)
                except ResolutionError as error:
                    self._report(error)
                    continue
                if expanded.inputs:
                    for token in expanded.inputs:
                        role = self._classify(token, f"{path}.inputs", allow_materials=True)
                        if role == "material":
                            note_parent(token)
                events.append(expanded)
                origins.append(f"{group_path}.events[{event_idx}]")
        return tuple(events), tuple(origins), parents

    def resolve(self) -> tuple[list[ResolvedMaterial], list[tuple[str, str]]]:
        materials = self.experiment.output_materials
        names = [material_id(m, i) for i, m in enumerate(materials)]
        index_of = {name: i for i, name in enumerate(names)}
        expanded = [self.expand_material(i) for i in range(len(materials))]
        edges = [
            (parent, names[i])
            for i, (_, _, parents) in enumerate(expanded)
            for parent in parents
        ]

        # Topological order over parent edges, document order as tie-break.
        children: dict[int, list[int]] = {i: [] for i in range(len(materials))}
        indegree = [0] * len(materials)
        for i, (_, _, parents) in enumerate(expanded):
            for parent in parents:
                j = index_of.get(parent)
                if j is None:
                    continue  # unknown parent already reported
                children[j].append(i)
                indegree[i] += 1
        ready = sorted(i for i in range(len(materials)) if indegree[i] == 0)
        topo: list[int] = []
        while ready:
            node = ready.pop(0)
            topo.append(node)
            for child in sorted(children[node]):
                indegree[child] -= 1
                if indegree[child] == 0:
                    ready.append(child)
            ready.sort()
        if len(topo) < len(materials):
            stuck = [names[i] for i in range(len(materials)) if indegree[i] > 0]
            self._report(
                CycleDetected(
                    f"output_materials[{index_of[stuck[0]]}]",
                    f"dependency cycle through {stuck}",
                )
            )
            # lenient mode keeps going with cyclic edges dropped from the order
            topo.extend(i for i in range(len(materials)) if i not in topo)

        ancestors: dict[int, list[int]] = {}
        for i in topo:
            seen: list[int] = []
            for parent in expanded[i][2]:
                j = index_of.get(parent)
                if j is None:
                    continue
                for anc in ancestors.get(j, []) + [j]:
                    if anc not in seen:
                        seen.append(anc)
            ancestors[i] = seen

        position = {node: rank for rank, node in enumerate(topo)}
        resolved = []
        for i, material in enumerate(materials):
            own, own_origins, parents = expanded[i]
            chain: list[ProcessEvent] = []
            chain_origins: list[str] = []
            for anc in sorted(ancestors.get(i, []), key=lambda n: position.get(n, n)):
                chain.extend(expanded[anc][0])
                chain_origins.extend(expanded[anc][1])
            chain.extend(own)
            chain_origins.extend(own_origins)
            resolved.append(
                ResolvedMaterial(
                    material=material,
                    name=names[i],
                    index=i,
                    parents=tuple(parents),
                    own_chain=own,
                    linear_chain=tuple(chain),
                    linear_origins=tuple(chain_origins),
                )
            )
        return resolved, edges


def resolve(
    experiment: Experiment, mode: str = "graph"
) -> tuple[list[ResolvedMaterial], list[tuple[str, str]]]:
    """Expand every material into a concrete, placeholder-free chain.

    Returns the resolved materials (document order) and the parent->child
    dependency edges. Raises UnknownName, UnboundParam, UnusedBinding or
    CycleDetected on the first structural problem.
    """
    return _Resolver(experiment, mode=mode, strict=True).resolve()
