"""Consistency rules over parsed experiments.

Each rule produces path-precise issues instead of raising, so a single pass
reports everything wrong with a document. The rendered feedback text is the
exact message handed back to extractor processes between attempts, which is
why ordering and formatting here are deterministic.

Rule ids:
  R1  names unique across raw materials, materials and synthesis groups
  R2  material dependency graph is acyclic
  R3  every declared raw material is referenced
  R4  every synthesis group is referenced by some process string
  R5  template params and placeholders agree inside each group
  R6  melting events are immediately followed by a casting event
  R7  dictionary-style compositions sum to 100 percent
  R8  every material carries at least one composition measurement
  R9  configuration nesting: precipitates have `within`, targets exist, no cycles
  R10 quantities carry both value and unit
  R11 grouped measurements share kind and unit, statistics look sane
  R12 process strings resolve: known names, bindings match group params
"""

from __future__ import annotations

from dataclasses import dataclass

from . import datamodel as dm
from .datamodel import (
    CompMeasurement,
    Configuration,
    CycleDetected,
    Experiment,
    GlobalLatticeParam,
    Measurement,
    UnboundParam,
    UnknownName,
    UnusedBinding,
)
from .ontology import ConfigTag

ERROR = "error"
WARNING = "warning"

COMPOSITION_SUM_TOLERANCE = 1.0  # percentage points; EDS tables round to 0.1%


@dataclass(frozen=True, order=True)
class ValidationIssue:
    rule: str
    severity: str
    path: str
    message: str


def _issue(rule: str, path: str, message: str, severity: str = ERROR) -> ValidationIssue:
    return ValidationIssue(rule=rule, severity=severity, path=path, message=message)


def render_feedback(issues: list[ValidationIssue]) -> str:
    """One line per issue, "RULE path: message", sorted by (path, rule)."""
    ordered = sorted(issues, key=lambda i: (i.path, i.rule))
    return "\n".join(f"{i.rule} {i.path}: {i.message}" for i in ordered)


def validate(experiment: Experiment) -> list[ValidationIssue]:
    """Run every rule; an empty result means the document is valid."""
    issues: list[ValidationIssue] = []
    issues.extend(_check_unique_names(experiment))
    issues.extend(_check_group_templates(experiment))

    resolver = dm._Resolver(experiment, mode="graph", strict=False)
    resolved, _ = resolver.resolve()
    for problem in resolver.problems:
        rule = "R2" if isinstance(problem, CycleDetected) else "R12"
        if isinstance(problem, (UnknownName, UnboundParam, UnusedBinding, CycleDetected)):
            issues.append(_issue(rule, problem.path, problem.message))

    issues.extend(_check_unreferenced(experiment, resolver))
    issues.extend(_check_melting_casting(experiment, resolved))
    issues.extend(_check_measurements(experiment))
    # fixing one issue must not spawn duplicates reported through two walks
    unique = sorted(set(issues), key=lambda i: (i.path, i.rule, i.message))
    return unique


def _check_unique_names(experiment: Experiment) -> list[ValidationIssue]:
    issues = []
    taken: dict[str, str] = {}
    for name in experiment.raw_materials:
        taken[name] = f"raw_materials[{name!r}]"
    for key, group in experiment.synthesis_groups.items():
        if group.name in taken:
            issues.append(
                _issue(
                    "R1",
                    f"synthesis_groups[{key!r}]",
                    f"name {group.name!r} already used by {taken[group.name]}",
                )
            )
        else:
            taken[group.name] = f"synthesis_groups[{key!r}]"
    for index, material in enumerate(experiment.output_materials):
        if material.name is None:
            continue
        path = f"output_materials[{index}]"
        if material.name in taken:
            issues.append(
                _issue("R1", path, f"name {material.name!r} already used by {taken[material.name]}")
            )
        else:
            taken[material.name] = path
    return issues


def _check_group_templates(experiment: Experiment) -> list[ValidationIssue]:
    issues = []
    for key, group in experiment.synthesis_groups.items():
        path = f"synthesis_groups[{key!r}]"
        used: set[str] = set()
        for event_idx, event in enumerate(group.events):
            for var in event.placeholders():
                used.add(var)
                if var not in group.params:
                    issues.append(
                        _issue(
                            "R5",
                            f"{path}.events[{event_idx}]",
                            f"placeholder [{var}] is not a declared parameter of {group.signature!r}",
                        )
                    )
        for param in group.params:
            if param not in used:
                issues.append(
                    _issue(
                        "R5",
                        path,
                        f"declared parameter {param!r} never appears as placeholder [{param}]",
                    )
                )
    return issues


def _check_unreferenced(experiment: Experiment, resolver: dm._Resolver) -> list[ValidationIssue]:
    issues = []
    for name in experiment.raw_materials:
        if name not in resolver.referenced_raw:
            issues.append(
                _issue("R3", f"raw_materials[{name!r}]", f"raw material {name!r} is never referenced")
            )
    for key, group in experiment.synthesis_groups.items():
        if group.signature not in resolver.used_groups:
            issues.append(
                _issue(
                    "R4",
                    f"synthesis_groups[{key!r}]",
                    f"synthesis group {group.signature!r} is not referenced by any material",
                )
            )
    return issues


def _check_melting_casting(
    experiment: Experiment, resolved: list[dm.ResolvedMaterial]
) -> list[ValidationIssue]:
    """R6 on the concatenated resolved chain.

    A melting event that ends a material's chain is deferred to that
    material's children (their chains continue it); it only becomes a
    violation on a material with no children.
    """
    has_children = {r.name: False for r in resolved}
    for r in resolved:
        for parent in r.parents:
            if parent in has_children:
                has_children[parent] = True
    issues = []
    for r in resolved:
        chain = r.linear_chain
        for i, event in enumerate(chain):
            if not event.kind.is_melting:
                continue
            if i + 1 < len(chain):
                if not chain[i + 1].kind.is_casting:
                    issues.append(
                        _issue(
                            "R6",
                            r.linear_origins[i],
                            f"{event.kind} must be immediately followed by a casting event, "
                            f"found {chain[i + 1].kind}",
                        )
                    )
            elif not has_children[r.name]:
                issues.append(
                    _issue(
                        "R6",
                        r.linear_origins[i],
                        f"{event.kind} must be immediately followed by a casting event",
                    )
                )
    return issues


def _walk_measurements(experiment: Experiment):
    """Yield (path, item, material_index, inside_configuration)."""
    for m_idx, material in enumerate(experiment.output_materials):
        for i, item in enumerate(material.measurements):
            path = f"output_materials[{m_idx}].measurements[{i}]"
            yield path, item, m_idx, False
            if isinstance(item, Configuration):
                for j, nested in enumerate(item.measurements):
                    yield f"{path}.measurements[{j}]", nested, m_idx, True


def _check_measurements(experiment: Experiment) -> list[ValidationIssue]:
    issues = []
    groups: dict[str, list[tuple[str, Measurement]]] = {}

    for m_idx, material in enumerate(experiment.output_materials):
        base = f"output_materials[{m_idx}]"
        if not any(isinstance(item, CompMeasurement) for item in material.measurements):
            issues.append(
                _issue("R8", base, "material has no composition measurement")
            )
        configs = material.configurations()
        names: dict[str, int] = {}
        for cfg in configs:
            names[cfg.name] = names.get(cfg.name, 0) + 1
        by_name = {cfg.name: cfg for cfg in configs}
        for i, item in enumerate(material.measurements):
            if not isinstance(item, Configuration):
                continue
            path = f"{base}.measurements[{i}]"
            if names[item.name] > 1:
                issues.append(
                    _issue("R9", path, f"duplicate configuration name {item.name!r}")
                )
            if ConfigTag.Precipitate in item.tags and item.within is None:
                issues.append(
                    _issue("R9", path, "precipitate configuration must declare `within`")
                )
            if item.within is not None and item.within not in by_name:
                issues.append(
                    _issue(
                        "R9",
                        path,
                        f"`within` target {item.within!r} does not exist in this material",
                    )
                )
        # cycles in the within graph
        for i, item in enumerate(material.measurements):
            if not isinstance(item, Configuration):
                continue
            seen = {item.name}
            cursor = item.within
            while cursor is not None and cursor in by_name:
                if cursor in seen:
                    issues.append(
                        _issue(
                            "R9",
                            f"{base}.measurements[{i}]",
                            f"configuration nesting cycle through {item.name!r}",
                        )
                    )
                    break
                seen.add(cursor)
                cursor = by_name[cursor].within

    for event_path, event in _group_events(experiment):
        for attr in ("temperature", "duration"):
            quantity = getattr(event, attr)
            if quantity is not None and quantity.unit is None:
                issues.append(
                    _issue("R10", event_path, f"{attr} is missing a unit")
                )

    for path, item, _, _ in _walk_measurements(experiment):
        if isinstance(item, Measurement):
            if item.unit is None:
                issues.append(_issue("R10", path, "measurement is missing a unit"))
            for attr in ("temperature", "pressure"):
                quantity = getattr(item, attr)
                if quantity is not None and quantity.unit is None:
                    issues.append(_issue("R10", path, f"{attr} is missing a unit"))
            if item.uncertainty is not None and item.uncertainty < 0:
                issues.append(_issue("R10", path, "uncertainty must be non-negative"))
            if item.group_id is not None:
                groups.setdefault(item.group_id, []).append((path, item))
        elif isinstance(item, GlobalLatticeParam):
            if item.phase_fraction is not None and item.phase_fraction.unit is None:
                issues.append(_issue("R10", path, "phase_fraction is missing a unit"))
        elif isinstance(item, CompMeasurement):
            total = item.composition.declared_total
            if total is not None and abs(total - 100.0) > COMPOSITION_SUM_TOLERANCE:
                issues.append(
                    _issue("R7", path, f"composition sums to {total:g}, expected 100")
                )

    for group_id, members in groups.items():
        first_path, first = members[0]
        stats_seen: set = set()
        for path, member in members:
            if member.kind != first.kind or member.unit != first.unit:
                issues.append(
                    _issue(
                        "R11",
                        path,
                        f"grouped measurement {group_id!r} mixes kind/unit with {first_path}",
                    )
                )
            if member.statistic is None:
                issues.append(
                    _issue(
                        "R11",
                        path,
                        f"grouped measurement {group_id!r} member lacks a statistic",
                        severity=WARNING,
                    )
                )
            elif member.statistic in stats_seen:
                issues.append(
                    _issue(
                        "R11",
                        path,
                        f"grouped measurement {group_id!r} repeats statistic {member.statistic}",
                        severity=WARNING,
                    )
                )
            else:
                stats_seen.add(member.statistic)
    return issues


def _group_events(experiment: Experiment):
    for key, group in experiment.synthesis_groups.items():
        for idx, event in enumerate(group.events):
            yield f"synthesis_groups[{key!r}].events[{idx}]", event
