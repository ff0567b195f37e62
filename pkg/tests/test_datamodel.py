import random

import pytest

import alloybench as ab
from alloybench.datamodel import (
    CycleDetected,
    DanglingArrow,
    EmptyInputs,
    MalformedBinding,
    ProcessChainSpec,
    ProcessStep,
    UnboundParam,
    UnknownName,
    UnusedBinding,
    material_id,
    parse_group_key,
    parse_process,
    placeholder_name,
    render_process,
)
from alloybench.interchange import decode


def test_parse_process_single_step():
    spec = parse_process("elements->creation")
    assert spec.inputs == ("elements",)
    assert spec.steps == (ProcessStep("creation", {}),)


def test_parse_process_with_binding():
    spec = parse_process("materialA->annealing[Temp=10]")
    assert spec.inputs == ("materialA",)
    assert spec.steps == (ProcessStep("annealing", {"Temp": 10.0}),)


def test_parse_process_multiple_inputs_and_steps():
    spec = parse_process("elements,reinforcement->mixing->sintering")
    assert spec.inputs == ("elements", "reinforcement")
    assert [s.group for s in spec.steps] == ["mixing", "sintering"]


def test_parse_process_tolerates_whitespace():
    spec = parse_process("  elements , reinforcement ->  mixing [ A = 2 , B = x ] ")
    assert spec.inputs == ("elements", "reinforcement")
    assert spec.steps[0].bindings == {"A": 2.0, "B": "x"}


@pytest.mark.parametrize(
    "bad,error",
    [
        ("", EmptyInputs),
        ("   ", EmptyInputs),
        ("a,,b->g", EmptyInputs),
        ("a->", DanglingArrow),
        ("->g", DanglingArrow),
        ("a->g->", DanglingArrow),
        ("a->g[x]", MalformedBinding),
        ("a->g[=5]", MalformedBinding),
        ("a->g[x=]", MalformedBinding),
        ("a->g[]", MalformedBinding),
        ("a->g[x=1,x=2]", MalformedBinding),
    ],
)
def test_parse_process_rejects(bad, error):
    with pytest.raises(error):
        parse_process(bad)


def _random_spec(rng: random.Random) -> ProcessChainSpec:
    inputs = tuple(f"in{rng.randint(0, 9)}{i}" for i in range(rng.randint(1, 3)))
    steps = []
    for i in range(rng.randint(0, 4)):
        bindings = {}
        for j in range(rng.randint(0, 3)):
            key = f"V{j}"
            bindings[key] = rng.choice([float(rng.randint(1, 900)), 12.5, f"mat{j}", 0.25])
        steps.append(ProcessStep(f"step{i}", bindings))
    return ProcessChainSpec(inputs, tuple(steps))


def test_parse_render_round_trip():
    rng = random.Random(11)
    for _ in range(300):
        spec = _random_spec(rng)
        assert parse_process(render_process(spec)) == spec


def test_parse_group_key():
    assert parse_group_key("creation") == ("creation", ())
    assert parse_group_key("annealing[Temp]") == ("annealing", ("Temp",))
    assert parse_group_key("aging[Temp,Hours]") == ("aging", ("Temp", "Hours"))
    with pytest.raises(MalformedBinding):
        parse_group_key("bad[[x]")
    with pytest.raises(MalformedBinding):
        parse_group_key("bad[x,]")


def test_placeholder_name():
    assert placeholder_name("[Temp]") == "Temp"
    assert placeholder_name("Temp") is None
    assert placeholder_name("[Temp") is None
    assert placeholder_name(700.0) is None


def _experiment(materials, groups=None, raws=None):
    tree = [
        {
            "raw_materials": raws or {"pellets": {"kind": "Ingot"}},
            "synthesis_groups": groups
            or {
                "creation": [
                    {"kind": "ArcMelting"},
                    {"kind": "AsCast"},
                    {"kind": "Homogenization", "temperature": {"value": 1100, "unit": "celsius"}},
                    {"kind": "WaterQuenching"},
                ],
                "annealing[Hours]": [
                    {"kind": "Annealing", "duration": {"value": "[Hours]", "unit": "hour"}}
                ],
            },
            "output_materials": materials,
        }
    ]
    return decode(__import__("json").dumps(tree))[0]


def _material(process, name=None, extra=None):
    out = {
        "process": process,
        "measurements": [{"_type": "composition", "composition": "CoCrFeNi"}] + (extra or []),
    }
    if name:
        out["name"] = name
    return out


def test_resolve_single_segment_chain():
    experiment = _experiment(
        [_material("pellets->creation", "base"), _material("base->annealing[Hours=12]", "aged")]
    )
    resolved, edges = ab.resolve(experiment)
    base, aged = resolved
    assert base.parents == ()
    assert [k.value for k in ab.linearize(base)] == [
        "ArcMelting", "AsCast", "Homogenization", "WaterQuenching",
    ]
    assert aged.parents == ("base",)
    assert [k.value for k in ab.linearize(aged)] == [
        "ArcMelting", "AsCast", "Homogenization", "WaterQuenching", "Annealing",
    ]
    assert edges == [("base", "aged")]
    # binding substituted into the duration field
    assert aged.linear_chain[-1].duration.value == 12.0


def test_resolve_substitution_leaves_no_placeholders():
    experiment = _experiment(
        [_material("pellets->creation", "base"), _material("base->annealing[Hours=2]", "aged")]
    )
    resolved, _ = ab.resolve(experiment)
    for material in resolved:
        for event in material.linear_chain:
            for quantity in (event.temperature, event.duration):
                assert quantity is None or not quantity.is_placeholder()
            for token in event.inputs or ():
                assert placeholder_name(token) is None


def test_resolve_diamond_counts_shared_ancestor_once():
    experiment = _experiment(
        [
            _material("pellets->creation", "base"),
            _material("base->annealing[Hours=1]", "left"),
            _material("base->annealing[Hours=2]", "right"),
            _material("left,right->annealing[Hours=3]", "merged"),
        ]
    )
    resolved, _ = ab.resolve(experiment)
    merged = resolved[3]
    assert set(merged.parents) == {"left", "right"}
    kinds = [k.value for k in ab.linearize(merged)]
    # base's four steps appear once, then each parent's annealing, then own
    assert kinds.count("ArcMelting") == 1
    assert kinds.count("Annealing") == 3
    assert len(merged.linear_chain) == 4 + 1 + 1 + 1


def test_resolve_chain_length_identity():
    experiment = _experiment(
        [
            _material("pellets->creation", "base"),
            _material("base->annealing[Hours=1]", "mid"),
            _material("mid->annealing[Hours=5]", "leaf"),
        ]
    )
    resolved, _ = ab.resolve(experiment)
    by_name = {r.name: r for r in resolved}
    leaf = by_name["leaf"]
    ancestors = [by_name["base"], by_name["mid"]]
    assert len(leaf.linear_chain) == sum(len(a.own_chain) for a in ancestors) + len(leaf.own_chain)


def test_resolve_cycle_detected():
    experiment = _experiment(
        [
            _material("b->annealing[Hours=1]", "a"),
            _material("a->annealing[Hours=1]", "b"),
            _material("pellets->creation", "c"),
        ]
    )
    with pytest.raises(CycleDetected):
        ab.resolve(experiment)


def test_resolve_self_dependency_is_a_cycle():
    experiment = _experiment([_material("a->annealing[Hours=1]", "a"),
                              _material("pellets->creation", "b")])
    with pytest.raises(CycleDetected):
        ab.resolve(experiment)


def test_resolve_unknown_names():
    with pytest.raises(UnknownName):
        ab.resolve(_experiment([_material("nonexistent->creation", "a")]))
    with pytest.raises(UnknownName):
        ab.resolve(_experiment([_material("pellets->mystery_group", "a")]))


def test_resolve_binding_errors():
    with pytest.raises(UnboundParam):
        ab.resolve(_experiment([_material("pellets->creation", "a"),
                                _material("a->annealing", "b")]))
    with pytest.raises(UnusedBinding):
        ab.resolve(_experiment([_material("pellets->creation[Speed=3]", "a")]))


def test_resolve_flat_mode_rejects_material_inputs():
    experiment = _experiment(
        [_material("pellets->creation", "base"), _material("base->annealing[Hours=2]", "aged")]
    )
    ab.resolve(experiment, mode="graph")
    with pytest.raises(UnknownName):
        ab.resolve(experiment, mode="flat")


def test_resolve_flat_mode_accepts_raw_chains():
    experiment = _experiment([_material("pellets->creation", "base")])
    resolved, edges = ab.resolve(experiment, mode="flat")
    assert edges == []
    assert resolved[0].parents == ()


def test_material_binding_creates_parent_edge():
    groups = {
        "creation": [{"kind": "ArcMelting"}, {"kind": "AsCast"}],
        "mixing[Feedstock]": [{"kind": "Mixing", "inputs": ["[Feedstock]"]}],
    }
    experiment = _experiment(
        [
            _material("pellets->creation", "base"),
            _material("pellets->mixing[Feedstock=base]", "blend"),
        ],
        groups=groups,
    )
    resolved, edges = ab.resolve(experiment)
    assert ("base", "blend") in edges
    assert resolved[1].linear_chain[-1].inputs == ("base",)


def test_unnamed_materials_get_stable_ids():
    experiment = _experiment([_material("pellets->creation"), _material("pellets->creation")])
    resolved, _ = ab.resolve(experiment)
    assert [r.name for r in resolved] == ["material#1", "material#2"]
    assert material_id(experiment.output_materials[1], 1) == "material#2"


def test_linearize_is_a_projection():
    experiment = _experiment([_material("pellets->creation", "base")])
    resolved, _ = ab.resolve(experiment)
    kinds = ab.linearize(resolved[0])
    assert [k.value for k in kinds] == [e.kind.value for e in resolved[0].linear_chain]
