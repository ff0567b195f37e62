import json
from pathlib import Path

import pytest

from alloybench.composition import balance_composition, from_weight_dict, parse_formula, with_weight_additions
from alloybench.datamodel import CompMeasurement, Configuration, GlobalLatticeParam, Measurement
from alloybench.interchange import (
    DecodeFailed,
    decode,
    encode,
    parse_path,
    render_path,
    strip_fences,
)
from alloybench.quantities import ValueQualifier
from fixture_factory import make_document

FIXTURES = Path(__file__).parent / "fixtures"


def test_decode_worked_example():
    experiments = decode((FIXTURES / "hardness_pair.json").read_text())
    assert len(experiments) == 1
    materials = experiments[0].output_materials
    assert len(materials) == 2
    hardness = [
        m
        for mat in materials
        for m in mat.measurements
        if isinstance(m, Measurement) and m.kind.value == "vickers_hardness"
    ]
    assert [(m.value.magnitude, m.uncertainty) for m in hardness] == [(321.0, 7.0), (350.0, 7.0)]
    assert all(m.unit.name == "HV" for m in hardness)


def test_decode_expands_grouped_ranges():
    experiments = decode((FIXTURES / "hardness_pair.json").read_text())
    material_a = experiments[0].output_materials[0]
    grouped = [
        m
        for m in material_a.measurements
        if isinstance(m, Measurement) and m.group_id is not None
    ]
    assert len(grouped) == 2
    assert grouped[0].group_id == grouped[1].group_id
    assert {m.statistic.value for m in grouped} == {"lower", "upper"}
    assert [m.value.magnitude for m in grouped] == [5.0, 50.0]


def test_decode_nested_configuration():
    experiments = decode((FIXTURES / "hardness_pair.json").read_text())
    configs = experiments[0].output_materials[0].configurations()
    by_name = {c.name: c for c in configs}
    assert set(by_name) == {"dendrite", "FCC matrix", "B2 precipitates"}
    assert by_name["B2 precipitates"].within == "FCC matrix"
    assert by_name["FCC matrix"].measurements[0].value.qualifier is ValueQualifier.approx


def test_decode_tolerates_fences():
    text = (FIXTURES / "hardness_pair.json").read_text()
    fenced = f"```json\n{text}\n```"
    assert decode(fenced) == decode(text)
    assert strip_fences("```\n[]\n```") == "[]"
    assert strip_fences("[]") == "[]"


def test_decode_requires_unit_on_measurements():
    doc = [
        {
            "raw_materials": {"e": {"kind": "Ingot"}},
            "synthesis_groups": {"g": [{"kind": "ArcMelting"}, {"kind": "AsCast"}]},
            "output_materials": [
                {
                    "process": "e->g",
                    "measurements": [
                        {"_type": "composition", "composition": "CoCrFeNi"},
                        {"_type": "measurement", "kind": "grain_size", "value": "~0.71"},
                    ],
                }
            ],
        }
    ]
    with pytest.raises(DecodeFailed) as excinfo:
        decode(json.dumps(doc))
    errors = excinfo.value.errors
    assert len(errors) == 1
    assert errors[0].path == "[0].output_materials[0].measurements[1].unit"
    assert "unit" in errors[0].expected


def test_decode_collects_every_violation():
    doc = [
        {
            "raw_materials": {"e": {"kind": "NotAKind"}},
            "synthesis_groups": {"g": [{"kind": "ArcMelting", "speed": 3}]},
            "output_materials": [
                {
                    "process": "e->g",
                    "measurements": [
                        {"_type": "mystery"},
                        {"_type": "measurement", "kind": "nope", "value": 1.0, "unit": "HV"},
                    ],
                }
            ],
        }
    ]
    with pytest.raises(DecodeFailed) as excinfo:
        decode(json.dumps(doc))
    paths = {e.path for e in excinfo.value.errors}
    assert paths == {
        "[0].raw_materials['e'].kind",
        "[0].synthesis_groups['g'][0].speed",
        "[0].output_materials[0].measurements[0]._type",
        "[0].output_materials[0].measurements[1].kind",
    }


def test_unknown_helper_tag_errors():
    doc = [
        {
            "raw_materials": {"e": {"kind": "Ingot"}},
            "synthesis_groups": {"g": [{"kind": "Mixing"}]},
            "output_materials": [
                {
                    "process": "e->g",
                    "measurements": [
                        {"_type": "composition", "composition": {"_helper": "alchemy", "x": 1}}
                    ],
                }
            ],
        }
    ]
    with pytest.raises(DecodeFailed) as excinfo:
        decode(json.dumps(doc))
    assert any(e.path.endswith("composition._helper") for e in excinfo.value.errors)


def test_helpers_match_direct_constructors():
    doc = [
        {
            "raw_materials": {"e": {"kind": "Ingot"}},
            "synthesis_groups": {"g": [{"kind": "Mixing"}]},
            "output_materials": [
                {
                    "process": "e->g",
                    "measurements": [
                        {"_type": "composition",
                         "composition": {"_helper": "balance_composition",
                                         "main_element": "Ti", "additions": {"Al": 6, "V": 4}}},
                        {"_type": "composition",
                         "composition": {"_helper": "from_weight_dict",
                                         "weights": {"Ni": 60, "Co": 20, "Cr": 20}}},
                        {"_type": "composition",
                         "composition": {"_helper": "weight_additions", "base": "NbTaTiZr",
                                         "additions_weights": {"Mo": 50, "W": 50},
                                         "fraction": 0.05}},
                    ],
                }
            ],
        }
    ]
    (experiment,) = decode(json.dumps(doc))
    got = [m.composition for m in experiment.output_materials[0].measurements]
    assert got[0].fractions == balance_composition("Ti", {"Al": 6, "V": 4}).fractions
    assert got[1].fractions == from_weight_dict({"Ni": 60, "Co": 20, "Cr": 20}).fractions
    expected = with_weight_additions(
        parse_formula("NbTaTiZr"), from_weight_dict({"Mo": 50, "W": 50}), 0.05
    )
    assert got[2].fractions == expected.fractions


def test_unknown_unit_token_is_rejected():
    doc = [
        {
            "raw_materials": {"e": {"kind": "Ingot"}},
            "synthesis_groups": {"g": [{"kind": "Mixing"}]},
            "output_materials": [
                {
                    "process": "e->g",
                    "measurements": [
                        {"_type": "composition", "composition": "CoCrFeNi"},
                        {"_type": "measurement", "kind": "density", "value": 7.9, "unit": "stone_per_barrel"},
                    ],
                }
            ],
        }
    ]
    with pytest.raises(DecodeFailed) as excinfo:
        decode(json.dumps(doc))
    assert any("unit token" in e.expected for e in excinfo.value.errors)


def test_null_fields_are_rejected():
    doc = [
        {
            "raw_materials": {"e": {"kind": "Ingot", "description": None}},
            "synthesis_groups": {"g": [{"kind": "Mixing"}]},
            "output_materials": [
                {"process": "e->g",
                 "measurements": [{"_type": "composition", "composition": "CoCrFeNi"}]}
            ],
        }
    ]
    with pytest.raises(DecodeFailed) as excinfo:
        decode(json.dumps(doc))
    assert any(e.found == "null" for e in excinfo.value.errors)


def test_top_level_must_be_array():
    with pytest.raises(DecodeFailed):
        decode("{}")
    with pytest.raises(DecodeFailed):
        decode("not json at all {{{")


def test_lattice_family_requirements():
    def lattice_doc(lattice):
        return [
            {
                "raw_materials": {"e": {"kind": "Ingot"}},
                "synthesis_groups": {"g": [{"kind": "Mixing"}]},
                "output_materials": [
                    {
                        "process": "e->g",
                        "measurements": [
                            {"_type": "composition", "composition": "CoCrFeNi"},
                            {"_type": "lattice_param", "lattice": lattice, "struct": "BCC"},
                        ],
                    }
                ],
            }
        ]

    decode(json.dumps(lattice_doc({"type": "cubic", "a": 3.2})))
    decode(json.dumps(lattice_doc({"type": "hexagonal", "a": 3.2, "c": 5.1})))
    with pytest.raises(DecodeFailed):
        decode(json.dumps(lattice_doc({"type": "hexagonal", "a": 3.2})))
    with pytest.raises(DecodeFailed):
        decode(json.dumps(lattice_doc({"type": "cubic", "a": 3.2, "c": 1.0})))
    with pytest.raises(DecodeFailed):
        decode(json.dumps(lattice_doc({"type": "rhombic", "a": 3.2})))


def _walk(tree, segments):
    node = tree
    for segment in segments:
        if isinstance(segment, int):
            if not isinstance(node, list) or segment >= len(node):
                return False
            node = node[segment]
        else:
            if not isinstance(node, dict) or segment not in node:
                return False
            node = node[segment]
    return True


def test_schema_error_paths_address_real_nodes():
    doc = [
        {
            "raw_materials": {"e": {"kind": "Wrong"}},
            "synthesis_groups": {"g[Var]": [{"kind": "Mixing", "temperature": {"value": 5}}]},
            "output_materials": [
                {
                    "process": "e->g",
                    "measurements": [
                        {"_type": "measurement", "kind": "density", "value": 7.0},
                    ],
                }
            ],
        }
    ]
    with pytest.raises(DecodeFailed) as excinfo:
        decode(json.dumps(doc))
    for error in excinfo.value.errors:
        segments = parse_path(error.path)
        # either the node exists, or its parent exists and the leaf is the
        # missing field being reported
        assert _walk(doc, segments) or _walk(doc, segments[:-1]), error.path


def test_document_path_round_trip():
    cases = [
        ["output_materials", 0, "measurements", 2],
        [0, "raw_materials", "elements", "kind"],
        ["synthesis_groups", "annealing[Temp]", 0, "temperature"],
        ["odd key with 'quote'", 3],
    ]
    for segments in cases:
        assert parse_path(render_path(segments)) == segments


def test_round_trip_on_randomized_documents():
    for seed in range(100):
        doc = make_document(
            seed,
            multi_input=seed % 5 == 0,
            unnamed=seed % 7 == 0,
            n_materials=2 + seed % 4,
        )
        experiments = decode(json.dumps(doc))
        assert decode(encode(experiments)) == experiments, seed


def test_encode_empty_document():
    assert encode([]) == "[]"


def test_encode_is_stable():
    experiments = decode((FIXTURES / "hardness_pair.json").read_text())
    assert encode(experiments) == encode(decode(encode(experiments)))
