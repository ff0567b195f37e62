"""Mock extractor: emits a valid document on the first attempt."""

import json
import sys

VALID = [
    {
        "raw_materials": {"elements": {"kind": "Ingot"}},
        "synthesis_groups": {
            "creation": [{"kind": "ArcMelting"}, {"kind": "AsCast"}]
        },
        "output_materials": [
            {
                "process": "elements->creation",
                "name": "alloy-1",
                "measurements": [
                    {"_type": "composition", "composition": "CoCrFeNi"},
                    {"_type": "measurement", "kind": "vickers_hardness", "value": 210.0, "unit": "HV"},
                ],
            }
        ],
    }
]


def main():
    json.loads(sys.stdin.readline())  # consume the request
    print(json.dumps(VALID))


if __name__ == "__main__":
    main()
