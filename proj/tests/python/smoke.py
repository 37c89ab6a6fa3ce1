"""Import-and-run smoke test for the compiled extension.

Plain asserts on a handful of cheap operations: versioning, angle parsing,
invariants of two known phases, preset listing, and one tiny end-to-end
scenario run. Exercises the binding layer, not the physics (the C++ test
suite owns that).
"""

import json
import math
import os
import sys
import tempfile

import dtqw


def main() -> None:
    assert isinstance(dtqw.__version__, str) and dtqw.__version__
    assert dtqw.version() == dtqw.__version__

    assert abs(dtqw.parse_angle("pi/2") - math.pi / 2) < 1e-12
    assert abs(dtqw.parse_angle("-3pi/4") + 3 * math.pi / 4) < 1e-12
    try:
        dtqw.parse_angle("pie")
    except dtqw.ConfigError:
        pass
    else:
        raise AssertionError("parse_angle accepted garbage")

    # Hadamard point: winding +1 in the first frame, 0 in the second,
    # invariant pair (1, 1). A swapped-phase point lands at (0, 0).
    assert dtqw.winding("prime", math.pi / 2, 0.0) == 1
    assert dtqw.winding("double_prime", math.pi / 2, 0.0) == 0
    assert dtqw.invariants(math.pi / 2, 0.0) == (1, 1)
    assert dtqw.invariants(-math.pi / 2, math.pi / 4) == (0, 0)

    spectrum = dtqw.bands(math.pi / 2, 0.0, k_points=128)
    assert len(spectrum["k"]) == 128
    assert abs(spectrum["gap0"] - math.pi / 2) < 1e-9
    assert abs(spectrum["gap_pi"] - math.pi / 2) < 1e-9

    presets = dtqw.list_presets()
    names = [name for name, _ in presets]
    assert len(names) == 10 and "fig1" in names and "fig6" in names
    assert all(desc for _, desc in presets)
    json.loads(dtqw.preset_config("fig1"))
    try:
        dtqw.preset_config("fig99")
    except dtqw.ConfigError:
        pass
    else:
        raise AssertionError("unknown preset accepted")

    config = {
        "task": "walk",
        "geometry": {"extent": [17]},
        "protocol": "split_step_1d",
        "field": {"type": "homogeneous", "theta1": "pi/2", "theta2": "0"},
        "initial": {"site": [0], "spin": "down"},
        "steps": 4,
        "observers": {"distribution_interval": 4},
    }
    with tempfile.TemporaryDirectory() as tmp:
        out = dtqw.run_text(json.dumps(config), origin="smoke", out=os.path.join(tmp, "case"))
        manifest = json.load(open(os.path.join(out, "manifest.json")))
        assert manifest["task"] == "walk"
        assert "distribution.csv" in manifest["outputs"]
        assert os.path.exists(os.path.join(out, "distribution.csv"))

        path = os.path.join(tmp, "case.json")
        with open(path, "w") as fh:
            json.dump(config, fh)
        assert dtqw.validate_file(path) == "walk"

    state = json.loads(dtqw.wall_state_json())
    assert state["gap"] == "zero"
    assert abs(state["epsilon"]) < 1e-6

    print("smoke ok")


if __name__ == "__main__":
    sys.exit(main())
