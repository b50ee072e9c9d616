import io
import json
import subprocess
import sys

import pytest

from ccskit.cli import DEFAULT_TOLERANCES, EXIT_COMPUTATION, EXIT_FAILED, EXIT_OK, EXIT_SCHEMA, Settings, main, tolerances
from ccskit.scenario import (BUILTIN_SCENARIOS, ScenarioError, builtin_scenario, builtin_scenario_text,
                             parse_scenario, split_header)


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, data, header="# Exercises: a test fixture"):
    p = tmp_path / "s.scn"
    p.write_text(header + "\n" + json.dumps(data))
    return str(p)


@pytest.fixture
def hopf_data():
    return json.loads(split_header(builtin_scenario_text("hopf"))[1])


@pytest.mark.parametrize("name", BUILTIN_SCENARIOS)
def test_builtin_scenarios_parse_with_concept_header(name):
    scn = builtin_scenario(name)
    assert scn.name == name
    assert scn.header and scn.header[0].startswith("Exercises:")


@pytest.mark.parametrize("name", BUILTIN_SCENARIOS)
def test_example_prints_parseable_scenario(name):
    code, out, _ = call("example", name)
    assert code == EXIT_OK
    assert parse_scenario(out).data == builtin_scenario(name).data


def test_examples_directory_matches_builtins():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "examples"
    for name in BUILTIN_SCENARIOS:
        assert (root / f"{name}.scn").read_text() == builtin_scenario_text(name)


def test_run_passes_with_exit_zero():
    code, out, _ = call("run", "builtin:hopf", "cohomology")
    assert code == EXIT_OK
    assert "result: PASS" in out


def test_failed_check_exits_one(tmp_path, hopf_data):
    hopf_data["expected"]["chern_number"] = 2
    code, out, _ = call("run", write(tmp_path, hopf_data), "chern-number")
    assert code == EXIT_FAILED
    assert "FAIL" in out


@pytest.mark.parametrize("mutate, path", [
    (lambda d: d.update(group="so(3)"), "$.group"),
    (lambda d: d["atlas"].update(builtin="unknown"), "$.atlas.builtin"),
    (lambda d: d["complexes"][1].update(builtin="klein"), "$.complexes[1]"),
    (lambda d: d.update(schema_version=2), "$.schema_version"),
    (lambda d: d["tolerances"].update(loop=-1.0), "$.tolerances.loop"),
    (lambda d: d["sample_boxes"].update(E=[[0, 0, 0], [1, 1, 1]]), "$.sample_boxes.E"),
    (lambda d: d.pop("cycles") and d.update(computations=["chern-number"]), "$.cycles"),
])
def test_schema_errors_exit_two_with_path(tmp_path, hopf_data, mutate, path):
    hopf_data.setdefault("tolerances", {})
    mutate(hopf_data)
    code, out, err = call("run", write(tmp_path, hopf_data), "cohomology")
    assert code == EXIT_SCHEMA
    assert out == ""
    assert f"at {path}" in err


def test_invalid_json_exits_two(tmp_path):
    p = tmp_path / "bad.scn"
    p.write_text("# Exercises: nothing\n{\"schema_version\": 1,")
    code, _, err = call("run", str(p), "cohomology")
    assert code == EXIT_SCHEMA
    assert "invalid JSON" in err


def test_missing_file_and_unknown_builtin_exit_two(tmp_path):
    assert call("run", str(tmp_path / "none.scn"), "cohomology")[0] == EXIT_SCHEMA
    assert call("run", "builtin:nothing", "cohomology")[0] == EXIT_SCHEMA


def test_ccs_without_package_exits_two():
    code, _, err = call("ccs", "build", "builtin:hopf")
    assert code == EXIT_SCHEMA
    assert "$.package" in err


def test_computation_failure_exits_three(tmp_path, hopf_data):
    hopf_data["complexes"] = [{"builtin": "sphere", "params": {"n": -1}}]
    code, out, err = call("run", write(tmp_path, hopf_data), "cohomology")
    assert code == EXIT_COMPUTATION
    assert out == ""
    assert "computation failed in complexes." in err


def test_json_output_is_deterministic():
    a = call("run", "builtin:abelian_torus", "chern-simons", "--format", "json")
    b = call("run", "builtin:abelian_torus", "chern-simons", "--format", "json")
    assert a[0] == EXIT_OK
    assert a[1] == b[1]
    doc = json.loads(a[1])
    assert doc["passed"] is True
    assert doc["environment"]["quad_order"] == 8


def test_quad_order_flag_is_recorded_and_relaxes_chern_tolerance():
    code, out, _ = call("run", "builtin:hopf", "chern-number", "--quad-order", "4", "--format", "json")
    doc = json.loads(out)
    assert doc["environment"]["quad_order"] == 4
    assert code == EXIT_OK
    scn = builtin_scenario("hopf")
    assert tolerances(scn, Settings(quad_order=4))["chern_number"] == pytest.approx(1e-2)
    assert tolerances(scn, Settings())["chern_number"] == DEFAULT_TOLERANCES["chern_number"]


def test_tolerance_layering(hopf_data):
    hopf_data["tolerances"] = {"loop": 1e-7}
    scn = parse_scenario(json.dumps(hopf_data))
    tol = tolerances(scn, Settings(tolerance_scale=10.0))
    assert tol["loop"] == pytest.approx(1e-6)
    assert tol["curvature"] == pytest.approx(1e-5)


def test_tolerance_scale_can_fail_a_run():
    code, _, _ = call("run", "builtin:hopf", "transgress", "--tolerance-scale", "1e-12")
    assert code == EXIT_FAILED


def test_ccs_verify_on_abelian_package():
    code, out, _ = call("ccs", "verify", "builtin:abelian_torus")
    assert code == EXIT_OK, out


def test_parse_scenario_rejects_unknown_key(hopf_data):
    hopf_data["colour"] = "red"
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(json.dumps(hopf_data))
    assert exc.value.path == "$"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ccskit", "example", "hopf"], capture_output=True, text=True)
    assert res.returncode == 0
    assert '"name": "hopf"' in res.stdout
