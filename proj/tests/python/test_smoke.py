import json
import os
import shutil
import subprocess

import pytest

CLI = os.environ.get("FOLDPLAN_CLI") or shutil.which("foldplan")


def run(*args):
    if not CLI:
        pytest.skip("foldplan executable not found")
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)


def test_cli_version():
    r = run("--version")
    assert r.returncode == 0
    assert r.stdout.strip() == "0.1.0"


def test_cli_usage_error():
    r = run("verify", "--no-such-flag")
    assert r.returncode == 2
    assert "--cp" in r.stderr


def test_cli_gen_and_verify(tmp_path):
    out = tmp_path / "data"
    assert run("gen-data", "--families", "book,gate", "--count", "3", "--per-step", "2", "--out", out).returncode == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["count"] == 3
    assert len(manifest["programs"]) == 6
    program = json.loads(next((out / "programs").iterdir()).read_text())
    cp = tmp_path / "cp.json"
    cp.write_text(json.dumps(program["pattern"]))
    r = run("verify", "--cp", cp)
    assert r.returncode == 0
    assert r.stdout == "OK\n"


fp = pytest.importorskip("foldplan")


def test_module_fixture_verifies():
    cp = fp.fixture("diagonal")
    assert fp.verify(cp)["valid"]


def test_module_step():
    cp = fp.canonicalize(fp.fixture("diagonal"))
    crease = cp["boundary"].index(False)
    state, verdict = fp.step(cp, None, {"op": "FOLD", "edge": crease, "angle_bin": 0, "rho_bin": 7})
    assert verdict["valid"]
    assert state["rho"][crease] == 1.0
    assert state["alpha"][crease] < 0
    _, verdict = fp.step(cp, state, {"op": "FOLD", "edge": cp["boundary"].index(True), "angle_bin": 0, "rho_bin": 7})
    assert verdict["reason"] == "BOUNDARY_EDGE"


def test_module_canonical_form_is_stable():
    cp = fp.canonicalize(fp.fixture("gate"))
    assert fp.canonicalize(cp) == cp


def test_module_errors():
    with pytest.raises(fp.FoldplanError):
        fp.verify({"version": 1})


def test_module_cli():
    code, out, _ = fp.run_cli(["--version"])
    assert code == 0 and out.strip() == fp.__version__
