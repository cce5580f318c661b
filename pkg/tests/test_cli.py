import json
import math
import subprocess
import sys

import pytest

from liouville_neumann import cli


def run(tmp_path, *argv):
    out = tmp_path / "out"
    code = cli.main([*argv, "--out", str(out)])
    doc = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, doc, out


def write_json(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


SPHERE = {"family": "Power", "K": 1, "lambda": 1.0, "z0": [0.0, 0.0], "gamma": 1.0}
LUNE = {"poles": [{"q": 0.0, "alpha": 0.375, "beta": 0.0}]}


class TestCanonical:
    def test_synthesize_round_trip(self, tmp_path):
        code, doc, _ = run(tmp_path, "canonical", "synthesize", "--K", "0", "--c1", "-1", "--c2", "0.5")
        assert code == 0 and doc["status"] == "pass"
        assert doc["result"]["roundtrip"]["error"] <= 1e-9

    def test_synthesize_negative(self, tmp_path):
        code, doc, _ = run(tmp_path, "canonical", "synthesize", "--K", "-1", "--c1", "1", "--c2", "1")
        assert code == 2 and doc["status"] == "negative"
        assert "existence" in doc["reason"] and doc["result"]["exists"] is False

    def test_verify_sphere(self, tmp_path):
        params = write_json(tmp_path, "sphere.json", SPHERE)
        code, doc, out = run(tmp_path, "canonical", "verify", "--params", params)
        assert code == 0
        assert abs(doc["result"]["area"] - 2 * math.pi) <= 1e-4
        header, *rows = (out / "field.csv").read_text().split("\n")
        assert header == "s,t,v,ev" and rows

    def test_invalid_params(self, tmp_path):
        bad = dict(SPHERE, K=0, gamma=0.5)
        code, doc, _ = run(tmp_path, "canonical", "validate", "--params", write_json(tmp_path, "p.json", bad))
        assert code == 2 and doc["result"]["valid"] is False

    def test_eval_and_constants(self, tmp_path):
        p = write_json(tmp_path, "s.json", dict(SPHERE, z0=[0.0, 1.0]))
        code, doc, _ = run(tmp_path, "canonical", "eval", "--params", p, "--z", "1j", "--z", "2+1j")
        assert code == 0 and len(doc["result"]["v"]) == 2
        code, doc, _ = run(tmp_path, "canonical", "constants", "--params", p)
        assert code == 0 and abs(doc["result"]["c1"] - 2) < 1e-12


class TestOtherCommands:
    def test_schwarzian_validate(self, tmp_path):
        spec = write_json(tmp_path, "s.json", {"poles": [{"q": 0.0, "alpha": 1.0, "beta": 0.0}]})
        code, doc, _ = run(tmp_path, "schwarzian", "validate", "--spec", spec)
        assert code == 2 and "1/2" in doc["reason"]

    def test_develop_solve_global(self, tmp_path):
        code, doc, _ = run(tmp_path, "develop", "solve-global", "--c", "0.375")
        assert code == 0 and doc["result"]["schwarzian_error"] <= 1e-9

    def test_polygon_extract_lune(self, tmp_path):
        code, doc, out = run(tmp_path, "polygon", "extract", "--spec", write_json(tmp_path, "l.json", LUNE))
        assert code == 0
        poly = json.loads((out / "polygon.json").read_text())
        assert len(poly["arcs"]) == 2
        assert all(abs(a - math.pi / 2) <= 1e-3 for a in doc["result"]["angles"])
        assert (out / "boundary.csv").read_text().startswith("arc,s,re,im\n")
        assert json.loads((out / "certificate.json").read_text())["full"] is True

    def test_polygon_inadmissible(self, tmp_path):
        spec = {"poles": [{"q": -1.0, "alpha": 0.25, "beta": 0.1}, {"q": 1.0, "alpha": 0.25, "beta": 0.1}]}
        code, doc, _ = run(tmp_path, "polygon", "extract", "--spec", write_json(tmp_path, "b.json", spec))
        assert code == 2 and "beta" in doc["reason"]

    def test_polygon_fit(self, tmp_path):
        argv = ["polygon", "fit", "--q", "-1", "1", "--alpha", "0.25", "0.25", "--target-alpha-inf"]
        code, doc, _ = run(tmp_path, *argv, "0.3")
        assert code == 0 and abs(doc["result"]["beta1"] - 0.1) <= 1e-10
        code, _, _ = run(tmp_path, *argv, "0.6")
        assert code == 2


class TestExitCodes:
    def test_usage(self, tmp_path):
        assert cli.main(["canonical"]) == 64
        assert cli.main(["nonsense", "all"]) == 64
        assert cli.main(["canonical", "verify"]) == 64
        assert cli.main(["canonical", "synthesize", "--K", "2", "--c1", "0", "--c2", "0"]) == 64
        assert cli.main(["canonical", "verify", "--params", str(tmp_path / "missing.json")]) == 64
        assert cli.main(["report", "all", "--tol", "-1"]) == 64

    def test_failed_verdict_is_exit_one(self, tmp_path):
        spec = write_json(tmp_path, "l.json", LUNE)
        code, doc, _ = run(tmp_path, "polygon", "extract", "--spec", spec, "--tol", "1e-300")
        assert code == 1 and doc["status"] == "fail"

    def test_internal_error(self, tmp_path, monkeypatch):
        def boom(args):
            raise RuntimeError("solver exploded")

        monkeypatch.setitem(cli._RUNNERS, "develop", boom)
        code, doc, _ = run(tmp_path, "develop", "solve-global", "--c", "0.1")
        assert code == 1 and doc["status"] == "error" and "solver exploded" in doc["reason"]

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "liouville_neumann", "canonical", "synthesize",
                               "--K", "1", "--c1", "0", "--c2", "0"], capture_output=True, text=True)
        assert proc.returncode == 0 and json.loads(proc.stdout)["exit_code"] == 0


class TestDeterminism:
    def strip(self, text):
        doc = json.loads(text)
        doc.pop("timestamp")
        return json.dumps(doc, sort_keys=True)

    @pytest.mark.parametrize("argv", [
        ["develop", "numeric", "--seed", "7"],
        ["canonical", "synthesize", "--K", "-1", "--c1", "-3", "--c2", "0.7"],
    ])
    def test_byte_identical(self, tmp_path, argv):
        spec = write_json(tmp_path, "s.json", {"poles": [{"q": -1.0, "alpha": 0.375, "beta": 0.1875},
                                                        {"q": 1.0, "alpha": 0.375, "beta": -0.1875}]})
        argv = argv + (["--spec", spec] if "numeric" in argv else [])
        texts = []
        for k in range(2):
            out = tmp_path / f"run{k}"
            assert cli.main([*argv, "--out", str(out)]) == 0
            texts.append((out / "report.json").read_text())
        assert self.strip(texts[0]) == self.strip(texts[1])
        assert texts[0].endswith("\n") and "\r" not in texts[0]

    def test_float_round_trip(self):
        x = 0.1 + 0.2
        assert json.loads(cli.dumps({"x": x}))["x"] == x
        assert json.loads(cli.dumps({"z": 1 + 2j}))["z"] == [1.0, 2.0]
