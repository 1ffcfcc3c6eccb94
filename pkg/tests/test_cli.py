import json
import subprocess
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

from sasakicert.cli import (
    EXIT_INPUT,
    EXIT_OK,
    EXIT_REPLAY,
    WORKERS_ENV,
    InputError,
    canonical_json,
    digest,
    main,
    parse_c,
    parse_tolerance,
    parse_w,
)
from sasakicert.fiberjoin import FiberJoinSpec, spec_to_json

FAMILIES = Path(__file__).resolve().parent.parent / "families"


@pytest.fixture
def spec_file(tmp_path):
    def write(spec: FiberJoinSpec, name="spec.json"):
        path = tmp_path / name
        path.write_text(spec_to_json(spec))
        return str(path)

    return write


def _report(tmp_path, argv, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--json", str(out)])
    return code, json.loads(out.read_text())


class TestParsing:
    @pytest.mark.parametrize("text,value", [("2^-40", F(1, 2**40)), ("1/1024", F(1, 1024)), ("3/8", F(3, 8))])
    def test_tolerance(self, text, value):
        assert parse_tolerance(text) == value

    @pytest.mark.parametrize("text", ["1/3", "0", "-1/4", "abc", "2^x"])
    def test_tolerance_rejects(self, text):
        with pytest.raises(InputError):
            parse_tolerance(text)

    def test_c(self):
        assert parse_c("-299/301") == F(-299, 301)
        for bad in ("1", "-1", "3/2", "x"):
            with pytest.raises(InputError):
                parse_c(bad)

    def test_w(self):
        assert parse_w("3,2") == (3, 2)
        for bad in ("2,4", "0,1", "1", "a,b"):
            with pytest.raises(InputError):
                parse_w(bad)

    def test_digest_ignores_key_order(self):
        assert digest({"a": 1, "b": [1, 2]}) == digest({"b": [1, 2], "a": 1})
        assert canonical_json({"b": 1, "a": 2}) == '{"a":2,"b":1}'


class TestExtremal:
    def test_refuted_ray(self, tmp_path, spec_file, capsys):
        path = spec_file(FiberJoinSpec.surface(7, 2, 1))
        code, rep = _report(tmp_path, ["extremal", path, "--c", "-299/301"])
        assert code == EXIT_OK
        (v,) = rep["verdicts"]
        assert v["ray"] == "-299/301" and v["extremal"] == "no"
        ev = v["certificate"]["evidence"]
        assert F(ev["value"]) < 0 and -1 < F(ev["point"]) < 0
        assert "extremal=no" in capsys.readouterr().out

    def test_weights_map_to_c(self, tmp_path, spec_file):
        path = spec_file(FiberJoinSpec.surface(1, 2, 1))
        _, a = _report(tmp_path, ["extremal", path, "--w", "3,1"], "a.json")
        _, b = _report(tmp_path, ["extremal", path, "--c", "1/2"], "b.json")
        assert a["verdicts"][0]["digest"] == b["verdicts"][0]["digest"]
        assert a["verdicts"][0]["extremal"] == "yes"

    def test_whole_cone(self, tmp_path, spec_file):
        path = spec_file(FiberJoinSpec.surface(3, 5, 2))
        code, rep = _report(tmp_path, ["extremal", path, "--all-rays"])
        (v,) = rep["verdicts"]
        assert code == EXIT_OK and v["ray"] == "all" and v["extremal"] == "yes"

    def test_whole_cone_counterexample(self, tmp_path, spec_file):
        path = spec_file(FiberJoinSpec.surface(7, 2, 1))
        _, rep = _report(tmp_path, ["extremal", path, "--all-rays"])
        assert rep["verdicts"][0]["extremal"] == "no"

    def test_negative_c_as_separate_token(self, spec_file, capsys):
        path = spec_file(FiberJoinSpec.surface(1, 2, 1))
        assert main(["extremal", path, "--c", "-1/3"]) == EXIT_OK
        assert "ray -1/3" in capsys.readouterr().out


class TestOtherCommands:
    def test_csc(self, tmp_path, spec_file):
        path = spec_file(FiberJoinSpec.product(2, 2, ((20, 200), (4, 2))))
        code, rep = _report(tmp_path, ["csc", path])
        assert code == EXIT_OK
        assert rep["csc_polynomial"]["provenance"] == "from-integrals"
        assert any(v["csc"] == "yes" for v in rep["verdicts"])

    def test_quotient(self, tmp_path, spec_file):
        path = spec_file(FiberJoinSpec.cp1xcp1(((3, 1), (1, 2))))
        code, rep = _report(tmp_path, ["quotient", path, "--w", "2,1"])
        assert code == EXIT_OK and "quotient" in rep

    def test_cohomology(self, tmp_path, spec_file):
        path = spec_file(FiberJoinSpec.product(1, 1, ((2, 3), (1, 2))))
        _, rep = _report(tmp_path, ["cohomology", path])
        assert "Z_7" in canonical_json(rep["cohomology"])
        code, rep2 = _report(tmp_path, ["cohomology", path, "--d", "2"], "d2.json")
        assert code == EXIT_OK and rep2["cohomology"] != rep["cohomology"]

    def test_equiv_seeded(self, tmp_path, spec_file):
        path = spec_file(FiberJoinSpec.cp1xcp1(((3, 1), (2, 5))))
        _, a = _report(tmp_path, ["equiv", path, "--samples", "5", "--seed", "7"], "a.json")
        _, b = _report(tmp_path, ["equiv", path, "--samples", "5", "--seed", "7"], "b.json")
        assert a["equivalence"]["holds"] and a["report_digest"] == b["report_digest"]
        assert len(a["verdicts"][0]["certificate"]["samples"]) == 5


class TestDeterminismAndReplay:
    def test_byte_identical_reports(self, tmp_path, spec_file):
        path = spec_file(FiberJoinSpec.surface(4, 7, 3))
        _, a = _report(tmp_path, ["csc", path], "a.json")
        _, b = _report(tmp_path, ["csc", path], "b.json")
        a.pop("timing"), b.pop("timing")
        assert canonical_json(a) == canonical_json(b)

    def test_replay_ok(self, tmp_path, spec_file, capsys):
        path = spec_file(FiberJoinSpec.surface(7, 2, 1))
        _, rep = _report(tmp_path, ["extremal", path, "--c", "-299/301"])
        capsys.readouterr()
        assert main(["replay", str(tmp_path / "out.json")]) == EXIT_OK
        assert "REPLAY OK" in capsys.readouterr().out
        cert_digest = rep["verdicts"][0]["digest"]
        assert main(["replay", str(tmp_path / "out.json"), "--replay", cert_digest]) == EXIT_OK

    def test_replay_detects_tampering(self, tmp_path, spec_file, capsys):
        path = spec_file(FiberJoinSpec.surface(2, 3, 1))
        _, rep = _report(tmp_path, ["extremal", path, "--c", "1/5"])
        rep["verdicts"][0]["digest"] = "0" * 64
        forged = tmp_path / "forged.json"
        forged.write_text(json.dumps(rep))
        assert main(["replay", str(forged)]) == EXIT_REPLAY
        assert "REPLAY MISMATCH" in capsys.readouterr().out

    def test_requested_digest_must_reproduce(self, spec_file):
        path = spec_file(FiberJoinSpec.surface(1, 2, 1))
        assert main(["extremal", path, "--c", "0", "--replay", "f" * 64]) == EXIT_REPLAY

    def test_scan_workers_agree(self, tmp_path, monkeypatch):
        fam = str(FAMILIES / "polystable_g1_4.json")
        monkeypatch.setenv(WORKERS_ENV, "1")
        _, serial = _report(tmp_path, ["scan", fam], "s.json")
        monkeypatch.setenv(WORKERS_ENV, "2")
        _, parallel = _report(tmp_path, ["scan", fam], "p.json")
        assert serial["report_digest"] == parallel["report_digest"]
        assert serial["summary"]["cells"] == 4 and serial["summary"]["cells_with_csc"] == 4


class TestErrors:
    def test_missing_file(self):
        assert main(["csc", "/nonexistent/spec.json"]) == EXIT_INPUT

    def test_invalid_spec_reports_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{\n  "base": {"kind": "CP1xCP1"},\n  "K": [["2", "3"],\n        ["1", "x"]]\n}')
        assert main(["csc", str(bad)]) == EXIT_INPUT
        assert "line" in capsys.readouterr().err

    def test_non_admissible(self, spec_file):
        # k1 = k2 degenerates the data
        path = spec_file(FiberJoinSpec.surface(2, 1, 1))
        assert main(["csc", path]) == EXIT_INPUT

    def test_c_out_of_range(self, spec_file):
        path = spec_file(FiberJoinSpec.surface(2, 2, 1))
        assert main(["extremal", path, "--c", "1"]) == EXIT_INPUT

    def test_bad_tolerance(self, spec_file):
        path = spec_file(FiberJoinSpec.surface(2, 2, 1))
        assert main(["csc", path, "--tolerance", "1/3"]) == EXIT_INPUT


def test_module_entry_point(tmp_path, spec_file):
    path = spec_file(FiberJoinSpec.surface(7, 2, 1))
    proc = subprocess.run([sys.executable, "-m", "sasakicert", "extremal", path, "--c", "-299/301", "--json", "-"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdicts"][0]["extremal"] == "no"
