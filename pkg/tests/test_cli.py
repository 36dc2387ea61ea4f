import json

import pytest
from pytest import raises

from ffmonodromy.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main, write_atomic
from ffmonodromy.config import RunConfig, Tolerances
from ffmonodromy.errors import ValidationError


def run_json(tmp_path, argv):
    out = tmp_path / "result.json"
    code = main(argv + ["--out", str(out)])
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1
    assert set(doc) == {"schema_version", "config", "result", "diagnostics", "provenance"}
    return doc


class TestSubcommands:
    def test_monodromy(self, tmp_path):
        trace = tmp_path / "trace.csv"
        doc = run_json(tmp_path, ["monodromy", "--system", "pendulum", "--points", "32", "--trace", str(trace)])
        assert doc["result"]["matrix"] == [[1, 1], [0, 1]]
        assert trace.read_text().splitlines()[0] == "index,F1,F2,T,Theta,error_estimate"
        assert "subdivision_depth" in doc["diagnostics"]

    def test_monodromy_polygon(self, tmp_path):
        doc = run_json(tmp_path, ["monodromy", "--polygon", "0.7,-0.3,1.3,-0.3,1.3,0.3,0.7,0.3",
                                  "--center", "1,0"])
        assert doc["result"]["matrix"] == [[1, 1], [0, 1]]

    def test_signed(self, tmp_path):
        doc = run_json(tmp_path, ["monodromy-nh", "--signs", "+,-"])
        assert doc["result"]["matrix"] == [[1, 0], [0, 1]]

    def test_compose(self, tmp_path):
        doc = run_json(tmp_path, ["compose", "--a", "1,1,0,1", "--b", "1,2,0,1"])
        assert doc["result"]["matrix"] == [[1, 3], [0, 1]]

    def test_embed(self, tmp_path):
        doc = run_json(tmp_path, ["embed3", "--matrix", "1,2,0,1"])
        assert doc["result"]["matrix"] == [[1, 2, 0], [0, 1, 0], [0, 0, 1]]

    def test_affine(self, tmp_path):
        doc = run_json(tmp_path, ["affine", "--k", "3"])
        assert doc["result"]["matrix"] == [[1, 3], [0, 1]]
        assert "complex" in doc["result"]

    def test_classify(self, tmp_path):
        doc = run_json(tmp_path, ["classify", "--system", "modified", "--R", "1"])
        assert doc["result"]["report"]["classification"] == "degenerate"

    def test_census(self, tmp_path):
        doc = run_json(tmp_path, ["census", "--system", "pendulum2"])
        assert doc["result"]["report"]["k"] == 2

    def test_dh(self, tmp_path):
        doc = run_json(tmp_path, ["dh", "--system", "pendulum", "--cutoff", "1.5", "--mc-samples", "200000"])
        rep = doc["result"]["report"]
        assert rep["k_fitted"] == 1
        assert {"jump", "residual_max", "normalization", "seed"} <= set(rep)

    def test_bs(self, tmp_path):
        doc = run_json(tmp_path, ["bs", "--system", "pendulum", "--hbar", "0.05"])
        assert doc["result"]["lattice"]["defect"] == 1


class TestErrors:
    def test_basis_mismatch(self, capsys):
        code = main(["compose", "--a", "1,1,0,1", "--b", "1,1,0,1", "--basis-b", "other"])
        assert code == EXIT_VALIDATION
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["type"] == "BasisMismatch"

    def test_loop_too_close(self, capsys):
        assert main(["monodromy", "--radius", "0.0005"]) == EXIT_VALIDATION

    def test_numerical_error_code(self, capsys):
        assert main(["bs", "--center", "3,0", "--loop-radius", "0.3"]) == EXIT_NUMERICAL
        assert json.loads(capsys.readouterr().err)["error"]["type"] == "CellTrackingLost"

    def test_bad_config_key(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        assert main(["census", "--config", str(cfg)]) == EXIT_VALIDATION

    def test_argparse_rejects_bad_sign(self):
        with raises(SystemExit) as exc:
            main(["monodromy-nh", "--signs", "+,x"])
        assert exc.value.code == 2


class TestConfig:
    def test_config_file_with_override(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"k": 2, "seed": 9}))
        doc = run_json(tmp_path, ["affine", "--config", str(cfg), "--k", "4"])
        assert doc["result"]["matrix"] == [[1, 4], [0, 1]]
        assert doc["provenance"]["seed"] == 9

    def test_deterministic_output(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            assert main(["census", "--system", "pendulum", "--out", str(path)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_validation(self):
        with raises(ValidationError):
            RunConfig("nope").validate()
        with raises(ValidationError):
            RunConfig("monodromy", orientation=2).validate()
        with raises(ValidationError):
            Tolerances(delta=0.0).validate()

    def test_round_trip(self):
        cfg = RunConfig("dh", cutoff=2.0)
        again = RunConfig.from_json(json.dumps(cfg.to_dict()))
        assert again == cfg

    def test_write_atomic(self, tmp_path):
        path = tmp_path / "x.json"
        write_atomic(str(path), "first")
        write_atomic(str(path), "second")
        assert path.read_text() == "second"
        assert [p.name for p in tmp_path.iterdir()] == ["x.json"]
