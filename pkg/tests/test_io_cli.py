"""Problem/report documents and the command-line front end."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from t2soco import problem_io
from t2soco.cli import main
from t2soco.cones import BlockShape
from t2soco.problem_io import ProblemFormatError, parse_problem
from t2soco.solver import generate_instance


def _doc_dict(sizes=(3,), m=1, seed=0, with_start=True):
    shape = BlockShape(sizes)
    inst = generate_instance(shape, m, seed)
    doc = {
        "m": m,
        "blocks": list(sizes),
        "A": [float(v) for v in inst.problem.A.ravel()],
        "b": [float(v) for v in inst.problem.b],
        "c": [float(v) for v in inst.problem.c],
    }
    if with_start:
        doc["x0"] = [float(v) for v in inst.x0.data]
        doc["y0"] = [float(v) for v in inst.y0]
        doc["s0"] = [float(v) for v in inst.s0.data]
    return doc


class TestParsing:
    def test_valid_document(self):
        doc = parse_problem(_doc_dict((3, 4), 3))
        assert doc.m == 3
        assert doc.blocks == (3, 4)
        assert doc.A.shape == (3, 7)
        assert doc.is_type2()
        assert doc.start() is not None

    def test_missing_key_names_field(self):
        d = _doc_dict()
        del d["b"]
        with pytest.raises(ProblemFormatError, match='"b"'):
            parse_problem(d)

    def test_wrong_length_names_field(self):
        d = _doc_dict()
        d["c"] = d["c"][:-1]
        with pytest.raises(ProblemFormatError, match='"c"'):
            parse_problem(d)

    def test_partial_start_rejected(self):
        d = _doc_dict()
        del d["y0"]
        with pytest.raises(ProblemFormatError, match="y0"):
            parse_problem(d)

    def test_type2_blocks_must_be_at_least_two(self):
        d = _doc_dict()
        d["blocks"] = [1]
        d["A"] = d["A"][:1]
        d["c"] = d["c"][:1]
        d["x0"], d["s0"] = [1.0], [1.0]
        with pytest.raises(ProblemFormatError, match="size >= 2"):
            parse_problem(d)

    def test_unknown_cone_tag(self):
        d = _doc_dict()
        d["cones"] = ["weird"]
        with pytest.raises(ProblemFormatError, match="weird"):
            parse_problem(d)

    def test_lorentz_tag_size_mismatch(self):
        d = _doc_dict()
        d["cones"] = ["lorentz:5"]
        with pytest.raises(ProblemFormatError, match="lorentz:5"):
            parse_problem(d)

    def test_nonfinite_rejected(self):
        d = _doc_dict()
        d["b"] = [float("nan")]
        with pytest.raises(ProblemFormatError, match='"b"'):
            parse_problem(d)


class TestSerialization:
    def test_roundtrip_lossless(self):
        rng = np.random.default_rng(1)
        values = list(rng.standard_normal(100)) + [1e-300, 1e300, 0.1, 1 / 3]
        text = problem_io.dump_json(values)
        back = json.loads(text)
        assert back == values

    def test_seventeen_significant_digits(self):
        text = problem_io.dump_json([1 / 3])
        assert "0.33333333333333331" in text

    def test_problem_document_roundtrip(self):
        doc = parse_problem(_doc_dict((2, 5), 4, seed=3))
        text = problem_io.emit_problem(doc)
        back = parse_problem(json.loads(text))
        assert back.m == doc.m and back.blocks == doc.blocks
        assert np.array_equal(back.A, doc.A)
        assert np.array_equal(back.b, doc.b)
        assert np.array_equal(back.c, doc.c)
        assert np.array_equal(back.x0, doc.x0)


class TestCli:
    def _write(self, tmp_path, name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)

    def test_solve_converges(self, tmp_path):
        path = self._write(tmp_path, "p.json", _doc_dict((3, 4), 3))
        runner = CliRunner()
        result = runner.invoke(main, ["solve", path])
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["status"] == "Converged"
        assert report["gap"] < 1e-6

    def test_solve_iteration_cap_exit_code(self, tmp_path):
        path = self._write(tmp_path, "p.json", _doc_dict((3, 4), 3))
        runner = CliRunner()
        result = runner.invoke(main, ["solve", path, "--max-outer", "1"])
        assert result.exit_code == 2

    def test_solve_input_error_exit_code(self, tmp_path):
        bad = _doc_dict()
        del bad["b"]
        path = self._write(tmp_path, "bad.json", bad)
        runner = CliRunner()
        result = runner.invoke(main, ["solve", path])
        assert result.exit_code == 1
        assert '"b"' in result.output

    def test_solve_report_includes_bound_when_requested(self, tmp_path):
        path = self._write(tmp_path, "p.json", _doc_dict((3,), 1))
        runner = CliRunner()
        result = runner.invoke(
            main,
            ["solve", path, "--bound-kappa", "0.02", "--bound-gamma", "1.0"],
        )
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["bound"]["constants"]["kappa"] == pytest.approx(0.02)
        assert report["iterations"]["inner_total"] <= report["bound"]["value"]

    def test_solve_without_start_uses_unit_if_feasible(self, tmp_path):
        # generated instances are built so the unit element is feasible
        path = self._write(tmp_path, "p.json", _doc_dict((3, 4), 3, with_start=False))
        runner = CliRunner()
        result = runner.invoke(main, ["solve", path])
        assert result.exit_code == 0

    def test_solve_without_start_rejects_infeasible_unit(self, tmp_path):
        d = _doc_dict((3,), 1, with_start=False)
        d["b"] = [d["b"][0] + 1.0]
        path = self._write(tmp_path, "p.json", d)
        runner = CliRunner()
        result = runner.invoke(main, ["solve", path])
        assert result.exit_code == 1
        assert "not feasible" in result.output

    def test_gen_deterministic(self):
        runner = CliRunner()
        args = ["gen", "--blocks", "3", "--m", "1", "--seed", "7"]
        out1 = runner.invoke(main, args).stdout
        out2 = runner.invoke(main, args).stdout
        assert out1 == out2

    def test_gen_output_passes_solve(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(main, ["gen", "--blocks", "3,4", "--m", "2", "--seed", "1"])
        assert result.exit_code == 0
        path = tmp_path / "g.json"
        path.write_text(result.stdout)
        assert runner.invoke(main, ["solve", str(path)]).exit_code == 0

    def test_gen_known_solution_sidecar(self, tmp_path):
        runner = CliRunner()
        out = str(tmp_path / "k.json")
        result = runner.invoke(
            main,
            ["gen", "--blocks", "3,4", "--m", "3", "--seed", "2",
             "--known-solution", "--out", out],
        )
        assert result.exit_code == 0
        sidecar = json.loads((tmp_path / "k.json.solution.json").read_text())
        assert set(sidecar) == {"x_star", "y_star", "s_star", "objective"}

    def test_gen_rejects_m_at_least_n(self):
        runner = CliRunner()
        result = runner.invoke(main, ["gen", "--blocks", "3", "--m", "3"])
        assert result.exit_code == 1

    def test_transform_emits_tags_and_blowup(self, tmp_path):
        path = self._write(tmp_path, "p.json", _doc_dict((3,), 1))
        runner = CliRunner()
        result = runner.invoke(main, ["transform", path])
        assert result.exit_code == 0
        body_start = result.output.index("{")
        doc = json.loads(result.output[body_start:])
        assert doc["cones"] == ["nonneg"] * 4 + ["lorentz:2"]
        assert "size (1, 3) -> (4, 6)" in result.output

    def test_transform_rejects_already_transformed(self, tmp_path):
        path = self._write(tmp_path, "p.json", _doc_dict((3,), 1))
        runner = CliRunner()
        out = str(tmp_path / "t.json")
        assert runner.invoke(main, ["transform", path, "--out", out]).exit_code == 0
        result = runner.invoke(main, ["transform", out])
        assert result.exit_code == 1
        assert "type2" in result.output

    def test_transform_check_point(self, tmp_path):
        d = _doc_dict((3,), 1)
        path = self._write(tmp_path, "p.json", d)
        pt = self._write(tmp_path, "pt.json", d["x0"])
        runner = CliRunner()
        result = runner.invoke(main, ["transform", path, "--check-point", pt])
        assert result.exit_code == 0
        assert "objective before" in result.output

    def test_check_runs_clean(self):
        runner = CliRunner()
        result = runner.invoke(main, ["check", "--trials", "30", "--seed", "1"])
        assert result.exit_code == 0
        assert "nt-symmetrization" in result.output

    def test_check_zero_trials_empty_summary(self):
        runner = CliRunner()
        result = runner.invoke(main, ["check", "--trials", "0"])
        assert result.exit_code == 0
        assert result.output.strip() == ""
