import json

import numpy as np
import pytest

from qmle import io, problems, solvers
from qmle.cli import cli_main
from qmle.errors import ParseError, ValidationError

from conftest import P0, P1


def assert_same_instance(a, b):
    assert np.array_equal(a.ensemble.elements, b.ensemble.elements)
    assert np.array_equal(a.ensemble.weights, b.ensemble.weights)
    if a.true_state is None:
        assert b.true_state is None
    else:
        assert np.array_equal(a.true_state, b.true_state)
    assert (a.counts is None) == (b.counts is None)
    if a.counts is not None:
        assert np.array_equal(a.counts, b.counts)


class TestProblemFile:
    def test_cycle_round_trip(self, tmp_path):
        inst = problems.rrr_cycle_instance()
        io.save_problem(inst, tmp_path / "p.json")
        assert_same_instance(inst, io.load_problem(tmp_path / "p.json"))

    @pytest.mark.parametrize("seed", range(5))
    def test_generated_round_trip(self, tmp_path, seed):
        inst = problems.gen_instance(5, 3, 300, rank=2, seed=seed)
        io.save_problem(inst, tmp_path / "p.json")
        back = io.load_problem(tmp_path / "p.json")
        assert_same_instance(inst, back)
        assert back.metadata["seed"] == seed

    def _write(self, tmp_path, data):
        path = tmp_path / "p.json"
        path.write_text(json.dumps(data))
        return path

    def _base(self):
        return {
            "format_version": 1,
            "dim": 2,
            "elements": [io.encode_matrix(P0), io.encode_matrix(P1)],
        }

    def test_bad_weights(self, tmp_path):
        data = self._base() | {"weights": [0.5, 0.4]}
        with pytest.raises(ValidationError):
            io.load_problem(self._write(tmp_path, data))

    def test_counts_normalized(self, tmp_path):
        data = self._base() | {"counts": [3, 1]}
        inst = io.load_problem(self._write(tmp_path, data))
        np.testing.assert_array_equal(inst.ensemble.weights, [0.75, 0.25])

    def test_weights_and_counts_exclusive(self, tmp_path):
        data = self._base() | {"counts": [3, 1], "weights": [0.75, 0.25]}
        with pytest.raises(ValidationError):
            io.load_problem(self._write(tmp_path, data))

    def test_dimension_inconsistency(self, tmp_path):
        data = self._base() | {"weights": [0.5, 0.5], "dim": 3}
        with pytest.raises(ValidationError):
            io.load_problem(self._write(tmp_path, data))

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text('{\n  "format_version": 1,\n  "dim": 2,,\n}')
        with pytest.raises(ParseError, match="line 3"):
            io.load_problem(path)


class TestTrace:
    def test_single_record(self, tmp_path):
        rep = solvers.run(problems.rrr_cycle_instance().ensemble, solvers.SolverOptions("qem", 1))
        io.write_trace(rep, tmp_path / "t.csv")
        lines = (tmp_path / "t.csv").read_text().splitlines()
        assert len(lines) == 2
        assert lines[0] == ",".join(io.TRACE_COLUMNS)

    def test_round_trip_exact(self, tmp_path):
        inst = problems.gen_instance(3, 2, 500, seed=1)
        rep = solvers.run(inst.ensemble, solvers.SolverOptions("qem", 40, 0.0))
        io.write_trace(rep, tmp_path / "t.csv")
        table = io.read_trace(tmp_path / "t.csv")
        assert len(table["k"]) == len(rep.records)
        for i, name in enumerate(io.TRACE_COLUMNS):
            assert np.array_equal(table[name], np.array([r[i] for r in rep.records]))

    def test_qem_tau_recorded(self, tmp_path):
        rep = solvers.run(problems.rrr_cycle_instance().ensemble, solvers.SolverOptions("qem", 50, 0.0))
        io.write_trace(rep, tmp_path / "t.csv")
        assert np.all(io.read_trace(tmp_path / "t.csv")["tau"] <= 1 + 1e-12)

    def test_deterministic_rerun(self, tmp_path):
        inst = problems.gen_instance(3, 2, 500, seed=2)
        for name in ("a.csv", "b.csv"):
            rep = solvers.run(inst.ensemble, solvers.SolverOptions("qem", 30, 0.0))
            io.write_trace(rep, tmp_path / name)
        a, b = io.read_trace(tmp_path / "a.csv"), io.read_trace(tmp_path / "b.csv")
        for name in io.TRACE_COLUMNS[:-1]:
            assert np.array_equal(a[name], b[name])


class TestCli:
    def test_solve_cycle_instance(self, tmp_path, capsys):
        io.save_problem(problems.rrr_cycle_instance(), tmp_path / "p.json")
        code = cli_main(["solve", "--algorithm", "qem", "--tol", "1e-8", str(tmp_path / "p.json")])
        assert code == 0
        out = capsys.readouterr().out
        cert = float(out.split("certificate:")[1].split()[0])
        assert cert <= 1e-8
        assert "stop_reason: certificate_met" in out

    def test_unknown_algorithm(self, tmp_path):
        io.save_problem(problems.rrr_cycle_instance(), tmp_path / "p.json")
        assert cli_main(["solve", "--algorithm", "newton", str(tmp_path / "p.json")]) == 2

    def test_pipeline(self, tmp_path):
        p = tmp_path / "p.json"
        assert cli_main(["gen", "--dim", "4", "--bases", "3", "--shots", "1000", "--seed", "1", "--out", str(p)]) == 0
        t = tmp_path / "t.csv"
        assert cli_main(["solve", "--max-iters", "200", "--trace", str(t), str(p)]) == 0
        assert len(io.read_trace(t)["k"]) == 200

    def test_cli_matches_library(self, tmp_path):
        p, t = tmp_path / "p.json", tmp_path / "t.csv"
        assert cli_main(["gen", "--dim", "3", "--bases", "2", "--shots", "500", "--seed", "9", "--out", str(p)]) == 0
        assert cli_main(["solve", "--algorithm", "drrr-armijo", "--max-iters", "30", "--tol", "0", "--trace", str(t), str(p)]) == 0
        inst = problems.gen_instance(3, 2, 500, rank=1, seed=9)
        rep = solvers.run(inst.ensemble, solvers.SolverOptions("drrr_armijo", 30, 0.0))
        table = io.read_trace(t)
        assert np.array_equal(table["f_rho"], [r.objective_at_rho for r in rep.records])

    def test_compare(self, tmp_path, capsys):
        p = tmp_path / "p.json"
        io.save_problem(problems.rrr_cycle_instance(), p)
        code = cli_main(["compare", "--algorithms", "qem,rrr,drrr-exact,drrr-armijo", "--max-iters", "200",
                         "--trace-dir", str(tmp_path / "traces"), str(p)])
        assert code == 0
        out = capsys.readouterr().out
        assert "rrr" in out and "max_iters" in out
        for alg in ("qem", "rrr", "drrr_exact", "drrr_armijo"):
            assert (tmp_path / "traces" / f"{alg}.csv").exists()

    def test_compare_unknown(self, tmp_path):
        io.save_problem(problems.rrr_cycle_instance(), tmp_path / "p.json")
        assert cli_main(["compare", "--algorithms", "qem,bogus", str(tmp_path / "p.json")]) == 2

    def test_missing_file(self, tmp_path):
        assert cli_main(["solve", str(tmp_path / "nope.json")]) == 2

    def test_malformed_file(self, tmp_path):
        p = tmp_path / "p.json"
        p.write_text("{")
        assert cli_main(["solve", str(p)]) == 2

    def test_solver_error_exit_code(self, tmp_path):
        # cover on a non-commuting ensemble is a solver failure
        inst = problems.gen_instance(3, 2, 500, seed=0)
        io.save_problem(inst, tmp_path / "p.json")
        assert cli_main(["solve", "--algorithm", "cover", str(tmp_path / "p.json")]) == 1

    def test_portfolio(self, tmp_path, capsys):
        csv = tmp_path / "r.csv"
        csv.write_text("2,1\n1,2\n")
        assert cli_main(["portfolio", "--returns", str(csv), "--tol", "1e-10"]) == 0
        out = capsys.readouterr().out
        weights = [float(v) for v in out.split("weights:")[1].split("\n")[0].split()]
        np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-9)

    def test_portfolio_negative_returns(self, tmp_path):
        csv = tmp_path / "r.csv"
        csv.write_text("1,-1\n")
        assert cli_main(["portfolio", "--returns", str(csv)]) == 2
