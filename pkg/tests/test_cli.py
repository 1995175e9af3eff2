"""
Tests for the polyloc command line.

Each test writes its inputs under tmp_path and calls cli.main with an
argument list; output is read back through capsys.
"""

import sys
import os
import json
import math

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cli import EXIT_FORBIDDEN, EXIT_INPUT, EXIT_OK, main

OUTER_SIGNS = {"f": "+--+++++", "g": "++++++++", "h": "-+-+++++"}


def _template(**overrides) -> dict:
    """Bell-diagonal triangle with phi+ weight $x and the outer-source triple."""
    base = {
        "n": 3,
        "sources": [{"kind": "bell_diagonal", "weights": [0.0, "$x", 0.0]}] * 3,
        "povms": [{"kind": "product"}] * 3,
        "signs": OUTER_SIGNS,
        "params": {"x": 0.5},
    }
    base.update(overrides)
    return base


def _write(tmp_path, name: str, payload) -> str:
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestEvaluateCommand:
    """Tests for polyloc evaluate and search-signs."""

    def test_evaluate_prints_json(self, tmp_path, capsys, bell_network):
        """The summary carries I1, I2 and s."""
        spec = _write(tmp_path, "net.json", bell_network)
        assert main(["evaluate", spec]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert math.isclose(data["result"]["i2"], 0.125, abs_tol=1e-12)
        assert math.isclose(data["result"]["s_value"], 1 / math.sqrt(2), rel_tol=1e-9)

    def test_evaluate_writes_table(self, tmp_path, capsys, bell_network):
        """--table writes 64 rows plus a header."""
        spec = _write(tmp_path, "net.json", bell_network)
        table = tmp_path / "table.csv"
        assert main(["evaluate", spec, "--table", str(table)]) == EXIT_OK
        lines = table.read_text().splitlines()
        assert lines[0] == "o1,o2,o3,probability"
        assert len(lines) == 65

    def test_search_signs_command(self, tmp_path, capsys, bell_network):
        """Sign search reaches sqrt 2 on three phi+."""
        spec = _write(tmp_path, "net.json", bell_network)
        assert main(["search-signs", spec]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert math.isclose(data["result"]["s_value"], math.sqrt(2), rel_tol=1e-9)

    def test_invalid_spec_exits_1(self, tmp_path, capsys, bell_network):
        """A validation error is reported on stderr with exit status 1."""
        spec = _write(tmp_path, "net.json", dict(bell_network, n=2))
        assert main(["evaluate", spec]) == EXIT_INPUT
        assert capsys.readouterr().err.startswith("error:")

    def test_missing_file_exits_1(self, tmp_path, capsys):
        """An unreadable spec path exits 1."""
        assert main(["evaluate", str(tmp_path / "absent.json")]) == EXIT_INPUT

    def test_malformed_json_exits_1(self, tmp_path, capsys):
        """Broken JSON exits 1."""
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["evaluate", str(path)]) == EXIT_INPUT


class TestSweepCommand:
    """Tests for polyloc sweep."""

    def _spec(self, tmp_path) -> str:
        return _write(
            tmp_path,
            "sweep.json",
            {"network": _template(), "axes": [{"name": "x", "lo": 0.2, "hi": 0.8, "steps": 4}]},
        )

    def test_sweep_to_stdout(self, tmp_path, capsys):
        """Without -o the CSV goes to stdout."""
        assert main(["sweep", self._spec(tmp_path)]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "x,i1,i2,s_value,violated"
        assert [line.split(",")[-1] for line in lines[1:]] == ["false", "false", "true", "true"]

    def test_sweep_resumes(self, tmp_path, capsys):
        """A second run with the same spec reuses every row."""
        spec = self._spec(tmp_path)
        output = tmp_path / "out.csv"
        assert main(["sweep", spec, "-o", str(output)]) == EXIT_OK
        first = json.loads(capsys.readouterr().out)
        assert first["rows"] == 4
        assert first["reused"] == 0
        assert first["violated"] == 2
        assert (tmp_path / "out.csv.spec.json").exists()

        assert main(["sweep", spec, "-o", str(output)]) == EXIT_OK
        second = json.loads(capsys.readouterr().out)
        assert second["reused"] == 4
        assert output.read_text().count("\n") == 5

    def test_sweep_gnuplot(self, tmp_path, capsys):
        """--gnuplot writes a script next to the CSV."""
        output = tmp_path / "region.csv"
        assert main(["sweep", self._spec(tmp_path), "-o", str(output), "--gnuplot"]) == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert summary["gnuplot"].endswith("region.gp")
        assert (tmp_path / "region.gp").exists()


class TestScanCommands:
    """Tests for threshold, maximize, entanglement-detect and compare-linear."""

    def test_threshold(self, tmp_path, capsys):
        """s = sqrt(2x) crosses 1 at x = 0.5."""
        spec = _write(tmp_path, "net.json", _template())
        assert main(["threshold", spec, "--parameter", "x", "--lo", "0.2", "--hi", "0.9"]) == EXIT_OK
        assert math.isclose(json.loads(capsys.readouterr().out)["value"], 0.5, abs_tol=1e-5)

    def test_threshold_without_crossing(self, tmp_path, capsys):
        """No sign change exits 1."""
        spec = _write(tmp_path, "net.json", _template())
        assert main(["threshold", spec, "--parameter", "x", "--lo", "0.6", "--hi", "0.9"]) == EXIT_INPUT

    def test_maximize_network(self, tmp_path, capsys):
        """The maximum of sqrt(2x) on [0.1, 0.9] is sqrt 1.8."""
        spec = _write(tmp_path, "net.json", _template())
        assert main(["maximize", "--network", spec, "--box", "x=0.1:0.9", "--points", "5"]) == EXIT_OK
        assert math.isclose(json.loads(capsys.readouterr().out)["value"], math.sqrt(1.8), rel_tol=1e-9)

    def test_maximize_bad_box(self, tmp_path, capsys):
        """Box entries must look like name=lo:hi."""
        spec = _write(tmp_path, "net.json", _template())
        assert main(["maximize", "--network", spec, "--box", "x=0.1"]) == EXIT_INPUT

    def test_entanglement_detect(self, tmp_path, capsys):
        """Three phi+ with the outer-source triple are certified."""
        payload = {"sources": [{"kind": "bell", "label": "phi+"}] * 3, "povm": {"kind": "product"}, "signs": OUTER_SIGNS}
        spec = _write(tmp_path, "ent.json", payload)
        assert main(["entanglement-detect", spec]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["verdict"] == "all-entangled"

    def test_compare_linear(self, tmp_path, capsys):
        """A CHSH-local Bell-diagonal source is detected only by the triangle."""
        network = _template(sources=[{"kind": "bell_diagonal", "weights": [0.2, 0.6, 0.0, 0.2]}] * 3, params={})
        spec = _write(tmp_path, "net.json", network)
        assert main(["compare-linear", spec]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["triangle_only"] is True
        assert math.isclose(data["linear_value"], math.sqrt(0.432), rel_tol=1e-9)


class TestLhvCommand:
    """Tests for polyloc lhv-test."""

    def test_trivial_outer_source_exits_0(self, tmp_path, capsys):
        """No failures with source 2 trivial."""
        argv = ["lhv-test", "--models", "20", "--triples", "5", "--trivial-source", "2", "--dump-dir", str(tmp_path / "d")]
        assert main(argv) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["failures"] == 0
        assert "archived" not in data
        assert not (tmp_path / "d").exists()

    def test_cardinality_cap_exits_1(self, tmp_path, capsys):
        """max-cardinality above 8 is invalid input."""
        assert main(["lhv-test", "--max-cardinality", "9", "--dump-dir", str(tmp_path / "d")]) == EXIT_INPUT


class TestDiscrepancyCommand:
    """Tests for polyloc discrepancy-report."""

    def test_exact_targets_pass(self, capsys):
        """The noisy-gate matrix target passes without a ledger entry."""
        assert main(["discrepancy-report", "--target", "noisy-gate-matrix", "--grid", "4"]) == EXIT_OK
        (report,) = json.loads(capsys.readouterr().out)
        assert report["passed"] is True

    def test_empty_ledger_fails_known_targets(self, tmp_path, capsys):
        """Without the ledger a mismatched target exits 2."""
        ledger = tmp_path / "ledger"
        ledger.write_text("# nothing known\n")
        argv = ["discrepancy-report", "--target", "square-network", "--grid", "5", "--ledger", str(ledger)]
        assert main(argv) == EXIT_FORBIDDEN

    def test_unknown_target_rejected_by_parser(self, capsys):
        """argparse refuses target ids outside the catalogue."""
        with pytest.raises(SystemExit):
            main(["discrepancy-report", "--target", "nope"])
