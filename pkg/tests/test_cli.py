import json

import pytest

from ftlab.cli import main

AND2 = "top T = AND(A,B)\nbasic A p=0.1\nbasic B p=0.2\n"


@pytest.fixture
def and2_file(tmp_path):
    path = tmp_path / "and2.ft"
    path.write_text(AND2)
    return str(path)


class TestAnalyze:
    def test_bdd_with_mcs(self, and2_file, capsys):
        assert main(["analyze", "--input", and2_file, "--method", "bdd", "--mcs"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["top_probability"] == pytest.approx(0.02, abs=1e-15)
        assert out["mcs"] == [["A", "B"]]

    def test_brute_and_bottom_up_agree(self, and2_file, capsys):
        values = []
        for method in ("brute", "bottom-up"):
            assert main(["analyze", "--input", and2_file, "--method", method]) == 0
            values.append(json.loads(capsys.readouterr().out)["top_probability"])
        assert values[0] == pytest.approx(values[1], abs=1e-15)

    def test_parse_error_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "broken.ft"
        bad.write_text("top T = AND(A,X)\nbasic A p=0.1\n")
        assert main(["analyze", "--input", str(bad)]) == 2
        err = capsys.readouterr().err
        assert "UNKNOWN_REF" in err
        assert "1:" in err  # parse position

    def test_missing_file_exit_2(self, capsys):
        assert main(["analyze", "--input", "/does/not/exist.ft"]) == 2

    def test_openpsa_input(self, tmp_path, capsys):
        doc = """<opsa-mef><define-fault-tree name="f">
        <define-gate name="T"><and><basic-event name="A"/><basic-event name="B"/></and></define-gate>
        <define-basic-event name="A"><float value="0.1"/></define-basic-event>
        <define-basic-event name="B"><float value="0.2"/></define-basic-event>
        </define-fault-tree></opsa-mef>"""
        path = tmp_path / "and2.opsa.xml"
        path.write_text(doc)
        assert main(["analyze", "--input", str(path), "--method", "brute"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["top_probability"] == pytest.approx(0.02, abs=1e-15)


class TestMcs:
    def test_lists_cut_sets(self, and2_file, capsys):
        assert main(["mcs", "--input", and2_file]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out == {"count": 1, "mcs": [["A", "B"]]}


class TestGenerate:
    def test_deterministic_stdout(self, capsys):
        argv = ["generate", "--seed", "7", "--basic-events", "5", "--gates", "3"]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        assert capsys.readouterr().out == first
        assert first.startswith("top TOP")

    def test_out_file_round_trips(self, tmp_path, capsys):
        out_path = tmp_path / "gen.ft"
        argv = [
            "generate", "--seed", "3", "--basic-events", "6", "--gates", "2",
            "--share-prob", "0.5", "--out", str(out_path),
        ]
        assert main(argv) == 0
        assert main(["analyze", "--input", str(out_path), "--method", "bdd"]) == 0
        assert json.loads(capsys.readouterr().out)["top_probability"] >= 0.0

    def test_infeasible_exit_2(self, capsys):
        argv = ["generate", "--seed", "1", "--basic-events", "50", "--gates", "1"]
        assert main(argv) == 2


class TestUsage:
    def test_unknown_command_exit_1(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_missing_required_flag_exit_1(self, capsys):
        assert main(["analyze"]) == 1

    def test_help_exit_0(self, capsys):
        assert main(["--help"]) == 0
