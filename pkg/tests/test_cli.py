import json

import numpy as np
import pytest

import hardywitness as hw
from hardywitness.cli import main, machine_dumps, parse_split

SPLIT = hw.Bipartition((0,), (1,))


@pytest.fixture()
def state_file(tmp_path, state_08_02):
    path = tmp_path / "state.json"
    hw.dump_state(state_08_02, path)
    return str(path)


@pytest.fixture()
def bell_file(tmp_path):
    path = tmp_path / "bell.json"
    hw.dump_state(hw.make_state([2, 2], [1, 0, 0, 1]), path)
    return str(path)


@pytest.fixture()
def tri_file(tmp_path, tripartite_example):
    path = tmp_path / "tri.json"
    hw.dump_state(tripartite_example, path)
    return str(path)


class TestParsing:
    def test_parse_split(self):
        split = parse_split("1,2|3")
        assert split.side1 == (0, 1) and split.side2 == (2,)

    def test_parse_split_rejects_garbage(self):
        for spec in ("1,2", "0|1", "a|b", "1|2|3"):
            with pytest.raises(ValueError):
                parse_split(spec)

    def test_machine_dumps_floats(self):
        text = machine_dumps({"x": 4 / 45, "n": 3, "s": "hi", "b": True, "v": None})
        assert text == '{"x": 0.0888888888889, "n": 3, "s": "hi", "b": true, "v": null}'
        assert json.loads(text)["x"] == pytest.approx(4 / 45, abs=1e-12)


class TestSchmidtCommand:
    def test_human(self, state_file, capsys):
        assert main(["schmidt", "--state", state_file, "--split", "1|2"]) == 0
        out = capsys.readouterr().out
        assert "0.894427191" in out and "0.4472135955" in out
        assert "(0,1)" in out

    def test_machine(self, state_file, capsys):
        assert (
            main(["schmidt", "--state", state_file, "--split", "1|2",
                  "--format", "machine"]) == 0
        )
        doc = json.loads(capsys.readouterr().out)
        assert doc["rank"] == 2
        assert doc["usable_pair"] is True

    def test_ghz_no_usable_pair(self, tmp_path, capsys):
        path = tmp_path / "ghz.json"
        hw.dump_state(hw.ghz_state(3), path)
        assert main(["schmidt", "--state", str(path), "--split", "1|2,3"]) == 0
        assert "no usable pair" in capsys.readouterr().out


class TestWitnessCommand:
    def test_human_applicable(self, state_file, capsys):
        assert main(["witness", "--state", state_file, "--split", "1|2"]) == 0
        out = capsys.readouterr().out
        assert "verdict: applicable" in out
        assert "0.0888888888889" in out

    def test_machine_fields(self, state_file, capsys):
        assert (
            main(["witness", "--state", state_file, "--split", "1|2",
                  "--format", "machine"]) == 0
        )
        doc = json.loads(capsys.readouterr().out)
        assert doc["applicable"] is True
        assert doc["pair"] == [0, 1]
        assert len(doc["zero_conditions"]) == 5
        assert doc["hardy_measured"] == pytest.approx(4 / 45, abs=1e-9)
        assert doc["hardy_closed_form"] == pytest.approx(4 / 45, abs=1e-9)
        assert len(doc["table"]) == 4
        assert len(doc["decomposition_residuals"]) == 3

    def test_not_applicable(self, bell_file, capsys):
        assert main(["witness", "--state", bell_file, "--split", "1|2"]) == 0
        assert "not applicable" in capsys.readouterr().out

    def test_multipartite_mode(self, tri_file, capsys):
        assert (
            main(["witness", "--state", tri_file, "--mode", "multipartite",
                  "--format", "machine"]) == 0
        )
        doc = json.loads(capsys.readouterr().out)
        assert doc["applicable"] is True
        assert doc["combined_probability"] == pytest.approx(2 / 45, abs=1e-9)
        assert doc["steps"][0]["subsystem"] == 3
        assert doc["final_report"]["hardy_closed_form"] == pytest.approx(
            4 / 45, abs=1e-9
        )

    def test_stable_output_bytes(self, state_file, capsys):
        main(["witness", "--state", state_file, "--split", "1|2", "--format", "machine"])
        first = capsys.readouterr().out
        main(["witness", "--state", state_file, "--split", "1|2", "--format", "machine"])
        assert capsys.readouterr().out == first


class TestCertifyCommand:
    def test_infeasible_exit_code(self, state_file, capsys):
        code = main(["certify", "--state", state_file, "--split", "1|2"])
        assert code == 3
        assert "infeasible" in capsys.readouterr().out

    def test_machine_tree(self, state_file, capsys):
        code = main(["certify", "--state", state_file, "--split", "1|2",
                     "--format", "machine"])
        assert code == 3
        doc = json.loads(capsys.readouterr().out)
        assert doc["verdict"] == "infeasible"
        assert doc["margin"] > 1e-9
        assert doc["dual"]

    def test_feasible_product_state(self, tmp_path, capsys):
        # certified observables come from the state's own (rank-1) split,
        # so use the degenerate bell pair instead
        path = tmp_path / "bell.json"
        hw.dump_state(hw.make_state([2, 2], [1, 0, 0, 1]), path)
        code = main(["certify", "--state", str(path), "--split", "1|2",
                     "--pair", "0,1", "--allow-degenerate"])
        assert code == 0
        assert "feasible" in capsys.readouterr().out

    def test_degenerate_pair_without_flag_is_usage_error(self, bell_file, capsys):
        code = main(["certify", "--state", bell_file, "--split", "1|2",
                     "--pair", "0,1"])
        assert code == 1
        assert "eps_deg" in capsys.readouterr().err

    def test_not_applicable_auto(self, bell_file, capsys):
        assert main(["certify", "--state", bell_file, "--split", "1|2"]) == 0
        assert "not applicable" in capsys.readouterr().out

    def test_idealized(self, state_file, capsys):
        code = main(["certify", "--state", state_file, "--split", "1|2",
                     "--idealized", "--format", "machine"])
        assert code == 3
        doc = json.loads(capsys.readouterr().out)
        assert doc["idealized"] is True

    def test_multipartite(self, tri_file, capsys):
        code = main(["certify", "--state", tri_file, "--mode", "multipartite"])
        assert code == 3

    def test_multipartite_not_applicable_machine(self, tmp_path, capsys):
        path = tmp_path / "ghz.json"
        hw.dump_state(hw.ghz_state(3), path)
        code = main(["certify", "--state", str(path), "--mode", "multipartite",
                     "--format", "machine"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["verdict"] == "not-applicable"

    def test_grouped_split(self, tmp_path, capsys):
        rng = np.random.default_rng(5150)
        amps = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        path = tmp_path / "grouped.json"
        hw.dump_state(hw.make_state((2, 3, 2), amps), path)
        code = main(["witness", "--state", str(path), "--split", "1,3|2",
                     "--format", "machine"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["split"] == "1,3|2"
        if doc["applicable"]:
            assert all(c["within_tolerance"] for c in doc["zero_conditions"])


class TestSimulateCommand:
    def test_reproducible_csv(self, state_file, tmp_path, capsys):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        for out in (out1, out2):
            code = main(["simulate", "--state", state_file, "--split", "1|2",
                         "--shots", "1000", "--seed", "42",
                         "--export", str(out)])
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()
        header = out1.read_text().splitlines()[0]
        assert header == "shot,setting1,setting2,outcome1,outcome2"

    def test_machine_verdicts(self, state_file, capsys):
        code = main(["simulate", "--state", state_file, "--split", "1|2",
                     "--shots", "20000", "--seed", "42", "--format", "machine"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        by_label = {c["label"]: c for c in doc["conditions"]}
        assert by_label["P(X1=+1, X2=+1)"]["count"] == 0
        assert by_label["P(Y1=+1, Y2=+1)"]["passed"] is True

    def test_single_shot(self, state_file, capsys):
        code = main(["simulate", "--state", state_file, "--split", "1|2",
                     "--shots", "1", "--seed", "1"])
        assert code == 0
        assert "n/a" in capsys.readouterr().out

    def test_not_applicable_is_usage_error(self, bell_file, capsys):
        code = main(["simulate", "--state", bell_file, "--split", "1|2",
                     "--shots", "10", "--seed", "1"])
        assert code == 1


class TestScanCommand:
    def test_machine(self, capsys):
        assert main(["scan", "--grid", "9999", "--format", "machine"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["max_probability"] == pytest.approx(0.090170, abs=1e-5)
        # the sweep is symmetric under t <-> 1-t; either peak is a valid argmax
        t = doc["argmax_p1_squared"]
        assert min(abs(t - 0.1773464), abs(t - 0.8226536)) < 1e-3
        assert len(doc["table"]) == 21

    def test_human_endpoints_note(self, capsys):
        assert main(["scan", "--grid", "99"]) == 0
        out = capsys.readouterr().out
        assert "maximum:" in out

    def test_equal_weights_row_is_zero(self, capsys):
        assert main(["scan", "--grid", "3", "--format", "machine"]) == 0
        doc = json.loads(capsys.readouterr().out)
        half = [r for r in doc["table"] if abs(r["p1_squared"] - 0.5) < 1e-12]
        assert half and half[0]["probability"] == 0.0

    def test_grid_too_small(self, capsys):
        assert main(["scan", "--grid", "1"]) == 1


class TestExitCodes:
    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_unknown_flag(self, state_file, capsys):
        assert main(["schmidt", "--state", state_file, "--split", "1|2",
                     "--bogus"]) == 1

    def test_missing_file(self, capsys):
        assert main(["schmidt", "--state", "/nonexistent.json",
                     "--split", "1|2"]) == 1

    def test_malformed_file(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"dims": [2, 2], "amps": [[1, 0]]}')
        assert main(["schmidt", "--state", str(path), "--split", "1|2"]) == 1
        assert "error" in capsys.readouterr().err

    def test_bad_split_indices(self, state_file, capsys):
        assert main(["schmidt", "--state", state_file, "--split", "1|3"]) == 1

    def test_negative_tolerance(self, state_file, capsys):
        assert main(["witness", "--state", state_file, "--split", "1|2",
                     "--eps-deg", "-1"]) == 1

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
