import csv
import filecmp
import os

import numpy as np
import pytest

from App.asymptotics.homogeneous import profile_table
from App.asymptotics.planner import plan_from_step
from App.bounds.baselines import ComparisonRow, comparison_row
from App.bounds.extremal import extremal_table
from App.cli import ERROR_PREFIX, join_list_values, run
from App.models.transition import TransitionMatrix
from App.reports import EXTREMAL_HEADER, PLAN_HEADER, PROFILE_HEADER, CausationReport
from utils.configHandler import ConfigHandler


def invoke(settings_file, *argv):
    return run(["--settings", str(settings_file), *argv])


def error_lines(stderr, name):
    return [line for line in stderr.splitlines() if line.startswith(f"{ERROR_PREFIX}: {name}: ")]


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    return rows[0], rows[1:]


class TestArguments:

    def test_negative_list_values_are_joined(self):
        argv = ["figures", "--rho", "-0.4,0", "--rho-values", "-0.2", "--tau", "0.2"]
        assert join_list_values(argv) == ["figures", "--rho=-0.4,0", "--rho-values=-0.2", "--tau", "0.2"]

    def test_other_flags_untouched(self):
        argv = ["bounds", "--tau", "-0.2", "--rho", "--xy"]
        assert join_list_values(argv) == argv


class TestBoundsCommand:

    def test_medicine_example(self, settings_file, capsys):
        assert invoke(settings_file, "bounds", "--tau", "0.3333333333333333", "--rho", "0", "--xy", "11") == 0
        method, lo, hi, identified = capsys.readouterr().out.split()
        assert method == "simple"
        assert float(lo) == pytest.approx(0.5, abs=1e-8)
        assert float(hi) == pytest.approx(1.0)
        assert identified == "false"

    def test_chain_with_evidence(self, settings_file, capsys):
        code = invoke(settings_file, "bounds", "--step", "0.3333333333333333,0.6666666666666667",
                      "--step", "0.6,-0.4", "--evidence", "111")
        assert code == 0
        method, lo, hi, identified = capsys.readouterr().out.split()
        assert method == "evidence-product"
        assert float(lo) == pytest.approx(1 / 3, abs=1e-8)
        assert float(hi) == pytest.approx(1 / 3, abs=1e-8)
        assert identified == "true"

    def test_writes_csv(self, settings_file, tmp_path):
        out = tmp_path / "bounds-out"
        assert invoke(settings_file, "bounds", "--tau", "0.2", "--rho", "0.1", "--output", "b.csv",
                      "--output-dir", str(out)) == 0
        header, rows = read_csv(out / "b.csv")
        assert header == ["method", "lo", "hi", "identified"]
        assert rows[0][0] == "simple"

    def test_run_config_file(self, settings_file, tmp_path, capsys):
        run_file = tmp_path / "run.cfg"
        run_file.write_text("# two-step chain\nstep = 0.6,0.1\nstep = 0.5,0.15\nevidence = 1?1\n", encoding="utf-8")
        assert invoke(settings_file, "bounds", "--config", str(run_file)) == 0
        assert capsys.readouterr().out.startswith("unobserved ")


class TestExitCodes:

    def test_unknown_flag(self, settings_file, capsys):
        assert invoke(settings_file, "bounds", "--tau", "0.2", "--rho", "0", "--colour", "red") == 2
        assert error_lines(capsys.readouterr().err, "ConfigError")

    def test_invalid_law(self, settings_file, capsys):
        assert invoke(settings_file, "bounds", "--tau", "0.9", "--rho", "0.5") == 2
        assert error_lines(capsys.readouterr().err, "ConfigError")

    def test_evidence_length_mismatch(self, settings_file, capsys):
        assert invoke(settings_file, "bounds", "--step", "0.6,0.1", "--step", "0.5,0.15", "--evidence", "11") == 2

    def test_degenerate_extremal(self, settings_file, capsys):
        assert invoke(settings_file, "extremal", "--tau", "0.3", "--rho", "0.7") == 3
        assert error_lines(capsys.readouterr().err, "UnsupportedError")

    def test_null_event(self, settings_file, capsys):
        code = invoke(settings_file, "bounds", "--step", "0.3,0.7", "--step", "0.5,0", "--evidence", "101")
        assert code == 3
        assert error_lines(capsys.readouterr().err, "NullEventError")

    def test_bad_seed_environment(self, settings_file, monkeypatch, capsys):
        monkeypatch.setenv("CAUSABOUND_SEED", "abc")
        assert invoke(settings_file, "oracle", "--tau", "0.2", "--rho", "0.1") == 2
        assert error_lines(capsys.readouterr().err, "ConfigError")

    def test_non_numeric_list_value(self, settings_file, capsys):
        assert invoke(settings_file, "compare", "--tau-values", "abc") == 2
        lines = error_lines(capsys.readouterr().err, "ConfigError")
        assert lines and "'abc'" in lines[0]

    def test_unwritable_output_dir(self, settings_file, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory", encoding="utf-8")
        code = invoke(settings_file, "bounds", "--tau", "0.2", "--rho", "0.1", "--output", "b.csv",
                      "--output-dir", str(blocker))
        assert code == 2
        assert error_lines(capsys.readouterr().err, "FileExistsError")


class TestTableCommands:

    def test_extremal_table(self, settings_file, capsys):
        assert invoke(settings_file, "extremal", "--tau", "0.3333333333333333", "--rho", "0") == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "regime,extreme,side,value,witness,pattern"
        assert len(lines) > 1

    def test_profile(self, settings_file, capsys):
        assert invoke(settings_file, "profile", "--tau", "0.2", "--rho", "0.4", "--n-max", "4") == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "n,uLB,uUB,oLB,oUB,mLB,mUB"
        assert [line.split(",")[0] for line in lines[1:]] == ["1", "2", "3", "4"]

    def test_limits(self, settings_file, capsys):
        assert invoke(settings_file, "limits", "--tau", "0.3333333333333333", "--rho", "0") == 0
        fields = dict(item.split("=") for item in capsys.readouterr().out.split())
        assert float(fields["oLB"]) == pytest.approx(3 ** -0.5, abs=1e-6)
        assert fields["degenerate"] == "false"

    def test_domino_plan(self, settings_file, capsys):
        assert invoke(settings_file, "plan", "--step-tau", "0.99", "--step-rho", "0", "--n", "120") == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "k,LB_if_one,posterior_prob_one,expected_LB"
        assert lines[-1].startswith("argmax ")
        summary = dict(item.split("=") for item in lines[-1].split()[1:])
        assert summary["k"] == "60"
        assert float(summary["LB_if_one"]) > 0.5
        assert float(summary["no_observation_LB"]) == pytest.approx(0.461, abs=1e-3)

    @pytest.mark.parametrize("flag", ["--step-tau", "--step-rho"])
    def test_plan_needs_both_step_values(self, settings_file, capsys, flag):
        assert invoke(settings_file, "plan", flag, "0", "--n", "10") == 2
        lines = error_lines(capsys.readouterr().err, "ConfigError")
        assert lines and "together" in lines[0]

    def test_compare(self, settings_file, capsys):
        assert invoke(settings_file, "compare", "--tau-values", "0.2", "--rho-values", "-0.2,0.9") == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("tau,rho,")
        # the infeasible cell (0.2, 0.9) is skipped
        assert len(lines) == 2


class TestOracleCommand:

    CHAIN = ("--step", "0.6,0.1", "--step", "0.5,0.15", "--evidence", "1?1")

    def test_sharpness(self, settings_file, capsys):
        assert invoke(settings_file, "oracle", *self.CHAIN) == 0
        assert capsys.readouterr().out.startswith("sharpness pass")

    def test_simulation(self, settings_file, capsys):
        assert invoke(settings_file, "oracle", *self.CHAIN, "--simulate", "--samples", "8000", "--seed", "3") == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[1].startswith("empirical_pc=")
        assert lines[2].startswith("markov ")

    def test_seed_from_environment(self, settings_file, monkeypatch, capsys):
        assert invoke(settings_file, "oracle", *self.CHAIN, "--simulate", "--seed", "7") == 0
        flagged = capsys.readouterr().out

        monkeypatch.setenv("CAUSABOUND_SEED", "7")
        assert invoke(settings_file, "oracle", *self.CHAIN, "--simulate") == 0
        assert capsys.readouterr().out == flagged

    def test_flag_seed_wins(self, settings_file, monkeypatch, capsys):
        assert invoke(settings_file, "oracle", *self.CHAIN, "--simulate", "--seed", "7") == 0
        flagged = capsys.readouterr().out

        monkeypatch.setenv("CAUSABOUND_SEED", "8")
        assert invoke(settings_file, "oracle", *self.CHAIN, "--simulate", "--seed", "7") == 0
        assert capsys.readouterr().out == flagged


class TestFigures:

    RHOS = ("-0.4", "-0.2", "0", "0.2", "0.4", "0.6")

    def _figures(self, settings_file, out):
        return invoke(settings_file, "figures", "--tau", "0.2", "--rho", ",".join(self.RHOS),
                      "--n-max", "30", "--tau-values", "0.2,0.4", "--rho-values", "-0.2,0,0.2",
                      "--output-dir", str(out))

    def test_files_written(self, settings_file, tmp_path):
        out = tmp_path / "figs"
        assert self._figures(settings_file, out) == 0
        names = set(os.listdir(out))
        for rho in self.RHOS:
            assert f"figure1_rho_{rho}.csv" in names
            assert f"figure1_rho_{rho}.svg" in names
        assert {"figure2_compare.csv", "figure2_compare.svg"} <= names
        assert (out / "figure2_compare.svg").read_text(encoding="utf-8").startswith("<svg")

    def test_bands_have_the_expected_shape(self, settings_file, tmp_path):
        out = tmp_path / "figs"
        assert self._figures(settings_file, out) == 0
        for rho in self.RHOS:
            header, rows = read_csv(out / f"figure1_rho_{rho}.csv")
            table = {name: np.array([float(row[i]) if row[i] else np.nan for row in rows])
                     for i, name in enumerate(header)}
            assert np.ptp(table["uLB"]) <= 1e-8
            assert np.all(np.diff(table["oLB"]) >= -1e-8)
            if float(rho) > 0.0:
                assert np.all(np.diff(table["oUB"]) <= 1e-8)
            if float(rho) == 0.0:
                # no alternating evidence fits a single step
                assert np.isnan(table["mUB"][0])
                assert np.allclose(table["mUB"][1:], 1.0)
            else:
                assert table["mUB"][-1] < 1e-2

    def test_deterministic_outputs(self, settings_file, tmp_path):
        first, second = tmp_path / "run1", tmp_path / "run2"
        assert self._figures(settings_file, first) == 0
        assert self._figures(settings_file, second) == 0
        names = sorted(os.listdir(first))
        assert names == sorted(os.listdir(second))
        match, mismatch, errors = filecmp.cmpfiles(first, second, names, shallow=False)
        assert not mismatch and not errors


def cell(value):
    return "" if value is None else pytest.approx(value, rel=1e-8, abs=1e-15)


def parsed(text):
    return "" if text == "" else float(text)


class TestReportFiles:

    @pytest.fixture
    def report(self, settings_file, logger, tmp_path):
        return CausationReport(logger=logger, config_data=ConfigHandler(str(settings_file)),
                               output_dir=str(tmp_path / "reports"))

    def test_profile(self, report):
        P = TransitionMatrix(0.2, 0.6)
        header, rows = read_csv(report.write_profile(P, 30))
        assert tuple(header) == PROFILE_HEADER
        expected = profile_table(P, 30).rows
        assert [int(row[0]) for row in rows] == [r.n for r in expected]
        for row, values in zip(rows, expected):
            assert [parsed(text) for text in row[1:]] == [cell(v) for v in values.values()]

    def test_long_chain_values_are_positional(self, report):
        header, rows = read_csv(report.write_profile(TransitionMatrix(0.2, 0.6), 30))
        assert all("e" not in text.lower() for row in rows for text in row)
        tail = rows[-1][header.index("mUB")]
        assert tail.startswith("0.0")
        assert float(tail) < 1e-2

    def test_extremal(self, report):
        table = extremal_table(TransitionMatrix(0.2, 0.1))
        header, rows = read_csv(report.write_extremal(table))
        assert tuple(header) == EXTREMAL_HEADER
        entries = list(table)
        assert len(rows) == len(entries) == 12
        for row, entry in zip(rows, entries):
            assert row[:3] == [entry.regime.value, entry.extreme, entry.side]
            assert float(row[3]) == cell(entry.value)
            assert row[4] == str(entry.witness)
            assert row[5] == entry.pattern.format()

    def test_plan(self, report):
        table = plan_from_step(TransitionMatrix(0.99, 0.0), 120)
        header, rows = read_csv(report.write_plan(table))
        assert tuple(header) == PLAN_HEADER
        assert len(rows) == 119
        for row, expected in zip(rows, table.rows):
            assert int(row[0]) == expected.k
            assert [float(text) for text in row[1:]] == [
                cell(expected.LB_if_one), cell(expected.posterior_prob_one), cell(expected.expected_LB)]

    def test_compare(self, report):
        header, rows = read_csv(report.write_compare([0.2, 0.4], [-0.2, 0.0, 0.9]))
        assert tuple(header) == ComparisonRow.columns()
        # (0.2, 0.9) and (0.4, 0.9) are not valid laws
        assert [(float(row[0]), float(row[1])) for row in rows] == [(0.2, -0.2), (0.2, 0.0), (0.4, -0.2), (0.4, 0.0)]
        for row in rows:
            expected = comparison_row(TransitionMatrix(float(row[0]), float(row[1]))).values()
            assert [parsed(text) for text in row] == [cell(v) for v in expected]
