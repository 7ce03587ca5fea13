"""File formats, configuration schema, report rendering, CLI surface."""

import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from lumpedq.analysis import run_analysis
from lumpedq.benchmark import benchmark_config, benchmark_maxwell, write_benchmark
from lumpedq.cli import main
from lumpedq.config import load_device_config, parse_device_config
from lumpedq.errors import AsymmetryError, ConfigError, ParseError, SignError
from lumpedq.maxwell_io import parse_maxwell_file, parse_maxwell_text, serialize_maxwell
from lumpedq.report import to_machine, to_table

CANONICAL = """# units: fF
node,g,a,b
g,5.0,-2.0,-3.0
a,-2.0,6.0,-4.0
b,-3.0,-4.0,8.0
"""


class TestMaxwellFormat:
    def test_parse_canonical(self):
        m = parse_maxwell_text(CANONICAL)
        assert m.names == ("g", "a", "b")
        assert m.display_units == "fF"
        np.testing.assert_allclose(
            m.matrix, np.array([[5, -2, -3], [-2, 6, -4], [-3, -4, 8]]) * 1e-15)

    def test_round_trip_byte_identical(self, tmp_path):
        path = tmp_path / "cell.csv"
        path.write_text(CANONICAL, encoding="utf-8")
        assert serialize_maxwell(parse_maxwell_file(path)) == CANONICAL

    def test_benchmark_fixture_round_trips(self, tmp_path):
        text = serialize_maxwell(benchmark_maxwell())
        assert serialize_maxwell(parse_maxwell_text(text)) == text

    def test_positive_offdiagonal_sign_error(self):
        bad = CANONICAL.replace("a,-2.0,6.0,-4.0", "a,2.0,6.0,-4.0") \
                       .replace("g,5.0,-2.0,-3.0", "g,5.0,2.0,-3.0")
        with pytest.raises(SignError):
            parse_maxwell_text(bad)

    def test_small_asymmetry_symmetrized_with_warning(self):
        nudged = CANONICAL.replace("a,-2.0,6.0,-4.0", "a,-2.000000004,6.0,-4.0")
        with pytest.warns(UserWarning, match="symmetrized"):
            m = parse_maxwell_text(nudged)
        assert m.matrix[0, 1] == m.matrix[1, 0]

    def test_large_asymmetry_rejected(self):
        bad = CANONICAL.replace("a,-2.0,6.0,-4.0", "a,-2.5,6.0,-4.0")
        with pytest.raises(AsymmetryError):
            parse_maxwell_text(bad)

    def test_missing_units_header(self):
        with pytest.raises(ParseError, match="units"):
            parse_maxwell_text(CANONICAL.replace("# units: fF\n", ""))

    def test_bad_number_reports_location(self):
        bad = CANONICAL.replace("6.0", "six")
        with pytest.raises(ParseError) as err:
            parse_maxwell_text(bad)
        assert err.value.line == 4
        assert err.value.column == 3

    def test_header_row_order_mismatch(self):
        shuffled = CANONICAL.replace("node,g,a,b", "node,g,b,a")
        with pytest.raises(ParseError, match="order"):
            parse_maxwell_text(shuffled)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError, match="not found"):
            parse_maxwell_file(tmp_path / "nope.csv")


class TestConfig:
    def test_benchmark_parses(self, tmp_path):
        cfg = benchmark_config(tmp_path)
        assert cfg.analysis.qubit == "qubit"
        assert cfg.analysis.readout == "readout"
        assert cfg.subsystem_names() == ("qubit", "readout", "bus2", "bus3")

    def test_load_from_file(self, tmp_path):
        path = write_benchmark(tmp_path)
        cfg = load_device_config(path)
        assert cfg.name == "synth-floating-transmon"

    def test_missing_required_field(self):
        with pytest.raises(ConfigError, match="datum"):
            parse_device_config({"cells": []})

    def test_line_needs_exactly_one_length_source(self, tmp_path):
        raw = benchmark_config(tmp_path).raw
        raw = __import__("copy").deepcopy(dict(raw))
        raw["subsystems"][1]["length_mm"] = 6.8
        with pytest.raises(ConfigError, match="exactly one"):
            parse_device_config(raw, base_dir=tmp_path)

    def test_junction_needs_exactly_one_energy_source(self, tmp_path):
        raw = __import__("copy").deepcopy(dict(benchmark_config(tmp_path).raw))
        raw["junctions"][0]["ej_ghz"] = 13.0
        with pytest.raises(ConfigError, match="exactly one"):
            parse_device_config(raw, base_dir=tmp_path)

    def test_override_unknown_path(self, tmp_path):
        cfg = benchmark_config(tmp_path)
        with pytest.raises(ConfigError, match="override path"):
            cfg.with_override("junctions.zz.lj_nh", 1.0)


@pytest.fixture(scope="module")
def report(tmp_path_factory):
    cfg = benchmark_config(tmp_path_factory.mktemp("rep"))
    return run_analysis(cfg, naive=True)


class TestReports:
    def test_machine_output_deterministic(self, tmp_path):
        cfg = benchmark_config(tmp_path)
        a = to_machine(run_analysis(cfg))
        b = to_machine(run_analysis(cfg))
        assert a == b

    def test_machine_output_self_describing(self, report):
        doc = json.loads(to_machine(report))
        assert doc["format"] == "lumpedq-report/1"
        assert "conventions" in doc
        chi = doc["observables"]["dispersive"]["chi_qr"]
        assert set(chi) == {"value", "unit"} and chi["unit"] == "Hz"
        assert "naive" in doc

    def test_provenance_hashes_inputs(self, report):
        prov = report.provenance
        assert prov["tool_version"]
        assert "qubit_cell.csv" in prov["input_sha256"]
        assert len(prov["config_sha256"]) == 64

    def test_table_rendering(self, report):
        text = to_table(report)
        assert "dispersive observables" in text
        assert "naive comparison" in text


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def device_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    write_benchmark(d)
    return d


@pytest.fixture(scope="module")
def line_spec(tmp_path_factory):
    d = tmp_path_factory.mktemp("line")
    path = d / "line.yaml"
    path.write_text(yaml.safe_dump({
        "length_mm": 6.8645659,
        "z0_ohm": 53.0,
        "vp_fraction_c": 0.403,
        "c_load_ff": 320.0,
        "termination": "open",
    }), encoding="utf-8")
    return path


class TestCli:
    def test_analyze_machine(self, device_dir, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = run_cli("analyze", str(device_dir / "device.yaml"),
                       "--format", "machine", "-o", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["device"] == "synth-floating-transmon"

    def test_analyze_table_stdout(self, device_dir, capsys):
        assert run_cli("analyze", str(device_dir / "device.yaml")) == 0
        assert "dispersive observables" in capsys.readouterr().out

    def test_analyze_deterministic_bytes(self, device_dir, tmp_path):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        run_cli("analyze", str(device_dir / "device.yaml"), "--format", "machine",
                "-o", str(out1))
        run_cli("analyze", str(device_dir / "device.yaml"), "--format", "machine",
                "-o", str(out2))
        assert out1.read_bytes() == out2.read_bytes()

    def test_modes_subcommand(self, line_spec, capsys):
        assert run_cli("modes", str(line_spec), "--count", "3") == 0
        out = capsys.readouterr().out
        assert "d.c." in out
        assert "7.00" in out  # loaded fundamental near 7 GHz

    def test_modes_machine_field_series(self, line_spec, tmp_path):
        out = tmp_path / "modes.json"
        assert run_cli("modes", str(line_spec), "--count", "2", "--samples", "11",
                       "--format", "machine", "-o", str(out)) == 0
        doc = json.loads(out.read_text())
        assert len(doc["modes"]) == 2
        assert len(doc["modes"][0]["field"]["z_m"]) == 11

    def test_sweep_subcommand(self, device_dir, tmp_path):
        out = tmp_path / "sweep.json"
        code = run_cli("sweep", str(device_dir / "device.yaml"),
                       "--param", "junctions.j1.lj_nh", "--values", "11.5,12.0,12.5",
                       "--format", "machine", "-o", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        f_q = [p["observables"]["dispersive"]["f_qubit"]["value"] for p in doc["points"]]
        assert f_q[0] > f_q[1] > f_q[2]

    def test_budget_subcommand(self, device_dir, tmp_path):
        out = tmp_path / "budget.json"
        assert run_cli("budget", str(device_dir / "device.yaml"),
                       "--format", "machine", "-o", str(out)) == 0
        doc = json.loads(out.read_text())
        features = [row["feature"] for row in doc["budget"]]
        assert "coupling_hamiltonians" in features
        assert "readout_first_harmonic" in features

    def test_validation_error_exit_code_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("datum: g\n", encoding="utf-8")
        assert run_cli("analyze", str(bad)) == 2

    def test_numerical_error_exit_code_3(self, device_dir, tmp_path):
        cfg = yaml.safe_load((device_dir / "device.yaml").read_text())
        cfg["analysis"]["dimension_cap"] = 10
        small = tmp_path / "capped.yaml"
        small.write_text(yaml.safe_dump(cfg), encoding="utf-8")
        import shutil

        shutil.copy(device_dir / "qubit_cell.csv", tmp_path / "qubit_cell.csv")
        assert run_cli("analyze", str(small)) == 3

    def test_console_entry_point(self, device_dir):
        proc = subprocess.run(
            [sys.executable, "-m", "lumpedq.cli", "analyze",
             str(device_dir / "device.yaml")],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert "dispersive" in proc.stdout
