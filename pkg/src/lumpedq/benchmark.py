"""Synthetic full-device benchmark.

A floating transmon (island p1, large coupler pad p0, junction j1) read out
through a capacitively end-loaded line at port b1 and coupled to two bus
resonators at ports b2/b3, with a charge-line stub cl. The numbers are tuned
to the regime of interest: qubit near 5.3 GHz with anharmonicity in the
300-350 MHz range, readout loading above 300 fF dressing the readout from
8.8 GHz to about 7.0 GHz, buses in the 6.5-6.8 GHz band, and a qubit-readout
cross-Kerr of a few MHz.

Used by the test suite, the acceptance criteria, and the demo scripts.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .config import DeviceConfig, parse_device_config
from .maxwell_io import serialize_maxwell
from .netlist import MaxwellMatrix

NODES = ("g", "b1", "b2", "b3", "cl", "p0", "p1")

# mutual capacitances in fF; keys sorted node pairs
MUTUALS_FF = {
    ("g", "p0"): 250.0,
    ("g", "p1"): 30.0,
    ("p0", "p1"): 24.0,
    ("b1", "g"): 220.0,
    ("b1", "p1"): 14.0,
    ("b1", "p0"): 5.0,
    ("b2", "g"): 360.0,
    ("b2", "p1"): 0.8,
    ("b2", "p0"): 1.0,
    ("b1", "b2"): 13.0,
    ("b3", "g"): 360.0,
    ("b3", "p1"): 0.8,
    ("b3", "p0"): 1.0,
    ("b1", "b3"): 13.0,
    ("b2", "b3"): 0.6,
    ("cl", "g"): 40.0,
    ("cl", "p1"): 0.3,
    ("cl", "p0"): 1.0,
    ("b1", "cl"): 0.2,
}


def benchmark_maxwell() -> MaxwellMatrix:
    n = len(NODES)
    index = {name: i for i, name in enumerate(NODES)}
    mat = np.zeros((n, n))
    for (a, b), value in MUTUALS_FF.items():
        i, j = index[a], index[b]
        mat[i, j] -= value
        mat[j, i] -= value
        mat[i, i] += value
        mat[j, j] += value
    return MaxwellMatrix(names=NODES, matrix=mat * 1e-15, display_units="fF",
                         display_matrix=mat)


def benchmark_raw_config(maxwell_file: str = "qubit_cell.csv") -> dict:
    return {
        "name": "synth-floating-transmon",
        "datum": "g",
        "cells": [{"id": "cell0", "maxwell_file": maxwell_file}],
        "couplers": ["p0", "cl"],
        "subsystems": [
            {
                "name": "qubit",
                "kind": "transmon",
                "nodes": ["p1"],
                "levels": 5,
                "n_max": 30,
            },
            {
                "name": "readout",
                "kind": "loaded_line",
                "role": "readout",
                "nodes": ["b1"],
                "z0_ohm": 53.0,
                "vp_fraction_c": 0.403,
                "termination": "open",
                "target_ghz": 8.8,
                "target_loading": "unloaded",
                "modes": 2,
                "levels": [4, 3],
            },
            {
                "name": "bus2",
                "kind": "loaded_line",
                "nodes": ["b2"],
                "z0_ohm": 53.0,
                "vp_fraction_c": 0.403,
                "termination": "open",
                "target_ghz": 10.4,
                "target_loading": "unloaded",
                "modes": 1,
                "levels": 3,
            },
            {
                "name": "bus3",
                "kind": "loaded_line",
                "nodes": ["b3"],
                "z0_ohm": 53.0,
                "vp_fraction_c": 0.403,
                "termination": "open",
                "target_ghz": 10.7,
                "target_loading": "unloaded",
                "modes": 1,
                "levels": 3,
            },
        ],
        "junctions": [
            {
                "id": "j1",
                "nodes": ["p0", "p1"],
                "subsystem": "qubit",
                "lj_nh": 12.0,
                "cj_ff": 2.0,
            }
        ],
        "analysis": {"qubit": "qubit", "readout": "readout"},
    }


def write_benchmark(directory: str | Path) -> Path:
    """Write the Maxwell fixture and configuration; returns the config path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "qubit_cell.csv").write_text(
        serialize_maxwell(benchmark_maxwell()), encoding="utf-8")
    import yaml

    config_path = directory / "device.yaml"
    config_path.write_text(
        yaml.safe_dump(benchmark_raw_config(), sort_keys=False), encoding="utf-8")
    return config_path


def benchmark_config(directory: str | Path) -> DeviceConfig:
    """Benchmark device configuration with fixture files in ``directory``."""
    directory = Path(directory)
    write_benchmark(directory)
    return parse_device_config(benchmark_raw_config(), base_dir=directory)
