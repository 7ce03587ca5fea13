import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy import constants

from lumpedq.composite import CouplingEdge, CouplingGraph
from lumpedq.netlist import CellMatrices, NodeRegistry, compose_cells
from lumpedq.subsystems import TransmonSpec, diagonalize_transmon, quantize_line
from lumpedq.loadedline import LoadedLineSpec, solve_modes

settings.register_profile(
    "ci",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_circuit(
    rng,
    n_nodes=None,
    n_couplers=None,
    with_inductors=True,
    require_dynamics=True,
):
    """Random well-conditioned circuit: capacitors everywhere, inductors only
    inside subsystems, couplers touched by capacitors only.

    Returns a CompositeNetlist with one or two subsystems and the requested
    coupler count.
    """
    if n_nodes is None:
        n_nodes = int(rng.integers(4, 9))
    if n_couplers is None:
        n_couplers = int(rng.integers(1, 3))
    n_couplers = min(n_couplers, n_nodes - 2)

    names = [f"n{i:02d}" for i in range(n_nodes)]
    order = list(rng.permutation(n_nodes))
    couplers = [names[i] for i in order[:n_couplers]]
    system_nodes = [names[i] for i in order[n_couplers:]]
    split = max(1, len(system_nodes) // 2) if len(system_nodes) > 2 else len(system_nodes)
    subsystems = {"s0": sorted(system_nodes[:split])}
    if system_nodes[split:]:
        subsystems["s1"] = sorted(system_nodes[split:])

    c = np.zeros((n_nodes, n_nodes))
    for i in range(n_nodes):
        c[i, i] += rng.uniform(20e-15, 100e-15)  # every node grounded capacitively
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.uniform() < 0.6:
                mutual = rng.uniform(1e-15, 20e-15)
                c[i, i] += mutual
                c[j, j] += mutual
                c[i, j] -= mutual
                c[j, i] -= mutual

    l_inv = np.zeros((n_nodes, n_nodes))
    if with_inductors:
        index = {n: i for i, n in enumerate(names)}
        for nodes in subsystems.values():
            n_ind = int(rng.integers(1, 3)) if require_dynamics else int(rng.integers(0, 3))
            for _ in range(n_ind):
                a = index[nodes[int(rng.integers(0, len(nodes)))]]
                y = 1.0 / rng.uniform(1e-9, 2e-8)
                if len(nodes) > 1 and rng.uniform() < 0.5:
                    b = index[nodes[int(rng.integers(0, len(nodes)))]]
                    if a == b:
                        l_inv[a, a] += y  # inductor to ground
                    else:
                        l_inv[a, a] += y
                        l_inv[b, b] += y
                        l_inv[a, b] -= y
                        l_inv[b, a] -= y
                else:
                    l_inv[a, a] += y

    cell = CellMatrices(ident="cell0", nodes=tuple(names), c_mat=c, l_inv=l_inv)
    registry = NodeRegistry(
        datum="gnd",
        subsystem_names=tuple(sorted(subsystems)),
        subsystem_nodes=tuple(frozenset(subsystems[k]) for k in sorted(subsystems)),
        couplers=frozenset(couplers),
        cell_of={n: "cell0" for n in names},
    )
    return compose_cells([cell], registry)


@pytest.fixture
def random_circuit_factory():
    return random_circuit


def qubit_readout_system(g01_hz, *, f_r=7.0e9, ec_hz=287e6, ej_over_ec=None,
                         qubit_levels=6, readout_levels=6):
    """Transmon + one harmonic readout mode with the 0-1 coupling matrix
    element pinned to hbar*g01.

    Defaults give f_q near 5.3 GHz and alpha near -330 MHz. Returns
    (subsystems, graph, g01_rad, transmon_spec, line_mode).
    """
    e = constants.e
    ec = ec_hz * constants.h
    if ej_over_ec is None:
        ej_over_ec = ((5.3e9 + ec_hz) ** 2) / (8 * ec_hz**2)
    tspec = TransmonSpec(c_eff=e**2 / (2 * ec), ej=ej_over_ec * ec, levels=qubit_levels)
    transmon = diagonalize_transmon(tspec)

    # short line whose fundamental sits at f_r; loading sets the port ZPF
    z0, v_p = 53.0, 0.403 * constants.c
    c_load = 320e-15
    from lumpedq.loadedline import calibrate_length

    length = calibrate_length(2 * np.pi * f_r, 1, z0=z0, v_p=v_p, c_load=c_load)
    spec = LoadedLineSpec.from_wave_params(length, z0, v_p, c_load)
    modes = solve_modes(spec, 1)
    readout = quantize_line(spec, modes, levels=readout_levels, name="readout",
                            ports=("b1",))

    q01 = abs(transmon.charge_ops["junction"][0, 1])
    q_r = modes[0].q0_zpf
    g01 = 2 * np.pi * g01_hz
    # assembled pair term is half the reported reciprocal
    inv_c_eff = 2.0 * constants.hbar * g01 / (q01 * q_r)
    graph = CouplingGraph((CouplingEdge("transmon", "junction", "readout", "b1",
                                        inv_c_eff=inv_c_eff),))
    return [transmon, readout], graph, g01, tspec, modes[0]


def kerr_oscillator(name, f01_hz, alpha_hz, levels, q_zpf, port="p"):
    """Anharmonic (Kerr) oscillator with harmonic ladder operators: the model
    the dispersive formula chi = g^2 alpha / (Delta (Delta + alpha))
    describes. Level energies are h*(n f01 + alpha n(n-1)/2)."""
    from lumpedq.subsystems import QuantizedSubsystem

    n = np.arange(levels, dtype=float)
    energies = constants.h * (n * f01_hz + 0.5 * alpha_hz * n * (n - 1.0))
    a = np.diag(np.sqrt(np.arange(1, levels, dtype=float)), k=1)
    charge = 1j * q_zpf * (a.T - a)
    return QuantizedSubsystem(
        name=name, mode_dims=(levels,), hamiltonian=np.diag(energies),
        charge_ops={port: charge}, charge_scales={port: (q_zpf,)},
        mode_frequencies=(2 * np.pi * f01_hz,),
    )


def kerr_readout_system(g01_hz, *, f_q=5.3e9, alpha=-330e6, f_r=7.0e9,
                        qubit_levels=6, readout_levels=6):
    """Kerr qubit + harmonic readout with the 0-1 coupling element pinned to
    hbar*g01: the canonical dispersive-theory benchmark."""
    q_zpf_q, q_zpf_r = 2.0e-18, 3.0e-18
    qubit = kerr_oscillator("qubit", f_q, alpha, qubit_levels, q_zpf_q)
    readout = kerr_oscillator("readout", f_r, 0.0, readout_levels, q_zpf_r)
    inv_c_eff = 2.0 * constants.hbar * (2 * np.pi * g01_hz) / (q_zpf_q * q_zpf_r)
    graph = CouplingGraph((CouplingEdge("qubit", "p", "readout", "p",
                                        inv_c_eff=inv_c_eff),))
    return [qubit, readout], graph
