"""End-to-end device analysis pipeline.

Stitches the modules together: Maxwell ingestion -> cell composition ->
constraint elimination -> dressed blocks -> subsystem quantization ->
composite Hamiltonian -> dressed observables. Also provides the naive
comparison mode, parameter sweeps, the sensitivity budget, and junction
inductance calibration. Every run is a pure function of the configuration,
so sweep points may execute in parallel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import constants

from .composite import (
    CouplingEdge,
    CouplingGraph,
    DispersiveObservables,
    DressedSpectrum,
    build_full_hamiltonian,
    coupling_rates,
    cross_kerr_matrix,
    diagonalize,
    extract_dispersive,
    mode_frequencies,
)
from .config import DeviceConfig, LineConfig, TransmonConfig
from .errors import ConfigError, TargetOutOfRange
from .loadedline import LineMode, LoadedLineSpec, calibrate_length, solve_modes
from .maxwell_io import parse_maxwell_file
from .netlist import (
    CellMatrices,
    CircuitBlocks,
    CompositeNetlist,
    JunctionElement,
    MaxwellMatrix,
    NodeRegistry,
    ReducedCircuit,
    compose_cells,
    extract_blocks,
    merge_maxwell_nodes,
    reduce_maxwell,
    reduce_network,
)
from .subsystems import QuantizedSubsystem, TransmonSpec, diagonalize_transmon, quantize_line

CellHook = Callable[[str, MaxwellMatrix], MaxwellMatrix]
GraphHook = Callable[[CouplingGraph], CouplingGraph]


@dataclass(frozen=True)
class LineResult:
    config: LineConfig
    spec: LoadedLineSpec
    dressed_loading: float  # F, loading used for the mode solve
    port_loadings: Mapping[str, float]  # dressed loading seen per port node
    modes: tuple[LineMode, ...]


@dataclass(frozen=True)
class DeviceModel:
    """Everything produced by one pipeline run."""

    config: DeviceConfig
    naive: bool
    registry: NodeRegistry
    netlist: CompositeNetlist
    reduced: ReducedCircuit
    blocks: CircuitBlocks
    subsystems: tuple[QuantizedSubsystem, ...]
    transmon_specs: Mapping[str, TransmonSpec]
    lines: Mapping[str, LineResult]
    graph: CouplingGraph
    spectrum: DressedSpectrum
    dispersive: DispersiveObservables | None
    port_coord: Mapping[str, tuple[str, str]]  # reduced label -> (subsystem, port)

    @property
    def flat_mode_names(self) -> tuple[str, ...]:
        names = []
        for sub in self.subsystems:
            for m in range(len(sub.mode_dims)):
                names.append(f"{sub.name}[{m}]" if len(sub.mode_dims) > 1 else sub.name)
        return tuple(names)

    def dressed_mode_frequencies(self) -> list[float]:
        return mode_frequencies(self.spectrum)

    def cross_kerr(self) -> np.ndarray:
        return cross_kerr_matrix(self.spectrum)

    def coupling_rates(self) -> dict:
        return coupling_rates(self.subsystems, self.graph)


def _load_cells(config: DeviceConfig, cell_hook: CellHook | None) -> list[tuple[str, CellMatrices]]:
    cells = []
    for cc in config.cells:
        maxwell = parse_maxwell_file(cc.maxwell_file)
        if config.merge_ground_nets and cc.ground_nets:
            maxwell = merge_maxwell_nodes(maxwell, cc.ground_nets, config.datum)
        if cell_hook is not None:
            maxwell = cell_hook(cc.ident, maxwell)
        cell = reduce_maxwell(maxwell, config.datum)
        cells.append((cc.ident, CellMatrices(
            ident=cc.ident, nodes=cell.nodes, c_mat=cell.c_mat, l_inv=cell.l_inv,
        )))
    return cells


def _build_registry(config: DeviceConfig, cells: Sequence[tuple[str, CellMatrices]]) -> NodeRegistry:
    cell_of: dict[str, str] = {}
    for ident, cell in cells:
        for node in cell.nodes:
            cell_of.setdefault(node, ident)
    subsystem_names = []
    subsystem_nodes = []
    for t in config.transmons:
        subsystem_names.append(t.name)
        subsystem_nodes.append(frozenset(t.nodes))
    for l in config.lines:
        subsystem_names.append(l.name)
        subsystem_nodes.append(frozenset(l.nodes))
    declared = set().union(*subsystem_nodes, set(config.couplers)) if subsystem_nodes else set(config.couplers)
    for node in declared:
        cell_of.setdefault(node, "__virtual__")
    return NodeRegistry(
        datum=config.datum,
        subsystem_names=tuple(subsystem_names),
        subsystem_nodes=tuple(subsystem_nodes),
        couplers=frozenset(config.couplers),
        cell_of=cell_of,
    )


def _attach_elements(config: DeviceConfig, cells: list[tuple[str, CellMatrices]],
                     registry: NodeRegistry, lj_overrides: Mapping[str, float]) -> list[CellMatrices]:
    """Junctions ride on the cell containing their nodes; explicit linear
    inductors are collected into one synthetic lumped cell."""
    junctions = []
    for jc in config.junctions:
        lj = lj_overrides.get(jc.ident, jc.lj_h)
        if lj is not None:
            j = JunctionElement.from_inductance(
                jc.ident, jc.node_neg, jc.node_pos, jc.subsystem, lj=lj, cj=jc.cj_f)
        else:
            j = JunctionElement(jc.ident, jc.node_neg, jc.node_pos, jc.subsystem,
                                ej=jc.ej_j, cj=jc.cj_f)
        junctions.append(j)

    out = [cell for _, cell in cells]
    if junctions:
        holder = out[0]
        out[0] = CellMatrices(ident=holder.ident, nodes=holder.nodes,
                              c_mat=holder.c_mat, l_inv=holder.l_inv,
                              junctions=tuple(junctions))
    if config.inductors:
        nodes = sorted({n for ind in config.inductors for n in (ind.node_a, ind.node_b)
                        if n != config.datum})
        index = {n: i for i, n in enumerate(nodes)}
        l_inv = np.zeros((len(nodes), len(nodes)))
        for ind in config.inductors:
            y = 1.0 / ind.l_h
            a, b = ind.node_a, ind.node_b
            if a != config.datum and b != config.datum:
                i, j = index[a], index[b]
                l_inv[i, i] += y
                l_inv[j, j] += y
                l_inv[i, j] -= y
                l_inv[j, i] -= y
            else:
                keep = a if a != config.datum else b
                l_inv[index[keep], index[keep]] += y
        out.append(CellMatrices(ident="__inductors__", nodes=tuple(nodes),
                                c_mat=np.zeros_like(l_inv), l_inv=l_inv))
    return out


def _transmon_subsystem(tc: TransmonConfig, config: DeviceConfig,
                        blocks: CircuitBlocks, reduced: ReducedCircuit,
                        naive_c: float | None) -> tuple[TransmonSpec, QuantizedSubsystem, str]:
    owned = [j for j in reduced.junctions if j.subsystem == tc.name]
    if len(owned) != 1:
        raise ConfigError(f"transmon {tc.name!r} must own exactly one junction, found {len(owned)}")
    junction = owned[0]
    coords = reduced.block_index[tc.name]
    if list(coords) != [reduced.index_of(junction.ident)]:
        extra = [reduced.labels[i] for i in coords if reduced.labels[i] != junction.ident]
        raise ConfigError(
            f"transmon {tc.name!r} retains non-junction coordinates {extra}; "
            "declare pad nodes consumed by the rotation or mark them as couplers"
        )
    c_eff = naive_c if naive_c is not None else blocks.c_eff(junction.ident)
    spec = TransmonSpec(
        c_eff=c_eff,
        ej=junction.effective_ej(),
        q_offset=tc.q_offset_2e * 2.0 * constants.e,
        n_max=tc.n_max,
        levels=tc.levels,
    )
    sub = diagonalize_transmon(spec)
    sub = QuantizedSubsystem(
        name=tc.name, mode_dims=sub.mode_dims, hamiltonian=sub.hamiltonian,
        charge_ops=sub.charge_ops, flux_ops=sub.flux_ops,
        mode_frequencies=sub.mode_frequencies, charge_scales=sub.charge_scales,
    )
    return spec, sub, junction.ident


def _naive_port_zpfs(modes: Sequence[LineMode]) -> tuple[list[float], list[float]]:
    """Lumped-equivalent port ZPFs for the undressed (C_L = 0) line: the mode
    maps to an LC with port capacitance C_port = c * int u^2 dz / u(0)^2."""
    charge, flux = [], []
    for m in modes:
        u0 = math.cos(m.phase)
        c_port = m.spec.c_per_len * m.line_integral / u0**2
        charge.append(math.sqrt(0.5 * constants.hbar * m.omega * c_port))
        flux.append(math.sqrt(0.5 * constants.hbar / (m.omega * c_port)))
    return charge, flux


def _line_result(lc: LineConfig, blocks: CircuitBlocks | None, naive: bool) -> LineResult:
    port_loadings = {}
    if blocks is not None:
        for node in lc.nodes:
            port_loadings[node] = blocks.c_eff(node)
    if naive:
        loading = 0.0
    elif port_loadings:
        loading = max(port_loadings.values())
        spread = max(port_loadings.values()) - min(port_loadings.values())
        if len(port_loadings) > 1 and spread > 1e-3 * loading:
            warnings.warn(
                f"line {lc.name!r}: port loadings differ by {spread:.3e} F; "
                "modeled as singly loaded with the larger value"
            )
    else:
        loading = 0.0

    if lc.length_m is not None:
        length = lc.length_m
    else:
        cal_load = 0.0 if (lc.target_loading == "unloaded" or naive) else loading
        length = calibrate_length(
            2.0 * math.pi * lc.target_hz, lc.target_mode,
            z0=lc.z0_ohm, v_p=lc.vp_m_per_s, c_load=cal_load, shorted_end=lc.shorted_end,
        )
    spec = LoadedLineSpec.from_wave_params(
        length=length, z0=lc.z0_ohm, v_p=lc.vp_m_per_s,
        c_load=loading, shorted_end=lc.shorted_end,
    )
    modes = solve_modes(spec, lc.modes)
    return LineResult(config=lc, spec=spec, dressed_loading=loading,
                      port_loadings=port_loadings, modes=tuple(modes))


def build_model(
    config: DeviceConfig,
    *,
    naive: bool = False,
    cell_hook: CellHook | None = None,
    graph_hook: GraphHook | None = None,
    lj_overrides: Mapping[str, float] | None = None,
) -> DeviceModel:
    """Run the pipeline once.

    ``naive`` recomputes under conventional approximations: line modes are
    solved without loading (undressed eigenfields, lumped-equivalent port
    ZPFs) and couplings come from the weak-coupling expansion of the raw
    junction-basis capacitance matrix instead of the eliminated inverse.
    """
    lj_overrides = dict(lj_overrides or {})
    loaded = _load_cells(config, cell_hook)
    registry = _build_registry(config, loaded)
    cells = _attach_elements(config, loaded, registry, lj_overrides)
    netlist = compose_cells(cells, registry)
    reduced = reduce_network(netlist)
    blocks = extract_blocks(reduced)

    rotated = None
    if naive:
        s_n = reduced.record.s_n
        rotated = s_n.T @ netlist.c_mat @ s_n

    def _naive_diag(label: str) -> float:
        i = reduced.record.rotated_labels.index(label)
        return rotated[i, i]

    subsystems: list[QuantizedSubsystem] = []
    transmon_specs = {}
    port_coord: dict[str, tuple[str, str]] = {}
    for tc in config.transmons:
        naive_c = _naive_diag(_transmon_junction(config, tc).ident) if naive else None
        spec, sub, junction_label = _transmon_subsystem(tc, config, blocks, reduced, naive_c)
        transmon_specs[tc.name] = spec
        subsystems.append(sub)
        port_coord[junction_label] = (tc.name, "junction")

    lines = {}
    for lc in config.lines:
        result = _line_result(lc, blocks, naive)
        lines[lc.name] = result
        if naive:
            charge_zpf, flux_zpf = _naive_port_zpfs(result.modes)
        else:
            charge_zpf = flux_zpf = None
        subsystems.append(quantize_line(
            result.spec, result.modes, levels=lc.levels, name=lc.name,
            ports=lc.nodes, charge_zpf=charge_zpf, flux_zpf=flux_zpf,
        ))
        for node in lc.nodes:
            port_coord[node] = (lc.name, node)

    # every retained coordinate must carry a port operator
    for name in registry.subsystem_names:
        for i in reduced.block_index.get(name, ()):
            label = reduced.labels[i]
            if label not in port_coord:
                raise ConfigError(
                    f"retained coordinate {label!r} of subsystem {name!r} has no port operator"
                )

    graph = _coupling_graph(reduced, blocks, port_coord, naive, rotated)
    if graph_hook is not None:
        graph = graph_hook(graph)

    h = build_full_hamiltonian(subsystems, graph, dimension_cap=config.analysis.dimension_cap)
    spectrum = diagonalize(subsystems, h, min_overlap=config.analysis.min_overlap)

    dispersive = None
    flat_names = []
    for sub in subsystems:
        for m in range(len(sub.mode_dims)):
            flat_names.append((sub.name, m))
    if config.analysis.qubit and config.analysis.readout:
        qubit_mode = flat_names.index((config.analysis.qubit, 0))
        readout_mode = flat_names.index((config.analysis.readout, 0))
        dispersive = extract_dispersive(spectrum, qubit_mode, readout_mode)

    return DeviceModel(
        config=config, naive=naive, registry=registry, netlist=netlist,
        reduced=reduced, blocks=blocks, subsystems=tuple(subsystems),
        transmon_specs=transmon_specs, lines=lines, graph=graph,
        spectrum=spectrum, dispersive=dispersive, port_coord=port_coord,
    )


def _transmon_junction(config: DeviceConfig, tc: TransmonConfig):
    owned = [j for j in config.junctions if j.subsystem == tc.name]
    if len(owned) != 1:
        raise ConfigError(f"transmon {tc.name!r} must own exactly one junction")
    return owned[0]


def _coupling_graph(
    reduced: ReducedCircuit,
    blocks: CircuitBlocks,
    port_coord: Mapping[str, tuple[str, str]],
    naive: bool,
    rotated: np.ndarray | None,
) -> CouplingGraph:
    labels = list(port_coord)
    edges = []
    for a in range(len(labels)):
        for b in range(a + 1, len(labels)):
            la, lb = labels[a], labels[b]
            sub_a, p_a = port_coord[la]
            sub_b, p_b = port_coord[lb]
            if sub_a == sub_b:
                continue
            if naive:
                ia = reduced.record.rotated_labels.index(la)
                ib = reduced.record.rotated_labels.index(lb)
                entry = -rotated[ia, ib] / (rotated[ia, ia] * rotated[ib, ib])
                inv_c = 2.0 * entry
                inv_l = 0.0
            else:
                inv_c = blocks.inv_c_coupling(la, lb)
                inv_l = blocks.inv_l_coupling(la, lb)
            if inv_c == 0.0 and inv_l == 0.0:
                continue
            edges.append(CouplingEdge(sub_a, p_a, sub_b, p_b, inv_c_eff=inv_c, inv_l_eff=inv_l))
    return CouplingGraph(tuple(edges))


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------

def run_analysis(config: DeviceConfig, naive: bool = False):
    """Full model, and the naive comparison alongside when requested."""
    from .report import build_report

    model = build_model(config)
    naive_model = build_model(config, naive=True) if naive else None
    return build_report(model, naive_model=naive_model)


def run_sweep(config: DeviceConfig, param_path: str, values: Sequence[float]):
    from .report import build_report

    reports = []
    for value in values:
        model = build_model(config.with_override(param_path, float(value)))
        reports.append(build_report(model, swept={param_path: float(value)}))
    return reports


@dataclass(frozen=True)
class BudgetRow:
    feature: str
    variation: str
    chi_hz: float
    delta_percent: float


def run_budget(config: DeviceConfig) -> list[BudgetRow]:
    """Sensitivity budget: toggle each model feature / parameter and report
    the change of chi_qr against the full model."""
    base = build_model(config)
    if base.dispersive is None:
        raise ConfigError("budget requires a qubit and a readout subsystem")
    chi0 = base.dispersive.chi_qr
    qubit = config.analysis.qubit
    rows: list[BudgetRow] = []

    def add(feature: str, variation: str, model: DeviceModel):
        chi = model.dispersive.chi_qr
        rows.append(BudgetRow(feature, variation, chi, 100.0 * (chi - chi0) / abs(chi0)))

    add("coupling_hamiltonians", "qubit couplings only",
        build_model(config, graph_hook=lambda g: g.restricted_to(qubit)))

    readout = next((l for l in config.lines if l.name == config.analysis.readout), None)
    if readout is not None and readout.modes > 1:
        cfg = config.with_overrides({
            f"subsystems.{readout.name}.modes": 1,
            f"subsystems.{readout.name}.levels": [readout.levels[0]],
        })
        add("readout_first_harmonic", "excluded", build_model(cfg))

    if readout is not None:
        for sign in (+1, -1):
            cfg = config.with_override(
                f"subsystems.{readout.name}.z0_ohm", readout.z0_ohm * (1 + 0.03 * sign))
            add("line_impedance", f"{'+' if sign > 0 else '-'}3% on Z0", build_model(cfg))

    def scale_cells(factor):
        def hook(ident, maxwell):
            return MaxwellMatrix(names=maxwell.names, matrix=maxwell.matrix * factor,
                                 display_units=maxwell.display_units)
        return hook

    add("substrate_permittivity", "+2% on cell capacitances",
        build_model(config, cell_hook=scale_cells(1.02)))

    for jc in config.junctions:
        if jc.subsystem == qubit and jc.cj_f > 0.0:
            cfg = config.with_override(f"junctions.{jc.ident}.cj_ff", jc.cj_f * 1.1 / 1e-15)
            add("junction_capacitance", f"+10% on {jc.ident}", build_model(cfg))
            break

    def pad_hook(ident, maxwell):
        n = maxwell.size
        padded = np.zeros((n + 1, n + 1))
        padded[:n, :n] = maxwell.matrix
        spectator = 1e-18  # 1 aF to the local ground keeps the matrix regular
        padded[n, n] = spectator
        padded[n, 0] = padded[0, n] = -spectator
        padded[0, 0] += spectator
        return MaxwellMatrix(names=maxwell.names + (f"__pad_{ident}",), matrix=padded,
                             display_units=maxwell.display_units)

    pad_cfg_raw = dict(config.raw)
    pad_cfg_raw = copy_with_extra_coupler(pad_cfg_raw, [f"__pad_{c.ident}" for c in config.cells])
    from .config import parse_device_config
    pad_cfg = parse_device_config(pad_cfg_raw, base_dir=config.base_dir)
    add("cell_padding", "spectator node added", build_model(pad_cfg, cell_hook=pad_hook))

    return rows


def copy_with_extra_coupler(raw: Mapping, names: Sequence[str]) -> dict:
    import copy as _copy

    out = _copy.deepcopy(dict(raw))
    out["couplers"] = list(out.get("couplers", ())) + list(names)
    return out


def calibrate_junction(
    config: DeviceConfig,
    junction: str,
    target_fq_hz: float,
    lj_bounds_h: tuple[float, float],
    rtol: float = 1e-6,
):
    """Root-solve the full-pipeline qubit frequency against the junction
    inductance. The response is verified to bracket the target at the
    endpoints (f_q decreases as L_j grows); returns (lj, report)."""
    from .report import build_report

    def response(lj: float) -> float:
        model = build_model(config, lj_overrides={junction: lj})
        return model.dispersive.f_qubit

    lo, hi = lj_bounds_h
    f_lo, f_hi = response(lo), response(hi)
    if not (min(f_lo, f_hi) <= target_fq_hz <= max(f_lo, f_hi)):
        raise TargetOutOfRange(
            f"target {target_fq_hz / 1e9:.4f} GHz outside the endpoint range "
            f"[{min(f_lo, f_hi) / 1e9:.4f}, {max(f_lo, f_hi) / 1e9:.4f}] GHz"
        )
    from scipy.optimize import brentq

    lj = float(brentq(lambda x: response(x) - target_fq_hz, lo, hi, rtol=rtol))
    model = build_model(config, lj_overrides={junction: lj})
    return lj, build_report(model, calibrated={junction: lj})
