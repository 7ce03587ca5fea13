"""lumpedq: dressed Hamiltonians of lumped superconducting circuit networks.

Per-cell electrostatic capacitance matrices plus a device partition
description go in; dressed frequencies, anharmonicities, coupling rates, and
cross-Kerr shifts come out.
"""

from .composite import (
    CouplingEdge,
    CouplingGraph,
    DispersiveObservables,
    DressedSpectrum,
    build_full_hamiltonian,
    cross_kerr_matrix,
    diagonalize,
    extract_dispersive,
)
from .config import DeviceConfig, load_device_config, parse_device_config
from .loadedline import (
    LineMode,
    LoadedLineSpec,
    calibrate_length,
    characteristic_lhs,
    epr_loading,
    solve_modes,
    zpf,
)
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
    reduce_maxwell,
    reduce_network,
    rotate_to_junction_basis,
    schur_eliminate,
    second_pass_eliminate,
    select_constraint_basis,
)
from .subsystems import (
    QuantizedSubsystem,
    TransmonSpec,
    diagonalize_transmon,
    quantize_line,
    scale_operators,
)

__version__ = "0.1.0"
