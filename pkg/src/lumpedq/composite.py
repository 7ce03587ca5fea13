"""Composite Hamiltonian assembly, diagonalization, and observables.

The device Hamiltonian is the sum of the subsystem Hamiltonians lifted to the
tensor-product space plus one bilinear term per coupled port pair. Pair
couplings are specified through the reported effective reciprocals
1/C_nm_eff = 2 * [C_k^-1]_nm (and the inductive mirror); since that reporting
convention doubles the raw inverse-matrix entry, each unordered pair term is
assembled with weight 1/2 so the total reproduces the quadratic form
(1/2) Q^T C_k^-1 Q exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import constants

from .errors import (
    DimensionOverflow,
    TargetOutOfRange,
    UnlabeledState,
    ValidationError,
)
from .subsystems import QuantizedSubsystem

DEFAULT_DIMENSION_CAP = 20_000


@dataclass(frozen=True)
class CouplingEdge:
    """Bilinear coupling between two subsystem ports. ``inv_c_eff`` and
    ``inv_l_eff`` carry the factor-two pair-reporting convention."""

    sub_a: str
    port_a: str
    sub_b: str
    port_b: str
    inv_c_eff: float = 0.0  # 1/F
    inv_l_eff: float = 0.0  # 1/H

    def key(self):
        a = (self.sub_a, self.port_a)
        b = (self.sub_b, self.port_b)
        return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class CouplingGraph:
    edges: tuple[CouplingEdge, ...]

    def __post_init__(self):
        keys = [e.key() for e in self.edges]
        if len(set(keys)) != len(keys):
            raise ValidationError("duplicate coupling edges for the same port pair")
        for e in self.edges:
            if e.sub_a == e.sub_b:
                raise ValidationError("coupling edges must join distinct subsystems")
        # deterministic canonical order
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.key())))

    def without_zero_edges(self) -> "CouplingGraph":
        return CouplingGraph(tuple(
            e for e in self.edges if e.inv_c_eff != 0.0 or e.inv_l_eff != 0.0
        ))

    def restricted_to(self, subsystem: str) -> "CouplingGraph":
        """Keep only edges that touch ``subsystem`` (for budget comparisons)."""
        return CouplingGraph(tuple(
            e for e in self.edges if subsystem in (e.sub_a, e.sub_b)
        ))


def _lift_factor(op: np.ndarray, dims: Sequence[int], position: int) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for i, d in enumerate(dims):
        out = np.kron(out, op if i == position else np.eye(d, dtype=complex))
    return out


def build_full_hamiltonian(
    subsystems: Sequence[QuantizedSubsystem],
    graph: CouplingGraph,
    dimension_cap: int = DEFAULT_DIMENSION_CAP,
) -> np.ndarray:
    """Assemble the full Hamiltonian in the product of the subsystem
    eigenbases. Fails fast with DimensionOverflow beyond ``dimension_cap``;
    no silent solver switch."""
    names = [s.name for s in subsystems]
    if len(set(names)) != len(names):
        raise ValidationError("subsystem names must be unique")
    dims = [s.dimension for s in subsystems]
    total = int(np.prod(dims))
    if total > dimension_cap:
        raise DimensionOverflow(
            f"product dimension {total} exceeds the configured cap {dimension_cap}"
        )
    position = {name: i for i, name in enumerate(names)}

    h = np.zeros((total, total), dtype=complex)
    for i, sub in enumerate(subsystems):
        h += _lift_factor(sub.hamiltonian.astype(complex), dims, i)

    for edge in graph.edges:
        for sub_name, port in ((edge.sub_a, edge.port_a), (edge.sub_b, edge.port_b)):
            if sub_name not in position:
                raise ValidationError(f"coupling references unknown subsystem {sub_name!r}")
            if port not in subsystems[position[sub_name]].charge_ops:
                raise ValidationError(f"subsystem {sub_name!r} has no port {port!r}")
        ia, ib = position[edge.sub_a], position[edge.sub_b]
        sub_a, sub_b = subsystems[ia], subsystems[ib]
        if edge.inv_c_eff != 0.0:
            qa = _lift_factor(sub_a.charge_ops[edge.port_a], dims, ia)
            qb = _lift_factor(sub_b.charge_ops[edge.port_b], dims, ib)
            # half of the pair-reported reciprocal restores the raw
            # quadratic-form coefficient [C_k^-1]_nm
            h += 0.5 * edge.inv_c_eff * (qa @ qb)
        if edge.inv_l_eff != 0.0:
            for sub, port in ((sub_a, edge.port_a), (sub_b, edge.port_b)):
                if port not in sub.flux_ops:
                    raise ValidationError(
                        f"inductive coupling needs a flux operator on {sub.name!r}:{port!r}; "
                        "discrete-charge subsystems only couple capacitively"
                    )
            fa = _lift_factor(sub_a.flux_ops[edge.port_a], dims, ia)
            fb = _lift_factor(sub_b.flux_ops[edge.port_b], dims, ib)
            h += 0.5 * edge.inv_l_eff * (fa @ fb)
    return 0.5 * (h + h.conj().T)


def coupling_rates(
    subsystems: Sequence[QuantizedSubsystem],
    graph: CouplingGraph,
) -> dict[tuple[str, int, str, int], float]:
    """Linear coupling rates g (rad/s) per mode pair, from the scale factors
    of the dimensionless port operators: hbar g = A_n B_m [C_k^-1]_nm."""
    by_name = {s.name: s for s in subsystems}
    out: dict[tuple[str, int, str, int], float] = {}
    for edge in graph.edges:
        if edge.inv_c_eff == 0.0:
            continue
        scales_a = by_name[edge.sub_a].charge_scales[edge.port_a]
        scales_b = by_name[edge.sub_b].charge_scales[edge.port_b]
        for ma, fa in enumerate(scales_a):
            for mb, fb in enumerate(scales_b):
                g = fa * fb * (0.5 * edge.inv_c_eff) / constants.hbar
                key = (edge.sub_a, ma, edge.sub_b, mb)
                if key[:2] > key[2:]:
                    key = (edge.sub_b, mb, edge.sub_a, ma)
                out[key] = g
    return out


@dataclass(frozen=True)
class DressedSpectrum:
    """Eigenenergies of the composite Hamiltonian with dressed states labeled
    by their dominant bare product state.

    Labels are occupation tuples flattened across every mode of every
    subsystem, in subsystem order; a label is only reported when the squared
    overlap with the bare state is at least ``min_overlap``.
    """

    energies: np.ndarray  # J, ascending
    labels: Mapping[tuple[int, ...], int]
    overlaps: Mapping[tuple[int, ...], float]
    subsystem_names: tuple[str, ...]
    mode_dims: tuple[tuple[int, ...], ...]
    unlabeled: tuple[int, ...] = ()
    min_overlap: float = 0.5

    def energy_of(self, label: tuple[int, ...]) -> float:
        if label not in self.labels:
            raise UnlabeledState(
                f"no dressed state labeled {label}; best overlaps fell below "
                f"{self.min_overlap} or the state count was insufficient"
            )
        return float(self.energies[self.labels[label]])

    def single_excitation(self, flat_mode: int) -> tuple[int, ...]:
        n_modes = sum(len(d) for d in self.mode_dims)
        lab = [0] * n_modes
        lab[flat_mode] = 1
        return tuple(lab)


def diagonalize(
    subsystems: Sequence[QuantizedSubsystem],
    hamiltonian: np.ndarray,
    min_overlap: float = 0.5,
) -> DressedSpectrum:
    """Dense diagonalization plus maximum-overlap labeling.

    Bare labels are matched greedily by descending overlap, ties broken by
    lower dressed energy, which keeps the map injective.
    """
    vals, vecs = np.linalg.eigh(hamiltonian)
    dims = [s.dimension for s in subsystems]
    flat_labels: list[tuple[int, ...]] = []
    for idx in np.ndindex(*dims):
        combo: tuple[int, ...] = ()
        for sub, i in zip(subsystems, idx):
            combo = combo + sub.bare_labels[i]
        flat_labels.append(combo)

    overlap = np.abs(vecs) ** 2  # overlap[basis, state]
    order = np.argsort(overlap, axis=None)[::-1]
    n = len(vals)
    basis_taken = np.zeros(n, dtype=bool)
    state_taken = np.zeros(n, dtype=bool)
    labels: dict[tuple[int, ...], int] = {}
    quality: dict[tuple[int, ...], float] = {}
    assigned = 0
    for flat in order:
        b, s = divmod(int(flat), n)
        if basis_taken[b] or state_taken[s]:
            continue
        if overlap[b, s] < min_overlap:
            break
        basis_taken[b] = True
        state_taken[s] = True
        labels[flat_labels[b]] = int(s)
        quality[flat_labels[b]] = float(overlap[b, s])
        assigned += 1
        if assigned == n:
            break
    unlabeled = tuple(int(s) for s in range(n) if not state_taken[s])
    return DressedSpectrum(
        energies=vals,
        labels=labels,
        overlaps=quality,
        subsystem_names=tuple(s.name for s in subsystems),
        mode_dims=tuple(s.mode_dims for s in subsystems),
        unlabeled=unlabeled,
        min_overlap=min_overlap,
    )


@dataclass(frozen=True)
class DispersiveObservables:
    """Dressed observables in hertz.

    Conventions: transition frequencies are E(state) - E(ground) over h;
    anharmonicity alpha = f02 - 2 f01 of the qubit mode (negative for a
    transmon); cross-Kerr chi = (E11 - E10 - E01 + E00)/h, negative when an
    excited qubit pulls the readout down.
    """

    f_qubit: float
    f_readout: float
    alpha_qubit: float
    chi_qr: float


def extract_dispersive(
    spectrum: DressedSpectrum,
    qubit_mode: int = 0,
    readout_mode: int = 1,
) -> DispersiveObservables:
    """Qubit/readout observables from the labeled dressed energies."""
    n_modes = sum(len(d) for d in spectrum.mode_dims)

    def lab(*occ: tuple[int, int]) -> tuple[int, ...]:
        out = [0] * n_modes
        for mode, count in occ:
            out[mode] = count
        return tuple(out)

    e00 = spectrum.energy_of(lab())
    e10 = spectrum.energy_of(lab((qubit_mode, 1)))
    e01 = spectrum.energy_of(lab((readout_mode, 1)))
    e20 = spectrum.energy_of(lab((qubit_mode, 2)))
    e11 = spectrum.energy_of(lab((qubit_mode, 1), (readout_mode, 1)))
    h = constants.h
    return DispersiveObservables(
        f_qubit=(e10 - e00) / h,
        f_readout=(e01 - e00) / h,
        alpha_qubit=(e20 - 2.0 * e10 + e00) / h,
        chi_qr=(e11 - e10 - e01 + e00) / h,
    )


def mode_frequencies(spectrum: DressedSpectrum) -> list[float]:
    """Dressed single-excitation frequency (Hz) of every flattened mode."""
    n_modes = sum(len(d) for d in spectrum.mode_dims)
    e0 = spectrum.energy_of(tuple([0] * n_modes))
    out = []
    for m in range(n_modes):
        out.append((spectrum.energy_of(spectrum.single_excitation(m)) - e0) / constants.h)
    return out


def cross_kerr_matrix(spectrum: DressedSpectrum) -> np.ndarray:
    """Pairwise cross-Kerr chi_ab (Hz) for all flattened mode pairs with the
    required labels present; NaN where a two-excitation label is unresolved."""
    n_modes = sum(len(d) for d in spectrum.mode_dims)
    e0 = spectrum.energy_of(tuple([0] * n_modes))
    chi = np.full((n_modes, n_modes), np.nan)
    for a in range(n_modes):
        for b in range(a + 1, n_modes):
            la = spectrum.single_excitation(a)
            lb = spectrum.single_excitation(b)
            lab_ab = tuple(x + y for x, y in zip(la, lb))
            try:
                val = (spectrum.energy_of(lab_ab) - spectrum.energy_of(la)
                       - spectrum.energy_of(lb) + e0) / constants.h
            except UnlabeledState:
                continue
            chi[a, b] = chi[b, a] = val
    return chi


def calibrate_scalar(
    response,
    target: float,
    bounds: tuple[float, float],
    rtol: float = 1e-6,
) -> float:
    """Monotone scalar calibration: find x in ``bounds`` with response(x) =
    target. The endpoint responses must bracket the target, otherwise
    TargetOutOfRange is raised."""
    from scipy.optimize import brentq

    lo, hi = bounds
    f_lo = response(lo) - target
    f_hi = response(hi) - target
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise TargetOutOfRange(
            f"target {target:.6g} not bracketed by endpoint responses "
            f"({response(lo):.6g}, {response(hi):.6g})"
        )
    return float(brentq(lambda x: response(x) - target, lo, hi, rtol=rtol))
