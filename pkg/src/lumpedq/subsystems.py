"""Quantization of the subsystem building blocks.

Transmons are diagonalized exactly in the Cooper-pair-number basis (which
handles offset charge without approximation); line modes are quantized in
Fock bases with matrix elements fixed by their zero-point fluctuations.
Each quantized subsystem carries its truncated Hamiltonian and the port
charge/flux operators needed for pairwise coupling terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import constants
from scipy.linalg import eigh_tridiagonal

from .errors import TruncationNotConverged, ValidationError
from .loadedline import LineMode, LoadedLineSpec

_E = constants.e


@dataclass(frozen=True)
class TransmonSpec:
    """Junction-mode parameters: dressed capacitance, Josephson energy,
    optional charge offset, and truncation controls."""

    c_eff: float  # F, dressed junction-coordinate capacitance
    ej: float  # J
    q_offset: float = 0.0  # C
    n_max: int = 30  # charge basis runs n = -n_max..n_max
    levels: int = 5  # retained eigenlevels

    def __post_init__(self):
        if self.c_eff <= 0 or self.ej <= 0:
            raise ValidationError("transmon capacitance and Josephson energy must be positive")
        if self.n_max < 10:
            raise ValidationError("charge-basis cutoff n_max must be at least 10")
        if self.levels < 2 or self.levels > 2 * self.n_max:
            raise ValidationError("retained level count must be in [2, 2*n_max]")

    @property
    def e_c(self) -> float:
        """Charging energy e^2 / (2 C_eff), joules."""
        return _E**2 / (2.0 * self.c_eff)

    @property
    def n_g(self) -> float:
        """Offset charge in Cooper pairs."""
        return self.q_offset / (2.0 * _E)


@dataclass(frozen=True)
class QuantizedSubsystem:
    """Truncated subsystem: diagonal Hamiltonian in its own eigenbasis plus
    port operators expressed there.

    ``mode_dims`` lists the per-mode truncations whose product is the
    subsystem dimension; ``bare_labels[i]`` gives the per-mode occupation
    tuple of internal basis state i. A transmon is a single anharmonic mode.
    """

    name: str
    mode_dims: tuple[int, ...]
    hamiltonian: np.ndarray  # J, diagonal in the internal basis
    charge_ops: Mapping[str, np.ndarray]  # port label -> operator (C)
    flux_ops: Mapping[str, np.ndarray] = field(default_factory=dict)  # port label -> operator (Wb)
    mode_frequencies: tuple[float, ...] = ()  # rad/s, harmonic modes only
    charge_scales: Mapping[str, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self):
        dim = int(np.prod(self.mode_dims))
        if self.hamiltonian.shape != (dim, dim):
            raise ValidationError(f"subsystem {self.name!r}: Hamiltonian shape mismatch")
        for label, op in {**self.charge_ops, **self.flux_ops}.items():
            if op.shape != (dim, dim):
                raise ValidationError(f"subsystem {self.name!r}: operator {label!r} shape mismatch")
            if np.max(np.abs(op - op.conj().T)) > 1e-12 * (np.max(np.abs(op)) or 1.0):
                raise ValidationError(f"subsystem {self.name!r}: operator {label!r} not Hermitian")

    @property
    def dimension(self) -> int:
        return int(np.prod(self.mode_dims))

    @property
    def energies(self) -> np.ndarray:
        return np.real(np.diag(self.hamiltonian))

    @property
    def bare_labels(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            tuple(idx) for idx in np.ndindex(*self.mode_dims)
        )

    def ports(self) -> tuple[str, ...]:
        return tuple(self.charge_ops)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each eigenvector real and
    positive so operator matrices are reproducible across platforms."""
    out = vecs.copy()
    for col in range(out.shape[1]):
        i = np.argmax(np.abs(out[:, col]))
        if out[i, col] < 0:
            out[:, col] = -out[:, col]
    return out


def _charge_basis_levels(spec: TransmonSpec, n_max: int, count: int):
    """Lowest eigenpairs of 4E_C (n - n_g)^2 - (E_J/2)(|n><n+1| + h.c.)."""
    n = np.arange(-n_max, n_max + 1, dtype=float)
    diag = 4.0 * spec.e_c * (n - spec.n_g) ** 2
    off = np.full(2 * n_max, -spec.ej / 2.0)
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1))
    return n, vals, _fix_phases(vecs)


def diagonalize_transmon(spec: TransmonSpec) -> QuantizedSubsystem:
    """Exact charge-basis diagonalization; returns the lowest ``levels``
    eigenstates with the charge operator 2e*n projected onto them.

    Truncation is verified by doubling n_max: the 0-1 splitting must be
    reproduced to 1e-10 relative or TruncationNotConverged is raised.
    """
    n, vals, vecs = _charge_basis_levels(spec, spec.n_max, spec.levels)
    _, vals2, _ = _charge_basis_levels(spec, 2 * spec.n_max, min(spec.levels, 2))
    e01 = vals[1] - vals[0]
    e01_big = vals2[1] - vals2[0]
    if abs(e01 - e01_big) > 1e-10 * abs(e01_big):
        raise TruncationNotConverged(
            f"charge-basis cutoff n_max={spec.n_max} not converged: "
            f"E01 changes by {abs(e01 - e01_big) / abs(e01_big):.3e} on doubling"
        )
    charge = 2.0 * _E * (vecs.T @ (n[:, None] * vecs))
    charge = 0.5 * (charge + charge.T)
    return QuantizedSubsystem(
        name="transmon",
        mode_dims=(spec.levels,),
        hamiltonian=np.diag(vals),
        charge_ops={"junction": charge},
        charge_scales={"junction": (2.0 * _E,)},
    )


def _destroy(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)


def _lift(op: np.ndarray, dims: Sequence[int], position: int) -> np.ndarray:
    """Embed a single-mode operator into the product space of ``dims``."""
    out = np.eye(1, dtype=complex)
    for i, d in enumerate(dims):
        factor = op if i == position else np.eye(d, dtype=complex)
        out = np.kron(out, factor)
    return out


def quantize_line(
    spec: LoadedLineSpec,
    modes: Sequence[LineMode],
    levels: int | Sequence[int] = 5,
    name: str = "line",
    ports: str | Sequence[str] = ("z0",),
    charge_zpf: Sequence[float] | None = None,
    flux_zpf: Sequence[float] | None = None,
) -> QuantizedSubsystem:
    """Fock-truncate the listed line modes and build the port operators at
    the loaded end, Q(0) = sum_m i Q_m_zpf (a_m^dag - a_m) and the matching
    flux operator from Phi_m_zpf(0).

    ``spec`` must carry the dressed loading capacitance the modes were
    solved with. Every entry of ``ports`` shares the same z = 0 operators
    (the two-port bus approximation). The per-mode ZPF amplitudes can be
    overridden to realize alternative port conventions.
    """
    if isinstance(ports, str):
        ports = (ports,)
    if isinstance(levels, int):
        level_list = [levels] * len(modes)
    else:
        level_list = list(levels)
    if len(level_list) != len(modes):
        raise ValidationError("need one truncation per line mode")
    if any(l < 2 for l in level_list):
        raise ValidationError("each mode needs at least 2 Fock levels")
    if charge_zpf is None:
        charge_zpf = [m.q0_zpf for m in modes]
    if flux_zpf is None:
        flux_zpf = [float(m.phi_zpf(0.0)) for m in modes]

    dims = tuple(level_list)
    dim = int(np.prod(dims))
    h = np.zeros((dim, dim))
    charge = np.zeros((dim, dim), dtype=complex)
    flux = np.zeros((dim, dim), dtype=complex)
    for pos, (mode, d) in enumerate(zip(modes, dims)):
        a = _destroy(d)
        number = a.T @ a
        h += mode.omega * constants.hbar * np.real(_lift(number + 0.5 * np.eye(d), dims, pos))
        charge += 1j * charge_zpf[pos] * _lift(a.T - a, dims, pos)
        flux += flux_zpf[pos] * _lift(a.T + a, dims, pos)
    return QuantizedSubsystem(
        name=name,
        mode_dims=dims,
        hamiltonian=h,
        charge_ops={p: charge for p in ports},
        flux_ops={p: flux for p in ports},
        mode_frequencies=tuple(m.omega for m in modes),
        charge_scales={p: tuple(charge_zpf) for p in ports},
    )


@dataclass(frozen=True)
class ScaledOperator:
    """One dimensionless port-operator component with its scale factor, so
    that sum(factor * matrix) reproduces the raw charge operator exactly."""

    factor: float  # C; 2e for discrete charge, Q_zpf for a harmonic quadrature
    matrix: np.ndarray
    mode: int


def scale_operators(sub: QuantizedSubsystem, port: str) -> list[ScaledOperator]:
    """Decompose a port charge operator into dimensionless components.

    For a transmon the single component is the Cooper-pair-number operator
    with scale 2e; for harmonic modes each component is i(a^dag - a) with the
    mode's charge ZPF as scale.
    """
    if port not in sub.charge_ops:
        raise ValidationError(f"subsystem {sub.name!r} has no port {port!r}")
    factors = sub.charge_scales.get(port)
    if factors is None:
        raise ValidationError(f"subsystem {sub.name!r} port {port!r} carries no scale record")
    if len(sub.mode_dims) == 1 and len(factors) == 1 and sub.mode_frequencies == ():
        return [ScaledOperator(factors[0], sub.charge_ops[port] / factors[0], 0)]
    out = []
    for pos, factor in enumerate(factors):
        a = _destroy(sub.mode_dims[pos])
        dimless = 1j * _lift(a.T - a, sub.mode_dims, pos)
        out.append(ScaledOperator(factor, dimless, pos))
    return out
