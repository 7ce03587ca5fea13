"""Circuit network model and matrix reduction pipeline.

Everything here operates on node-to-datum generalized fluxes in SI units
(farads, henries). The pipeline is:

    MaxwellMatrix --reduce_maxwell--> CellMatrices --compose_cells-->
    CompositeNetlist --rotate_to_junction_basis--> junction-flux basis
    --select_constraint_basis/schur_eliminate--> capacitive couplers removed
    --second_pass_eliminate--> inductive couplers removed
    --extract_blocks--> dressed subsystem blocks and pairwise couplings

All functions are pure; returned dataclasses are frozen and safe to share
across threads or sweep workers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import constants

from .errors import (
    DependentJunctionLoop,
    DimensionMismatch,
    IllConditionedMatrix,
    MalformedMatrix,
    MalformedPartition,
    NonNullDirection,
    SingularCouplerBlock,
    UnknownDatum,
    UnknownNode,
)

PHI_0 = constants.hbar / (2.0 * constants.e)  # reduced flux quantum, Wb

SYMMETRY_RTOL = 1e-12
PSD_RTOL = 1e-12
# Input matrices carry ~1e-3 relative extraction noise, so rank decisions
# must sit far above machine epsilon but far below physical couplings.
KERNEL_RTOL = 1e-9
# smallest/largest eigenvalue ratio below which a block is treated as singular
SINGULAR_RATIO = 1e-18


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MalformedMatrix(f"expected a square matrix, got shape {m.shape}")
    return m


def check_symmetric(m: np.ndarray, name: str = "matrix", rtol: float = SYMMETRY_RTOL) -> None:
    scale = np.max(np.abs(m)) or 1.0
    asym = np.max(np.abs(m - m.T))
    if asym > rtol * scale:
        raise MalformedMatrix(f"{name} is not symmetric (relative asymmetry {asym / scale:.3e})")


def check_psd(m: np.ndarray, name: str = "matrix", rtol: float = PSD_RTOL) -> None:
    if m.size == 0:
        return
    w = np.linalg.eigvalsh(0.5 * (m + m.T))
    largest = max(w[-1], 0.0) or 1.0
    if w[0] < -rtol * largest:
        raise MalformedMatrix(
            f"{name} is not positive semi-definite (min/max eigenvalue {w[0]:.3e}/{largest:.3e})"
        )


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NodeRegistry:
    """Device node bookkeeping: datum, subsystem/coupler partition, cells.

    Non-datum nodes are kept in lexicographic order so every matrix built on
    top of the registry has a deterministic, reproducible layout.
    """

    datum: str
    subsystem_names: tuple[str, ...]
    subsystem_nodes: tuple[frozenset[str], ...]
    couplers: frozenset[str]
    cell_of: Mapping[str, str]

    def __post_init__(self):
        if len(self.subsystem_names) != len(self.subsystem_nodes):
            raise MalformedPartition("subsystem name/node lists differ in length")
        if len(set(self.subsystem_names)) != len(self.subsystem_names):
            raise MalformedPartition("duplicate subsystem names")
        all_sets = list(self.subsystem_nodes) + [self.couplers]
        seen: set[str] = set()
        for s in all_sets:
            if self.datum in s:
                raise MalformedPartition(f"datum {self.datum!r} assigned to a partition set")
            overlap = seen & s
            if overlap:
                raise MalformedPartition(f"nodes assigned twice: {sorted(overlap)}")
            seen |= s
        missing = [n for n in seen if n not in self.cell_of]
        if missing:
            raise MalformedPartition(f"nodes without a cell: {sorted(missing)}")
        extra = [n for n in self.cell_of if n != self.datum and n not in seen]
        if extra:
            raise MalformedPartition(f"cell nodes not covered by any partition set: {sorted(extra)}")

    @property
    def nodes(self) -> tuple[str, ...]:
        """All non-datum nodes, lexicographically ordered."""
        named = set().union(*self.subsystem_nodes) if self.subsystem_nodes else set()
        return tuple(sorted(named | self.couplers))

    def subsystem_of(self, node: str) -> str | None:
        for name, nodes in zip(self.subsystem_names, self.subsystem_nodes):
            if node in nodes:
                return name
        return None

    def is_coupler(self, node: str) -> bool:
        return node in self.couplers


@dataclass(frozen=True)
class MaxwellMatrix:
    """Electrostatic capacitance matrix over N+1 named nodes (local ground
    included). Off-diagonal entries store the negated mutual capacitances;
    each row sum is the node self-capacitance to infinity.
    """

    names: tuple[str, ...]
    matrix: np.ndarray  # farads
    display_units: str = "F"
    # Values exactly as read from file, used to make serialize(parse(f))
    # byte-identical; recomputing matrix/scale can flip the last bit.
    display_matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if len(self.names) != m.shape[0]:
            raise DimensionMismatch(
                f"{len(self.names)} node names for a {m.shape[0]}x{m.shape[1]} matrix"
            )
        if len(set(self.names)) != len(self.names):
            raise MalformedMatrix("duplicate node names")
        check_symmetric(m, "Maxwell matrix")
        scale = np.max(np.abs(m)) or 1.0
        off = m - np.diag(np.diag(m))
        if np.any(off > 1e-12 * scale):
            i, j = np.unravel_index(np.argmax(off), off.shape)
            raise MalformedMatrix(
                f"positive off-diagonal entry at ({self.names[i]}, {self.names[j]}): {m[i, j]:.6g}"
            )
        sums = m.sum(axis=1)
        if np.any(sums < -1e-9 * scale):
            bad = [self.names[i] for i in np.nonzero(sums < -1e-9 * scale)[0]]
            raise MalformedMatrix(f"negative self-capacitance (row sum) at nodes {bad}")

    @property
    def size(self) -> int:
        return len(self.names)

    def self_capacitance(self, node: str) -> float:
        """Capacitance to infinity of ``node`` (its row sum)."""
        return float(self.matrix[self.names.index(node)].sum())


@dataclass(frozen=True)
class JunctionElement:
    """Non-linear inductive dipole across two nodes.

    ``kind`` selects the energy function: plain cosine with fixed Josephson
    energy, or a flux-tunable squid cosine whose effective energy follows the
    bias ``phi_ext``. ``lj`` is the linear-response inductance at the bias
    point and must satisfy lj = PHI_0**2 / ej_effective.
    """

    ident: str
    node_neg: str  # flux convention: phi_j = phi(node_pos) - phi(node_neg)
    node_pos: str
    subsystem: str
    kind: str = "cosine"
    ej: float = 0.0  # J; for kind="squid" this is the junction-sum energy
    asymmetry: float = 0.0  # squid junction asymmetry d in [0, 1)
    phi_ext: float = 0.0  # Wb
    cj: float = 0.0  # F
    lj: float | None = None  # H; derived from ej when omitted

    def __post_init__(self):
        if self.kind not in ("cosine", "squid"):
            raise MalformedPartition(f"unsupported junction kind {self.kind!r}")
        if self.node_neg == self.node_pos:
            raise MalformedPartition(f"junction {self.ident!r} terminals coincide")
        if self.cj < 0:
            raise MalformedMatrix(f"junction {self.ident!r} has negative capacitance")
        ej_eff = self.effective_ej()
        if ej_eff <= 0:
            raise MalformedMatrix(f"junction {self.ident!r} has non-positive Josephson energy")
        derived = PHI_0**2 / ej_eff
        if self.lj is None:
            object.__setattr__(self, "lj", derived)
        elif abs(self.lj - derived) > 1e-9 * derived:
            raise MalformedMatrix(
                f"junction {self.ident!r}: lj={self.lj:.12e} inconsistent with "
                f"energy function (expected {derived:.12e})"
            )

    def effective_ej(self) -> float:
        """Josephson energy at the bias point, joules."""
        if self.kind == "cosine":
            return self.ej
        x = np.pi * self.phi_ext / (2 * np.pi * PHI_0)  # phi_ext / flux quantum
        return self.ej * float(np.sqrt(np.cos(x) ** 2 + self.asymmetry**2 * np.sin(x) ** 2))

    def energy(self, phi: float) -> float:
        """Inductive energy at junction flux ``phi`` (Wb)."""
        return -self.effective_ej() * float(np.cos(phi / PHI_0))

    @classmethod
    def from_inductance(cls, ident, node_neg, node_pos, subsystem, lj, cj=0.0):
        return cls(ident, node_neg, node_pos, subsystem, ej=PHI_0**2 / lj, cj=cj)


@dataclass(frozen=True)
class CellMatrices:
    """Per-cell node-to-datum capacitance and inverse inductance matrices."""

    ident: str
    nodes: tuple[str, ...]
    c_mat: np.ndarray  # F
    l_inv: np.ndarray  # 1/H
    junctions: tuple[JunctionElement, ...] = ()

    def __post_init__(self):
        c = _as_matrix(self.c_mat)
        li = _as_matrix(self.l_inv)
        object.__setattr__(self, "c_mat", c)
        object.__setattr__(self, "l_inv", li)
        n = len(self.nodes)
        if c.shape != (n, n) or li.shape != (n, n):
            raise DimensionMismatch(
                f"cell {self.ident!r}: {n} nodes but matrices {c.shape} and {li.shape}"
            )
        check_symmetric(c, f"cell {self.ident!r} capacitance")
        check_symmetric(li, f"cell {self.ident!r} inverse inductance")
        check_psd(c, f"cell {self.ident!r} capacitance")


@dataclass(frozen=True)
class CompositeNetlist:
    """Assembled device-level matrices in the node-to-datum flux basis."""

    registry: NodeRegistry
    c_mat: np.ndarray
    l_inv: np.ndarray
    junctions: tuple[JunctionElement, ...]

    def __post_init__(self):
        check_symmetric(self.c_mat, "composite capacitance")
        check_symmetric(self.l_inv, "composite inverse inductance")
        check_psd(self.c_mat, "composite capacitance")

    @property
    def labels(self) -> tuple[str, ...]:
        return self.registry.nodes


@dataclass(frozen=True)
class ReductionRecord:
    """Transformations applied on the way to the reduced basis."""

    s_n: np.ndarray  # node basis -> rotated basis, phi_node = s_n @ phi_rotated
    rotated_labels: tuple[str, ...]
    s_r_first: np.ndarray
    s_k_first: np.ndarray
    s_r_second: np.ndarray
    s_k_second: np.ndarray
    eliminated: tuple[str, ...]


@dataclass(frozen=True)
class ReducedCircuit:
    """Constraint-eliminated circuit: retained coordinates, reduced matrices,
    and the subsystem block index maps.

    ``l_inv_prime`` has every junction's linear inductance subtracted from its
    diagonal entry, so the junction energy can enter through its full
    non-linear form downstream.
    """

    labels: tuple[str, ...]  # junction fluxes first
    c_mat: np.ndarray
    l_inv: np.ndarray
    l_inv_prime: np.ndarray
    block_index: Mapping[str, tuple[int, ...]]
    junction_index: Mapping[str, int]
    junctions: tuple[JunctionElement, ...]
    record: ReductionRecord

    def __post_init__(self):
        check_symmetric(self.c_mat, "reduced capacitance")
        check_psd(self.c_mat, "reduced capacitance")
        w = np.linalg.eigvalsh(self.c_mat)
        if w[0] <= SINGULAR_RATIO * w[-1]:
            raise IllConditionedMatrix(
                f"reduced capacitance matrix is numerically singular "
                f"(eigenvalue ratio {w[0] / w[-1]:.3e})"
            )
        for j in self.junctions:
            if j.ident not in self.labels:
                raise MalformedPartition(f"junction flux {j.ident!r} was eliminated")
        covered = sorted(i for idx in self.block_index.values() for i in idx)
        if covered != list(range(len(self.labels))):
            raise MalformedPartition("block index maps do not partition the retained coordinates")

    def index_of(self, label: str) -> int:
        return self.labels.index(label)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def reduce_maxwell(m: MaxwellMatrix, datum: str) -> CellMatrices:
    """Fold the Maxwell matrix to the node-to-datum basis by deleting the
    datum row and column; remaining node order is preserved."""
    if datum not in m.names:
        raise UnknownDatum(f"datum {datum!r} not among nodes {list(m.names)}")
    keep = [i for i, n in enumerate(m.names) if n != datum]
    nodes = tuple(m.names[i] for i in keep)
    c = m.matrix[np.ix_(keep, keep)].copy()
    return CellMatrices(ident="maxwell", nodes=nodes, c_mat=c, l_inv=np.zeros_like(c))


def embed_maxwell(cell: CellMatrices, datum: str, datum_mutuals: Sequence[float]) -> MaxwellMatrix:
    """Inverse of :func:`reduce_maxwell` given the stored datum mutual
    capacitances (positive values, one per cell node); the datum itself is
    assumed to carry no self-capacitance to infinity."""
    n = len(cell.nodes)
    if len(datum_mutuals) != n:
        raise DimensionMismatch("need one datum mutual capacitance per node")
    full = np.zeros((n + 1, n + 1))
    full[1:, 1:] = cell.c_mat
    full[0, 1:] = -np.asarray(datum_mutuals, dtype=float)
    full[1:, 0] = full[0, 1:]
    full[0, 0] = -full[0, 1:].sum()  # zero self-capacitance to infinity for the ground
    return MaxwellMatrix(names=(datum, *cell.nodes), matrix=full)


def merge_maxwell_nodes(m: MaxwellMatrix, merge: Iterable[str], into: str) -> MaxwellMatrix:
    """Merge grounded islands into a single net by summing their rows and
    columns; mutuals internal to the merged group vanish."""
    merge = [n for n in merge if n != into]
    for n in merge:
        if n not in m.names:
            raise UnknownNode(f"cannot merge unknown node {n!r}")
    if into not in m.names:
        raise UnknownNode(f"merge target {into!r} not present")
    keep = [n for n in m.names if n not in merge]
    idx = {n: i for i, n in enumerate(m.names)}
    groups = [[idx[n]] + ([idx[g] for g in merge] if n == into else []) for n in keep]
    out = np.zeros((len(keep), len(keep)))
    for a, ga in enumerate(groups):
        for b, gb in enumerate(groups):
            out[a, b] = m.matrix[np.ix_(ga, gb)].sum()
    np.fill_diagonal(out, np.diag(out))
    return MaxwellMatrix(names=tuple(keep), matrix=_symmetrize(out), display_units=m.display_units)


def _stamp_two_terminal(mat: np.ndarray, index: Mapping[str, int], datum: str,
                        n1: str, n2: str, value: float) -> None:
    """Add a two-terminal element of nodal value ``value`` across (n1, n2);
    a datum terminal contributes only to the other node's diagonal."""
    for n in (n1, n2):
        if n != datum and n not in index:
            raise UnknownNode(f"element terminal {n!r} is not a registry node")
    if n1 != datum and n2 != datum:
        i, j = index[n1], index[n2]
        mat[i, i] += value
        mat[j, j] += value
        mat[i, j] -= value
        mat[j, i] -= value
    elif n1 != datum:
        mat[index[n1], index[n1]] += value
    elif n2 != datum:
        mat[index[n2], index[n2]] += value


def compose_cells(cells: Sequence[CellMatrices], registry: NodeRegistry) -> CompositeNetlist:
    """Scatter-add cell matrices into the global node order and stamp each
    junction's intrinsic capacitance and linear inductance across its
    terminal pair."""
    nodes = registry.nodes
    index = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    c = np.zeros((n, n))
    l_inv = np.zeros((n, n))
    junctions: list[JunctionElement] = []
    for cell in cells:
        rows = []
        for node in cell.nodes:
            if node not in index:
                raise UnknownNode(f"cell {cell.ident!r} node {node!r} not in registry")
            rows.append(index[node])
        ij = np.ix_(rows, rows)
        c[ij] += cell.c_mat
        l_inv[ij] += cell.l_inv
        junctions.extend(cell.junctions)
    for j in junctions:
        _stamp_two_terminal(c, index, registry.datum, j.node_neg, j.node_pos, j.cj)
        _stamp_two_terminal(l_inv, index, registry.datum, j.node_neg, j.node_pos, 1.0 / j.lj)
    return CompositeNetlist(registry=registry, c_mat=_symmetrize(c),
                            l_inv=_symmetrize(l_inv), junctions=tuple(junctions))


def _junction_pivots(net: CompositeNetlist) -> dict[str, str]:
    """Assign each junction the node coordinate its flux will replace.

    The junction graph must be a forest (no flux loops). Each tree is rooted
    at the datum when present, else at a coupler node, else at the
    lexicographically smallest node, and every edge consumes its endpoint
    farther from the root. Rooting away from couplers keeps coupler node
    fluxes available for the later constraint elimination.
    """
    datum = net.registry.datum
    adjacency: dict[str, list[tuple[str, str]]] = {}
    for j in net.junctions:
        adjacency.setdefault(j.node_neg, []).append((j.node_pos, j.ident))
        adjacency.setdefault(j.node_pos, []).append((j.node_neg, j.ident))

    pivots: dict[str, str] = {}
    visited: set[str] = set()
    components: list[list[str]] = []
    for start in sorted(adjacency):
        if start in visited:
            continue
        comp = [start]
        visited.add(start)
        queue = [start]
        while queue:
            u = queue.pop()
            for v, _ in adjacency[u]:
                if v not in visited:
                    visited.add(v)
                    comp.append(v)
                    queue.append(v)
        components.append(sorted(comp))

    for comp in components:
        if datum in comp:
            root = datum
        else:
            coupler = [n for n in comp if net.registry.is_coupler(n)]
            root = coupler[0] if coupler else comp[0]
        seen_edges: set[str] = set()
        seen_nodes = {root}
        queue = [root]
        while queue:
            u = queue.pop(0)
            for v, ident in sorted(adjacency[u]):
                if ident in seen_edges:
                    continue
                seen_edges.add(ident)
                if v in seen_nodes:
                    raise DependentJunctionLoop(
                        f"junction {ident!r} closes a superconducting loop; "
                        "flux-loop circuits are out of scope"
                    )
                seen_nodes.add(v)
                pivots[ident] = v
                queue.append(v)
    return pivots


def rotate_to_junction_basis(
    net: CompositeNetlist,
) -> tuple[np.ndarray, np.ndarray, tuple[str, ...], np.ndarray]:
    """Rotate the node-flux basis so every junction flux phi_j = phi(n2) -
    phi(n1) is an explicit coordinate, listed first.

    Returns (C, L_inv, labels, s_n) with C = s_n.T @ C_n @ s_n and
    L_inv = s_n.T @ L_inv_n @ s_n; s_n is integer-valued and invertible.
    """
    nodes = net.labels
    index = {n: i for i, n in enumerate(nodes)}
    pivots = _junction_pivots(net)

    n = len(nodes)
    rows = []
    labels: list[str] = []
    for j in net.junctions:
        row = np.zeros(n)
        if j.node_pos != net.registry.datum:
            row[index[j.node_pos]] += 1.0
        if j.node_neg != net.registry.datum:
            row[index[j.node_neg]] -= 1.0
        rows.append(row)
        labels.append(j.ident)
    consumed = set(pivots.values())
    for node in nodes:
        if node in consumed:
            continue
        row = np.zeros(n)
        row[index[node]] = 1.0
        rows.append(row)
        labels.append(node)
    t = np.vstack(rows) if rows else np.eye(n)

    sign, logdet = np.linalg.slogdet(t)
    if sign == 0 or not np.isfinite(logdet):
        raise DependentJunctionLoop("junction flux difference vectors are linearly dependent")
    s_n = np.linalg.inv(t)
    s_n = np.round(s_n)  # exact by construction: t is unimodular over the integers
    if np.max(np.abs(t @ s_n - np.eye(n))) > 1e-9:
        raise DependentJunctionLoop("junction basis transformation is not invertible")

    c = _symmetrize(s_n.T @ net.c_mat @ s_n)
    l_inv = _symmetrize(s_n.T @ net.l_inv @ s_n)
    return c, l_inv, tuple(labels), s_n


def coupler_class_warnings(
    c_mat: np.ndarray,
    l_inv: np.ndarray,
    labels: Sequence[str],
    registry: NodeRegistry,
) -> list[str]:
    """Check the non-dynamical sufficiency condition for every declared
    coupler coordinate (touched by one element class only) and warn on
    failures. Runs in the junction basis: a junction's inductance belongs to
    its own flux coordinate, not to the terminal pads it spans."""
    messages = []
    index = {lab: i for i, lab in enumerate(labels)}
    c_scale = np.max(np.abs(c_mat)) or 1.0
    l_scale = np.max(np.abs(l_inv)) or 1.0
    for node in sorted(registry.couplers):
        if node not in index:
            continue  # consumed by a junction pivot
        i = index[node]
        touched_c = np.max(np.abs(c_mat[i])) > 1e-14 * c_scale
        touched_l = np.max(np.abs(l_inv[i])) > 1e-14 * l_scale
        if touched_c and touched_l:
            msg = (
                f"coupler node {node!r} is touched by both capacitive and inductive "
                "elements; only verified kernel directions will be eliminated"
            )
            warnings.warn(msg)
            messages.append(msg)
    return messages


def _kernel_directions(mat: np.ndarray, candidates: Sequence[int]) -> list[int]:
    scale = np.linalg.norm(mat, 2) if mat.size else 0.0
    if scale == 0.0:
        return list(candidates)
    return [i for i in candidates if np.linalg.norm(mat[:, i]) <= KERNEL_RTOL * scale]


def _complement_columns(n: int, chosen: Sequence[int]) -> np.ndarray:
    keep = [i for i in range(n) if i not in set(chosen)]
    s_k = np.zeros((n, len(keep)))
    for col, i in enumerate(keep):
        s_k[i, col] = 1.0
    return s_k


def select_constraint_basis(
    c_mat: np.ndarray,
    l_inv: np.ndarray,
    labels: Sequence[str],
    registry: NodeRegistry,
    preserve: Sequence[str] = (),
    require: Sequence[str] = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Select the elimination basis for capacitively-touched coupler fluxes.

    S_r columns span verified coupler directions inside ker(L_inv);
    subsystem-owned kernel directions (for instance the uniform mode of an
    open-ended line) are never candidates, and ``preserve`` can exclude
    specific coupler coordinates explicitly. S_k is the complementary set of
    identity columns. ``require`` lists coordinates that must be eliminated;
    a required coordinate outside the kernel raises NonNullDirection.
    """
    labels = tuple(labels)
    candidates = [
        i for i, lab in enumerate(labels)
        if registry.is_coupler(lab) and lab not in preserve
    ]
    kernel = _kernel_directions(l_inv, candidates)
    for lab in require:
        if lab not in labels:
            raise UnknownNode(f"required elimination coordinate {lab!r} not in basis")
        if labels.index(lab) not in kernel:
            scale = np.linalg.norm(l_inv, 2)
            resid = np.linalg.norm(l_inv[:, labels.index(lab)])
            raise NonNullDirection(
                f"coordinate {lab!r} is not a null direction of the inverse inductance "
                f"(|L^-1 s| = {resid:.3e} vs tolerance {KERNEL_RTOL * scale:.3e})"
            )
    n = len(labels)
    s_r = np.zeros((n, len(kernel)))
    for col, i in enumerate(kernel):
        s_r[i, col] = 1.0
    return s_r, _complement_columns(n, kernel)


def schur_eliminate(
    c_mat: np.ndarray,
    l_inv: np.ndarray,
    s_r: np.ndarray,
    s_k: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Eliminate the S_r directions: restrict L_inv and take the Schur
    complement of the capacitance quadratic form on the retained basis."""
    l_red = _symmetrize(s_k.T @ l_inv @ s_k)
    if s_r.shape[1] == 0:
        return _symmetrize(s_k.T @ c_mat @ s_k), l_red
    block = s_r.T @ c_mat @ s_r
    w = np.linalg.eigvalsh(_symmetrize(block))
    if w[0] <= SINGULAR_RATIO * max(w[-1], 0.0) or w[-1] <= 0.0:
        raise SingularCouplerBlock(
            "coupler capacitance block is numerically singular; an eliminated "
            "coupler island has no capacitive path"
        )
    cross = c_mat @ s_r
    c_red = s_k.T @ (c_mat - cross @ np.linalg.solve(block, cross.T)) @ s_k
    return _symmetrize(c_red), l_red


def second_pass_eliminate(
    c_mat: np.ndarray,
    l_inv: np.ndarray,
    labels: Sequence[str],
    registry: NodeRegistry,
    preserve: Sequence[str] = (),
) -> tuple[np.ndarray, np.ndarray, tuple[str, ...], np.ndarray, np.ndarray]:
    """Mirror of the first pass with the matrix roles flipped: coupler
    directions in ker(C) are removed via the Schur complement of L_inv.

    Returns (C, L_inv, labels, s_r, s_k); an identity pass when no inductive
    coupler directions exist.
    """
    labels = tuple(labels)
    candidates = [
        i for i, lab in enumerate(labels)
        if registry.is_coupler(lab) and lab not in preserve
    ]
    kernel = _kernel_directions(c_mat, candidates)
    n = len(labels)
    s_r = np.zeros((n, len(kernel)))
    for col, i in enumerate(kernel):
        s_r[i, col] = 1.0
    s_k = _complement_columns(n, kernel)
    if not kernel:
        return c_mat, l_inv, labels, s_r, s_k
    block = s_r.T @ l_inv @ s_r
    w = np.linalg.eigvalsh(_symmetrize(block))
    if w[0] <= SINGULAR_RATIO * max(w[-1], 0.0) or w[-1] <= 0.0:
        raise SingularCouplerBlock(
            "coupler inductance block is numerically singular during the second pass"
        )
    cross = l_inv @ s_r
    l_red = _symmetrize(s_k.T @ (l_inv - cross @ np.linalg.solve(block, cross.T)) @ s_k)
    c_red = _symmetrize(s_k.T @ c_mat @ s_k)
    kept = tuple(lab for i, lab in enumerate(labels) if i not in set(kernel))
    return c_red, l_red, kept, s_r, s_k


def reduce_network(net: CompositeNetlist, preserve: Sequence[str] = ()) -> ReducedCircuit:
    """Run the full two-pass elimination and assemble the reduced circuit."""
    c, l_inv, labels, s_n = rotate_to_junction_basis(net)
    coupler_class_warnings(c, l_inv, labels, net.registry)

    s_r1, s_k1 = select_constraint_basis(c, l_inv, labels, net.registry, preserve=preserve)
    eliminated1 = tuple(labels[i] for i in np.nonzero(s_r1.sum(axis=1))[0])
    c1, l1 = schur_eliminate(c, l_inv, s_r1, s_k1)
    labels1 = tuple(lab for lab in labels if lab not in eliminated1)

    c2, l2, labels2, s_r2, s_k2 = second_pass_eliminate(
        c1, l1, labels1, net.registry, preserve=preserve
    )
    eliminated2 = tuple(lab for lab in labels1 if lab not in labels2)

    leftovers = [lab for lab in labels2 if net.registry.is_coupler(lab) and lab not in preserve]
    if leftovers:
        raise NonNullDirection(
            f"coupler coordinates {leftovers} lie in neither kernel space; "
            "declare them as subsystem nodes or fix the element classes touching them"
        )

    junction_index = {}
    block_lists: dict[str, list[int]] = {name: [] for name in net.registry.subsystem_names}
    junction_by_id = {j.ident: j for j in net.junctions}
    for i, lab in enumerate(labels2):
        if lab in junction_by_id:
            junction_index[lab] = i
            block_lists[junction_by_id[lab].subsystem].append(i)
        else:
            owner = net.registry.subsystem_of(lab)
            if owner is None:
                # preserved coupler coordinate: grouped under its own key
                block_lists.setdefault(f"coupler:{lab}", []).append(i)
            else:
                block_lists[owner].append(i)

    l_prime = l2.copy()
    for j in net.junctions:
        k = junction_index[j.ident]
        l_prime[k, k] -= 1.0 / j.lj

    record = ReductionRecord(
        s_n=s_n, rotated_labels=labels,
        s_r_first=s_r1, s_k_first=s_k1,
        s_r_second=s_r2, s_k_second=s_k2,
        eliminated=eliminated1 + eliminated2,
    )
    return ReducedCircuit(
        labels=labels2, c_mat=c2, l_inv=l2, l_inv_prime=l_prime,
        block_index={k: tuple(v) for k, v in block_lists.items()},
        junction_index=junction_index, junctions=net.junctions, record=record,
    )


# ---------------------------------------------------------------------------
# block extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CircuitBlocks:
    """Dressed subsystem blocks of the inverted reduced matrices.

    Diagonal entries of ``c_inv`` give 1/C_eff for single-coordinate ports
    (the dressed junction or line-loading capacitances). Off-diagonal pair
    couplings carry a factor of two relative to the raw inverse entries, so
    1/C_nm_eff = 2 * c_inv[n, m]; the Hamiltonian assembly must weight each
    unordered pair term by half of that to reproduce the quadratic form.
    """

    labels: tuple[str, ...]
    c_inv: np.ndarray
    l_inv_prime: np.ndarray
    block_index: Mapping[str, tuple[int, ...]]

    def index_of(self, label: str) -> int:
        return self.labels.index(label)

    def c_eff(self, label: str) -> float:
        """Dressed effective capacitance of a single retained coordinate."""
        i = self.index_of(label)
        return 1.0 / self.c_inv[i, i]

    def inv_c_coupling(self, label_a: str, label_b: str) -> float:
        """1/C_nm_eff between two retained coordinates (pair-reported with the
        factor-two convention; see the class docstring)."""
        i, j = self.index_of(label_a), self.index_of(label_b)
        if i == j:
            raise DimensionMismatch("pair coupling requires two distinct coordinates")
        return 2.0 * self.c_inv[i, j]

    def inv_l_coupling(self, label_a: str, label_b: str) -> float:
        i, j = self.index_of(label_a), self.index_of(label_b)
        if i == j:
            raise DimensionMismatch("pair coupling requires two distinct coordinates")
        return 2.0 * self.l_inv_prime[i, j]

    def subsystem_c_inv(self, name: str) -> np.ndarray:
        idx = np.asarray(self.block_index[name], dtype=int)
        return self.c_inv[np.ix_(idx, idx)]

    def subsystem_l_inv(self, name: str) -> np.ndarray:
        idx = np.asarray(self.block_index[name], dtype=int)
        return self.l_inv_prime[np.ix_(idx, idx)]


def extract_blocks(rc: ReducedCircuit, c_inv: np.ndarray | None = None) -> CircuitBlocks:
    """Partition the inverted capacitance and reduced inverse inductance into
    per-subsystem diagonal blocks and scaled pairwise couplings."""
    if c_inv is None:
        c_inv = np.linalg.inv(rc.c_mat)
    c_inv = _symmetrize(np.asarray(c_inv, dtype=float))
    if c_inv.shape != rc.c_mat.shape:
        raise DimensionMismatch("inverted matrix shape does not match the reduced circuit")
    return CircuitBlocks(
        labels=rc.labels, c_inv=c_inv, l_inv_prime=rc.l_inv_prime,
        block_index=rc.block_index,
    )
