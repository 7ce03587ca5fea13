"""Maxwell capacitance matrix file format.

Bit-exact format: UTF-8 lines, ``# key: value`` header comments with a
mandatory ``# units: fF|pF|F`` header, a ``node,<name1>,<name2>,...`` header
row, then one ``<name>,<v>,...`` row per node in matrix order. Row order
defines node order. The format is trivially producible from any extractor's
CSV export.
"""

from __future__ import annotations

import logging
import warnings
from pathlib import Path

import numpy as np

from .errors import AsymmetryError, ParseError, SignError
from .netlist import MaxwellMatrix

log = logging.getLogger(__name__)

UNIT_SCALES = {"F": 1.0, "pF": 1e-12, "fF": 1e-15}

#: relative asymmetry below which extractor output is symmetrized by averaging
SYMMETRIZE_LIMIT = 1e-6


def parse_maxwell_text(text: str, source: str = "<string>") -> MaxwellMatrix:
    units = None
    header: list[str] | None = None
    rows: list[tuple[str, list[float]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                if key.strip() == "units":
                    units = value.strip()
            continue
        fields = [f.strip() for f in line.split(",")]
        if header is None:
            if fields[0] != "node":
                raise ParseError(f"{source}: first data line must start with 'node'", line=lineno, column=1)
            header = fields[1:]
            if len(set(header)) != len(header):
                raise ParseError(f"{source}: duplicate node names in header", line=lineno)
            continue
        name = fields[0]
        values = []
        for col, field in enumerate(fields[1:], start=2):
            try:
                values.append(float(field))
            except ValueError:
                raise ParseError(
                    f"{source}: cannot parse {field!r} as a number", line=lineno, column=col
                ) from None
        if len(values) != len(header):
            raise ParseError(
                f"{source}: row {name!r} has {len(values)} values for {len(header)} nodes",
                line=lineno,
            )
        rows.append((name, values))

    if units is None:
        raise ParseError(f"{source}: missing mandatory '# units:' header")
    if units not in UNIT_SCALES:
        raise ParseError(f"{source}: unsupported units {units!r}; use one of {sorted(UNIT_SCALES)}")
    if header is None or not rows:
        raise ParseError(f"{source}: no matrix data found")
    names = [name for name, _ in rows]
    if names != header:
        raise ParseError(f"{source}: row order {names} does not match header order {header}")

    display = np.array([values for _, values in rows], dtype=float)
    scale = UNIT_SCALES[units]

    asym = np.max(np.abs(display - display.T))
    magnitude = np.max(np.abs(display)) or 1.0
    if asym > SYMMETRIZE_LIMIT * magnitude:
        raise AsymmetryError(
            f"{source}: matrix asymmetry {asym / magnitude:.3e} exceeds the "
            f"{SYMMETRIZE_LIMIT:.0e} symmetrization limit"
        )
    if asym > 0.0:
        warnings.warn(
            f"{source}: symmetrized extractor output with relative asymmetry {asym / magnitude:.3e}"
        )
        display = 0.5 * (display + display.T)

    off = display - np.diag(np.diag(display))
    if np.any(off > 1e-12 * magnitude):
        i, j = np.unravel_index(np.argmax(off), off.shape)
        raise SignError(
            f"{source}: positive off-diagonal capacitance entry at "
            f"({names[i]}, {names[j]}): {display[i, j]:.6g} {units}"
        )

    return MaxwellMatrix(
        names=tuple(names),
        matrix=display * scale,
        display_units=units,
        display_matrix=display,
    )


def parse_maxwell_file(path: str | Path) -> MaxwellMatrix:
    path = Path(path)
    if not path.exists():
        raise ParseError(f"Maxwell matrix file not found: {path}")
    return parse_maxwell_text(path.read_text(encoding="utf-8"), source=str(path))


def serialize_maxwell(m: MaxwellMatrix) -> str:
    """Canonical text form; ``serialize(parse(f))`` is byte-identical for
    files already in canonical form."""
    display = m.display_matrix
    if display is None:
        display = m.matrix / UNIT_SCALES[m.display_units]
    lines = [f"# units: {m.display_units}"]
    lines.append("node," + ",".join(m.names))
    for name, row in zip(m.names, display):
        lines.append(name + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_maxwell_file(m: MaxwellMatrix, path: str | Path) -> None:
    Path(path).write_text(serialize_maxwell(m), encoding="utf-8")
