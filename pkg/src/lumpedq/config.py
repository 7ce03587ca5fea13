"""Device configuration schema.

Configurations are YAML documents; every physical value carries its unit in
the field name (lj_nh, cj_ff, z0_ohm, ...). The parsed dataclasses keep the
raw mapping around so sweeps and budget rows can derive modified configs by
dotted-path overrides.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml
from scipy import constants

from .errors import ConfigError

_TERMINATIONS = {"open": False, "short": True}


@dataclass(frozen=True)
class CellConfig:
    ident: str
    maxwell_file: Path
    ground_nets: tuple[str, ...] = ()


@dataclass(frozen=True)
class TransmonConfig:
    name: str
    nodes: tuple[str, ...]
    levels: int = 5
    n_max: int = 30
    q_offset_2e: float = 0.0


@dataclass(frozen=True)
class LineConfig:
    name: str
    nodes: tuple[str, ...]  # port node(s); first entry is the loaded end
    z0_ohm: float
    vp_m_per_s: float
    shorted_end: bool = False
    modes: int = 1
    levels: tuple[int, ...] = (5,)
    length_m: float | None = None
    target_hz: float | None = None
    target_mode: int = 1
    target_loading: str = "unloaded"  # unloaded | dressed
    role: str = ""

    def __post_init__(self):
        if (self.length_m is None) == (self.target_hz is None):
            raise ConfigError(
                f"line {self.name!r}: give exactly one of length or calibration target"
            )
        if self.target_loading not in ("unloaded", "dressed"):
            raise ConfigError(f"line {self.name!r}: bad target_loading {self.target_loading!r}")
        if len(self.levels) != self.modes:
            raise ConfigError(f"line {self.name!r}: need one level count per mode")


@dataclass(frozen=True)
class JunctionConfig:
    ident: str
    node_neg: str
    node_pos: str
    subsystem: str
    lj_h: float | None = None
    ej_j: float | None = None
    cj_f: float = 0.0

    def __post_init__(self):
        if (self.lj_h is None) == (self.ej_j is None):
            raise ConfigError(f"junction {self.ident!r}: give exactly one of lj_nh or ej_ghz")


@dataclass(frozen=True)
class InductorConfig:
    node_a: str
    node_b: str
    l_h: float


@dataclass(frozen=True)
class AnalysisOptions:
    dimension_cap: int = 20_000
    min_overlap: float = 0.5
    qubit: str = ""
    readout: str = ""


@dataclass(frozen=True)
class DeviceConfig:
    name: str
    datum: str
    cells: tuple[CellConfig, ...]
    transmons: tuple[TransmonConfig, ...]
    lines: tuple[LineConfig, ...]
    couplers: tuple[str, ...]
    junctions: tuple[JunctionConfig, ...]
    inductors: tuple[InductorConfig, ...] = ()
    merge_ground_nets: bool = True
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)
    raw: Mapping[str, Any] = field(default_factory=dict, compare=False)
    base_dir: Path = Path(".")

    def subsystem_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.transmons) + tuple(l.name for l in self.lines)

    def with_override(self, dotted_path: str, value) -> "DeviceConfig":
        """New config with one raw field replaced; list entries are addressed
        by their id/name key (for example ``junctions.j1.lj_nh``)."""
        return self.with_overrides({dotted_path: value})

    def with_overrides(self, overrides: Mapping[str, Any]) -> "DeviceConfig":
        raw = copy.deepcopy(dict(self.raw))
        for dotted_path, value in overrides.items():
            parts = dotted_path.split(".")
            node = raw
            for part in parts[:-1]:
                if isinstance(node, list):
                    node = _find_named(node, part, dotted_path)
                elif part in node:
                    node = node[part]
                else:
                    raise ConfigError(f"override path {dotted_path!r}: no field {part!r}")
            leaf = parts[-1]
            if isinstance(node, list):
                raise ConfigError(f"override path {dotted_path!r} ends on a list")
            node[leaf] = value
        return parse_device_config(raw, base_dir=self.base_dir)


def _find_named(entries: list, key: str, path: str) -> dict:
    for entry in entries:
        if entry.get("id") == key or entry.get("name") == key:
            return entry
    raise ConfigError(f"override path {path!r}: no entry named {key!r}")


def _require(mapping: Mapping, key: str, context: str):
    if key not in mapping:
        raise ConfigError(f"{context}: missing required field {key!r}")
    return mapping[key]


def parse_device_config(raw: Mapping[str, Any], base_dir: str | Path = ".") -> DeviceConfig:
    base_dir = Path(base_dir)
    if not isinstance(raw, Mapping):
        raise ConfigError("device configuration must be a mapping")
    name = str(raw.get("name", "device"))
    datum = str(_require(raw, "datum", "config"))

    cells = []
    for entry in _require(raw, "cells", "config"):
        cells.append(CellConfig(
            ident=str(_require(entry, "id", "cell")),
            maxwell_file=base_dir / str(_require(entry, "maxwell_file", "cell")),
            ground_nets=tuple(entry.get("ground_nets", ())),
        ))
    if len({c.ident for c in cells}) != len(cells):
        raise ConfigError("duplicate cell ids")

    transmons: list[TransmonConfig] = []
    lines: list[LineConfig] = []
    for entry in _require(raw, "subsystems", "config"):
        kind = _require(entry, "kind", "subsystem")
        sname = str(_require(entry, "name", "subsystem"))
        nodes = tuple(str(n) for n in _require(entry, "nodes", f"subsystem {sname!r}"))
        if kind == "transmon":
            transmons.append(TransmonConfig(
                name=sname,
                nodes=nodes,
                levels=int(entry.get("levels", 5)),
                n_max=int(entry.get("n_max", 30)),
                q_offset_2e=float(entry.get("q_offset_2e", 0.0)),
            ))
        elif kind == "loaded_line":
            vp = entry.get("vp_m_per_s")
            if vp is None and "vp_fraction_c" in entry:
                vp = float(entry["vp_fraction_c"]) * constants.c
            if vp is None:
                raise ConfigError(f"line {sname!r}: need vp_m_per_s or vp_fraction_c")
            modes = int(entry.get("modes", 1))
            levels = entry.get("levels", 5)
            levels = tuple([int(levels)] * modes) if isinstance(levels, int) \
                else tuple(int(v) for v in levels)
            termination = str(entry.get("termination", "open"))
            if termination not in _TERMINATIONS:
                raise ConfigError(f"line {sname!r}: termination must be open or short")
            length = entry.get("length_mm")
            target = entry.get("target_ghz")
            lines.append(LineConfig(
                name=sname,
                nodes=nodes,
                z0_ohm=float(_require(entry, "z0_ohm", f"line {sname!r}")),
                vp_m_per_s=float(vp),
                shorted_end=_TERMINATIONS[termination],
                modes=modes,
                levels=levels,
                length_m=None if length is None else float(length) * 1e-3,
                target_hz=None if target is None else float(target) * 1e9,
                target_mode=int(entry.get("target_mode", 1)),
                target_loading=str(entry.get("target_loading", "unloaded")),
                role=str(entry.get("role", "")),
            ))
        else:
            raise ConfigError(f"subsystem {sname!r}: unknown kind {kind!r}")
    names = [t.name for t in transmons] + [l.name for l in lines]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate subsystem names")

    junctions = []
    for entry in raw.get("junctions", ()):
        ident = str(_require(entry, "id", "junction"))
        nodes = _require(entry, "nodes", f"junction {ident!r}")
        if len(nodes) != 2:
            raise ConfigError(f"junction {ident!r}: nodes must be a [neg, pos] pair")
        lj = entry.get("lj_nh")
        ej = entry.get("ej_ghz")
        junctions.append(JunctionConfig(
            ident=ident,
            node_neg=str(nodes[0]),
            node_pos=str(nodes[1]),
            subsystem=str(_require(entry, "subsystem", f"junction {ident!r}")),
            lj_h=None if lj is None else float(lj) * 1e-9,
            ej_j=None if ej is None else float(ej) * 1e9 * constants.h,
            cj_f=float(entry.get("cj_ff", 0.0)) * 1e-15,
        ))
    if len({j.ident for j in junctions}) != len(junctions):
        raise ConfigError("duplicate junction ids")

    inductors = []
    for entry in raw.get("inductors", ()):
        nodes = _require(entry, "nodes", "inductor")
        if len(nodes) != 2:
            raise ConfigError("inductor nodes must be a pair")
        inductors.append(InductorConfig(
            node_a=str(nodes[0]), node_b=str(nodes[1]),
            l_h=float(_require(entry, "l_nh", "inductor")) * 1e-9,
        ))

    ana = raw.get("analysis", {})
    default_qubit = transmons[0].name if transmons else ""
    default_readout = ""
    for line in lines:
        if line.role == "readout":
            default_readout = line.name
            break
    else:
        if lines:
            default_readout = lines[0].name
    analysis = AnalysisOptions(
        dimension_cap=int(ana.get("dimension_cap", 20_000)),
        min_overlap=float(ana.get("min_overlap", 0.5)),
        qubit=str(ana.get("qubit", default_qubit)),
        readout=str(ana.get("readout", default_readout)),
    )

    return DeviceConfig(
        name=name,
        datum=datum,
        cells=tuple(cells),
        transmons=tuple(transmons),
        lines=tuple(lines),
        couplers=tuple(str(n) for n in raw.get("couplers", ())),
        junctions=tuple(junctions),
        inductors=tuple(inductors),
        merge_ground_nets=bool(raw.get("merge_ground_nets", True)),
        analysis=analysis,
        raw=raw,
        base_dir=base_dir,
    )


def load_device_config(path: str | Path) -> DeviceConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"configuration file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
    return parse_device_config(raw, base_dir=path.parent)
