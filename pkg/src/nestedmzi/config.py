"""TOML run configuration.

Example::

    [interferometer]
    preset = "griffiths-eq22"
    inner_phase = 0.0

    [[probe]]
    id = "w"
    model = "qubit-nonlocal-w"
    paths = ["C"]
    epsilon = 1e-4

    [campaign]
    n_runs = 10000000
    seed = 2016
    mode = "post-selected"
    detector = "DET1"

    [output]
    directory = "out"
    formats = ["csv", "json"]

Instead of ``preset`` the interferometer may list its elements explicitly as
``[[interferometer.element]]`` tables (see :func:`dump_config`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import tomli
import tomli_w

from .interferometer import (
    BeamSplitter,
    DetectorMap,
    InterferometerSpec,
    PhaseShift,
    preset,
)
from .montecarlo import MODES
from .probes import ProbeConfig, ProbeSet

VACUUM = "vacuum"
FORMATS = ("csv", "json")
_PROBE_KEYS = {"id", "model", "path", "paths", "epsilon", "shift", "width", "extent", "bins"}
_CAMPAIGN_KEYS = {"n_runs", "seed", "mode", "detector", "shards"}
_OUTPUT_KEYS = {"directory", "formats"}


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


@dataclass
class RunConfig:
    spec: InterferometerSpec
    probes: ProbeSet = field(default_factory=ProbeSet)
    campaign: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)


_HEADER = re.compile(r"^\s*(\[\[?)\s*([A-Za-z0-9_.\-]+)\s*\]\]?\s*(#.*)?$")
_KEY = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*=")


def _line_index(text: str) -> dict:
    """Map ``(table, n)`` to ``(header line, {key: line})`` for diagnostics."""
    index: dict = {}
    counts: dict = {}
    current = ("", 0)
    index[current] = (None, {})
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _HEADER.match(line)
        if m:
            name = m.group(2)
            n = 0
            if m.group(1) == "[[":
                n = counts.get(name, 0)
                counts[name] = n + 1
            current = (name, n)
            index[current] = (lineno, {})
            continue
        k = _KEY.match(line)
        if k and current in index:
            index[current][1].setdefault(k.group(1), lineno)
    return index


class _Locator:
    def __init__(self, text: str, source: str):
        self.index = _line_index(text)
        self.source = source

    def line(self, table: str, n: int = 0, key: Optional[str] = None) -> Optional[int]:
        header, keys = self.index.get((table, n), (None, {}))
        if key is not None and key in keys:
            return keys[key]
        return header

    def error(self, msg, table, n=0, key=None) -> ConfigError:
        return ConfigError(msg, self.line(table, n, key), self.source)


def _complex(x, where: str):
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise ValueError(f"{where}: matrix entries must be numbers or [re, im] pairs")


def _port(p):
    return None if p == VACUUM else p


def _element(d: dict, where: str):
    kind = d.get("kind")
    name = d.get("name")
    if not isinstance(name, str):
        raise ValueError(f"{where}: element needs a string 'name'")
    if kind == "beamsplitter":
        m = d.get("matrix")
        if not (isinstance(m, list) and len(m) == 2 and all(len(r) == 2 for r in m)):
            raise ValueError(f"{where}: beamsplitter 'matrix' must be 2x2")
        matrix = tuple(tuple(_complex(x, where) for x in row) for row in m)
        return BeamSplitter(name, tuple(_port(p) for p in d.get("inputs", ())),
                            tuple(d.get("outputs", ())), matrix)
    if kind == "phase":
        phi = d.get("phi", "inner")
        return PhaseShift(name, d["path"], None if phi == "inner" else float(phi))
    if kind == "detector":
        return DetectorMap(name, d["path"], d["detector"])
    raise ValueError(f"{where}: unknown element kind {kind!r}")


def _spec(table: dict, loc: _Locator) -> InterferometerSpec:
    phase = table.get("inner_phase", 0.0)
    if not isinstance(phase, (int, float)):
        raise loc.error("inner_phase must be a number", "interferometer", key="inner_phase")
    if "preset" in table and "element" in table:
        raise loc.error("give either 'preset' or explicit elements, not both", "interferometer")
    if "preset" in table:
        try:
            return preset(table["preset"], float(phase))
        except ValueError as exc:
            raise loc.error(str(exc), "interferometer", key="preset") from None
    elements = []
    for n, d in enumerate(table.get("element", [])):
        try:
            elements.append(_element(d, f"element {n + 1}"))
        except (ValueError, KeyError) as exc:
            raise loc.error(str(exc), "interferometer.element", n) from None
    if not elements:
        raise loc.error("interferometer needs a 'preset' or [[interferometer.element]] "
                        "tables", "interferometer")
    try:
        return InterferometerSpec(tuple(elements), source=table.get("source", "S"),
                                  inner_phase=float(phase), name=table.get("name", "custom"))
    except ValueError as exc:
        raise loc.error(str(exc), "interferometer") from None


def _probe(d: dict, n: int, loc: _Locator) -> ProbeConfig:
    unknown = set(d) - _PROBE_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise loc.error(f"unknown probe key {key!r}", "probe", n, key)
    if "path" in d and "paths" in d:
        raise loc.error("use either 'path' or 'paths'", "probe", n, "paths")
    paths = d.get("paths", d.get("path"))
    if paths is None or "model" not in d or "id" not in d:
        raise loc.error("probe needs 'id', 'model' and 'path'/'paths'", "probe", n)
    kwargs = {k: d[k] for k in ("epsilon", "shift", "width", "extent", "bins") if k in d}
    try:
        return ProbeConfig(d["id"], d["model"], paths, **kwargs)
    except (ValueError, TypeError) as exc:
        key = "epsilon" if "epsilon" in str(exc) else None
        raise loc.error(str(exc), "probe", n, key) from None


def _campaign(d: dict, loc: _Locator) -> dict:
    unknown = set(d) - _CAMPAIGN_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise loc.error(f"unknown campaign key {key!r}", "campaign", key=key)
    out = dict(d)
    if "n_runs" in out:
        n = out["n_runs"]
        if isinstance(n, float) and n.is_integer():
            n = int(n)
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise loc.error("n_runs must be a positive integer", "campaign", key="n_runs")
        out["n_runs"] = n
    if "seed" in out and (not isinstance(out["seed"], int) or out["seed"] < 0):
        raise loc.error("seed must be a non-negative integer", "campaign", key="seed")
    if out.get("mode", MODES[0]) not in MODES:
        raise loc.error(f"mode must be one of {MODES}", "campaign", key="mode")
    return out


def _output(d: dict, loc: _Locator) -> dict:
    unknown = set(d) - _OUTPUT_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise loc.error(f"unknown output key {key!r}", "output", key=key)
    fmts = d.get("formats", list(FORMATS))
    if isinstance(fmts, str):
        fmts = [fmts]
    bad = [f for f in fmts if f not in FORMATS]
    if bad:
        raise loc.error(f"unknown output format {bad[0]!r}", "output", key="formats")
    return {"directory": d.get("directory"), "formats": list(fmts)}


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(str(exc), int(m.group(1)) if m else None, source) from None
    loc = _Locator(text, source)
    unknown = set(data) - {"interferometer", "probe", "campaign", "output"}
    if unknown:
        name = sorted(unknown)[0]
        raise ConfigError(f"unknown section [{name}]", loc.line(name), source)
    if "interferometer" not in data:
        raise ConfigError("missing [interferometer] section", None, source)
    spec = _spec(data["interferometer"], loc)
    probes = [_probe(d, n, loc) for n, d in enumerate(data.get("probe", []))]
    try:
        probe_set = ProbeSet(tuple(probes))
    except ValueError as exc:
        raise ConfigError(str(exc), loc.line("probe", 0), source) from None
    for n, p in enumerate(probes):
        bad = [x for x in p.paths if x not in spec.paths() or x in spec.detectors]
        if bad:
            raise loc.error(f"probe {p.id!r} sits on path {bad[0]}, absent from the "
                            f"interferometer", "probe", n, "paths" if "paths" in
                            data["probe"][n] else "path")
    return RunConfig(spec, probe_set, _campaign(data.get("campaign", {}), loc),
                     _output(data.get("output", {}), loc))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path))


def _entry(z: complex):
    return z.real if z.imag == 0 else [z.real, z.imag]


def _element_table(el) -> dict:
    if isinstance(el, BeamSplitter):
        return {"kind": "beamsplitter", "name": el.name,
                "inputs": [VACUUM if p is None else p for p in el.inputs],
                "outputs": list(el.outputs),
                "matrix": [[_entry(z) for z in row] for row in el.matrix]}
    if isinstance(el, PhaseShift):
        return {"kind": "phase", "name": el.name, "path": el.path,
                "phi": "inner" if el.phi is None else el.phi}
    return {"kind": "detector", "name": el.name, "path": el.path, "detector": el.detector}


def _probe_table(p: ProbeConfig) -> dict:
    d = {"id": p.id, "model": p.model, "paths": list(p.paths), "epsilon": p.epsilon}
    if p.model == "pointer-gaussian":
        d.update(shift=p.shift, width=p.width, extent=p.extent, bins=p.bins)
    return d


def dump_config(spec: InterferometerSpec, probes: ProbeSet = ProbeSet(),
                campaign: Optional[dict] = None, output: Optional[dict] = None) -> str:
    """Serialize with explicit elements; :func:`parse_config` inverts it exactly."""
    data: dict = {
        "interferometer": {
            "name": spec.name,
            "source": spec.source,
            "inner_phase": float(spec.inner_phase),
            "element": [_element_table(el) for el in spec.elements],
        }
    }
    if len(probes):
        data["probe"] = [_probe_table(p) for p in probes]
    if campaign:
        data["campaign"] = dict(campaign)
    if output:
        data["output"] = {k: v for k, v in output.items() if v is not None}
    return tomli_w.dumps(data)
