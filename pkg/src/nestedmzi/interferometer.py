"""Nested Mach-Zehnder network as an ordered list of optical elements.

Layout of the built-in presets::

    S --BS1--+-- A -----------------------+
             |                            BS4 -- F -> DET1
             +-- D --BS2--+-- B --(phi)--+  |    (second BS4 port -> DET2)
                          |             BS3-- E
                          +-- C --------+
                                         +-- G  (discarded)

The inner interferometer (BS2, BS3) sends ``(B + C)/sqrt(2)`` to G and
``(B - C)/sqrt(2)`` to E, so with ``phi = 0`` nothing leaves towards E.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from . import probes as _probes
from .probes import ProbeSet
from .statevec import (
    DETECTORS,
    JointState,
    PathModes,
    apply_local_unitary,
    check_path,
    check_unitary,
)


@dataclass(frozen=True)
class BeamSplitter:
    name: str
    inputs: tuple  # (port, port); None is an empty input port
    outputs: tuple
    matrix: tuple  # 2x2, rows are outputs

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"{self.name}: beam splitter matrix must be 2x2")
        check_unitary(m, tol=1e-12)
        object.__setattr__(self, "matrix", tuple(tuple(complex(x) for x in row) for row in m))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        for p in (*self.inputs, *self.outputs):
            if p is not None:
                check_path(p)
        if None in self.outputs:
            raise ValueError(f"{self.name}: both output ports must be named paths")

    @classmethod
    def real(cls, name, inputs, outputs, theta: float) -> "BeamSplitter":
        """Real splitter ``[[cos t, sin t], [sin t, -cos t]]``."""
        c, s = math.cos(theta), math.sin(theta)
        return cls(name, inputs, outputs, ((c, s), (s, -c)))

    @property
    def unitary(self) -> np.ndarray:
        return np.array(self.matrix, dtype=complex)


@dataclass(frozen=True)
class PhaseShift:
    """Phase ``exp(i phi)`` on one path; ``phi=None`` tracks ``inner_phase``."""

    name: str
    path: str
    phi: Optional[float] = None

    def __post_init__(self):
        check_path(self.path)


@dataclass(frozen=True)
class DetectorMap:
    name: str
    path: str
    detector: str

    def __post_init__(self):
        check_path(self.path)
        if self.detector not in DETECTORS:
            raise ValueError(f"{self.name}: unknown detector {self.detector!r}")


Element = Union[BeamSplitter, PhaseShift, DetectorMap]


def element_io(el: Element) -> tuple[tuple, tuple]:
    """(consumed paths, produced paths) of an element."""
    if isinstance(el, BeamSplitter):
        return tuple(p for p in el.inputs if p is not None), el.outputs
    if isinstance(el, PhaseShift):
        return (el.path,), (el.path,)
    return (el.path,), (el.detector,)


@dataclass(frozen=True)
class InterferometerSpec:
    elements: tuple
    source: str = "S"
    detectors: tuple = DETECTORS
    inner_phase: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        check_path(self.source)
        live = {self.source}
        seen = set()
        for el in self.elements:
            if el.name in seen:
                raise ValueError(f"duplicate element name {el.name!r}")
            seen.add(el.name)
            ins, outs = element_io(el)
            for p in ins:
                if p not in live:
                    raise ValueError(f"{el.name}: input path {p} is not produced by an "
                                     f"earlier element")
            if isinstance(el, PhaseShift):
                continue
            live -= set(ins)
            for p in outs:
                if p in live:
                    raise ValueError(f"{el.name}: path {p} is produced twice")
                live.add(p)

    def phase_of(self, el: PhaseShift) -> float:
        return self.inner_phase if el.phi is None else el.phi

    def with_phase(self, phi: float) -> "InterferometerSpec":
        return replace(self, inner_phase=float(phi))

    def producer_index(self, path: str) -> int:
        """Index of the element that produces ``path``; -1 for the source."""
        if path == self.source:
            return -1
        for i, el in enumerate(self.elements):
            if not isinstance(el, PhaseShift) and path in element_io(el)[1]:
                return i
        raise KeyError(f"path {path} never appears in {self.name}")

    def paths(self) -> set:
        out = {self.source}
        for el in self.elements:
            out.update(element_io(el)[1])
        return out

    def mid_index(self, slice_paths=("A", "B", "C")) -> int:
        """Element index at which all ``slice_paths`` are simultaneously live."""
        return max(self.producer_index(p) for p in slice_paths) + 1

    def element_unitary(self, el: Element) -> tuple[PathModes, np.ndarray]:
        if isinstance(el, BeamSplitter):
            return PathModes(el.inputs, el.outputs), el.unitary
        if isinstance(el, PhaseShift):
            return PathModes((el.path,)), np.array([[np.exp(1j * self.phase_of(el))]])
        return PathModes((el.path,), (el.detector,)), np.eye(1, dtype=complex)


def nested_mzi(outer_theta: float, final_theta: float, inner_phase: float = 0.0,
               name: str = "custom") -> InterferometerSpec:
    """Nested interferometer with a 50/50 inner pair and the given outer splitters."""
    h = math.pi / 4
    return InterferometerSpec(
        elements=(
            BeamSplitter.real("BS1", ("S", None), ("A", "D"), outer_theta),
            BeamSplitter.real("BS2", ("D", None), ("B", "C"), h),
            PhaseShift("PHI", "B"),
            BeamSplitter.real("BS3", ("B", "C"), ("G", "E"), h),
            BeamSplitter.real("BS4", ("A", "E"), ("F", "DET2"), final_theta),
            DetectorMap("D1", "F", "DET1"),
        ),
        inner_phase=inner_phase,
        name=name,
    )


def preset_griffiths_eq22(inner_phase: float = 0.0) -> InterferometerSpec:
    """Equal-intensity preset.

    Mid-time forward state ``(A + B + C)/sqrt(3)``; the DET1 state propagated
    backwards to the same slice is ``(A - B + C)/sqrt(3)``.
    """
    t = math.acos(1 / math.sqrt(3))
    return nested_mzi(t, -t, inner_phase, name="griffiths-eq22")


def preset_balanced(inner_phase: float = 0.0) -> InterferometerSpec:
    """All four splitters 50/50."""
    return nested_mzi(math.pi / 4, -math.pi / 4, inner_phase, name="balanced")


PRESETS = {
    "griffiths-eq22": preset_griffiths_eq22,
    "balanced": preset_balanced,
}


def preset(name: str, inner_phase: float = 0.0) -> InterferometerSpec:
    try:
        return PRESETS[name](inner_phase)
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None


def check_probes(spec: InterferometerSpec, probes: ProbeSet) -> None:
    known = spec.paths()
    for p in probes:
        for path in p.paths:
            if path not in known or path in DETECTORS:
                raise ValueError(f"probe {p.id!r} sits on path {path}, which is not an "
                                 f"optical path of {spec.name}")


def propagate(spec: InterferometerSpec, probes: ProbeSet, state: JointState,
              start: int = 0, stop: Optional[int] = None) -> JointState:
    """Apply elements ``start:stop``, coupling probes as each path is produced."""
    cache: dict = {}
    if start == 0:
        state = _probes.couple(state, probes, spec.source, cache)
    for el in spec.elements[start:stop]:
        modes, u = spec.element_unitary(el)
        state = apply_local_unitary(state, modes, u)
        if not isinstance(el, PhaseShift):
            for path in element_io(el)[1]:
                state = _probes.couple(state, probes, path, cache)
    return state


def initial_state(spec: InterferometerSpec, probes: ProbeSet = ProbeSet()) -> JointState:
    return _probes.ready_joint_state(spec.source, probes)


def forward_evolve(spec: InterferometerSpec, probes: ProbeSet = ProbeSet(),
                   initial: Optional[JointState] = None) -> JointState:
    """Evolve from the source to the detectors (and the discarded port G)."""
    check_probes(spec, probes)
    if initial is None:
        initial = initial_state(spec, probes)
    if initial.probe_dims != probes.dims:
        raise ValueError("initial state does not match the probe register")
    if set(initial.path_weights()) - {spec.source}:
        raise ValueError("initial state must have the particle at the source")
    return propagate(spec, probes, initial)


def mid_state(spec: InterferometerSpec) -> JointState:
    """Probe-free forward state on the A/B/C slice."""
    return propagate(spec, ProbeSet(), JointState.basis(spec.source), 0, spec.mid_index())


def transfer_amplitude(spec: InterferometerSpec, path: str, detector: str,
                       start: Optional[int] = None) -> complex:
    """Probe-free amplitude to reach ``detector`` from a unit amplitude on ``path``.

    ``start`` defaults to the element right after the one producing ``path``.
    """
    if start is None:
        start = spec.producer_index(path) + 1
    out = propagate(spec, ProbeSet(), JointState.basis(path), start)
    return out.amplitude(detector)


def backward_state(spec: InterferometerSpec, detector: str,
                   slice_paths=("A", "B", "C")) -> dict:
    """Detector state propagated back to the mid-time slice, as ``{path: amplitude}``."""
    if detector not in spec.detectors:
        raise ValueError(f"unknown detector {detector!r}")
    start = spec.mid_index(slice_paths)
    coeffs = {p: np.conj(transfer_amplitude(spec, p, detector, start)) for p in slice_paths}
    norm = math.sqrt(sum(abs(c) ** 2 for c in coeffs.values()))
    if norm == 0:
        raise ValueError(f"{detector} is unreachable from the slice {slice_paths}")
    return {p: complex(c / norm) for p, c in coeffs.items()}


def e_amplitude(spec: InterferometerSpec) -> complex:
    """Probe-free forward amplitude on E just after the splitter producing it."""
    stop = spec.producer_index("E") + 1
    return propagate(spec, ProbeSet(), JointState.basis(spec.source), 0, stop).amplitude("E")
