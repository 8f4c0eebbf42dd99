"""Brute-force route enumeration, independent of the state-vector engine.

Every route from the source to a terminal is walked element by element,
multiplying splitter coefficients and phases. Each qubit probe visited ``m``
times along a route ends in ``cos(m t)|0> + sin(m t)|1>`` with
``sin t = sqrt(eps)``; the route then splits into one branch per outcome
tuple. Only the element coefficients are shared with the main engine.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .interferometer import DetectorMap, InterferometerSpec, PhaseShift
from .probes import ProbeSet


@dataclass(frozen=True)
class Branch:
    route: tuple
    outcomes: tuple
    amplitude: complex

    @property
    def terminal(self) -> str:
        return self.route[-1]


def _routes(spec: InterferometerSpec):
    """Yield ``(route, amplitude)`` for every source-to-terminal route."""
    elements = spec.elements

    def walk(path, i, route, amp):
        for j in range(i, len(elements)):
            el = elements[j]
            if isinstance(el, PhaseShift):
                if el.path == path:
                    amp = amp * complex(math.cos(spec.phase_of(el)), math.sin(spec.phase_of(el)))
                continue
            if isinstance(el, DetectorMap):
                if el.path == path:
                    yield route + (el.detector,), amp
                    return
                continue
            if path in el.inputs:
                col = el.inputs.index(path)
                for row, out in enumerate(el.outputs):
                    yield from walk(out, j + 1, route + (out,), amp * el.matrix[row][col])
                return
        yield route, amp

    yield from walk(spec.source, 0, (spec.source,), 1.0 + 0j)


def enumerate_branches(spec: InterferometerSpec, probes: ProbeSet = ProbeSet()) -> list:
    """All (route, outcome tuple) branches with their amplitudes, zeros included."""
    if not probes.is_binary():
        raise ValueError("the oracle handles qubit probes only")
    branches = []
    for route, amp in _routes(spec):
        factors, options = [], []
        for p in probes:
            visits = sum(1 for x in route if x in p.paths)
            t = math.asin(math.sqrt(p.epsilon))
            factors.append((math.cos(visits * t), math.sin(visits * t)))
            options.append(range(2) if visits else range(1))
        for outcomes in itertools.product(*options):
            a = amp
            for f, o in zip(factors, outcomes):
                a *= f[o]
            branches.append(Branch(route, tuple(outcomes), a))
    return branches


def coherent_sums(branches) -> dict:
    """Sum amplitudes sharing ``(outcomes, terminal)``."""
    out: dict = {}
    for b in branches:
        key = (b.outcomes, b.terminal)
        out[key] = out.get(key, 0j) + b.amplitude
    return out


def oracle_probability(branches, predicate: Callable[[tuple, str], bool]) -> float:
    """Probability of all ``(outcomes, terminal)`` outcomes accepted by ``predicate``."""
    return float(sum(abs(a) ** 2 for (o, t), a in coherent_sums(branches).items()
                     if predicate(o, t)))


def oracle_distribution(spec, probes, condition=None) -> dict:
    """``{(outcomes, terminal): probability}``, optionally conditioned on a detector."""
    probs = {k: abs(a) ** 2 for k, a in coherent_sums(enumerate_branches(spec, probes)).items()}
    if condition is None:
        return probs
    kept = {k: p for k, p in probs.items() if k[1] == condition}
    total = sum(kept.values())
    if total < 1e-300:
        raise ZeroDivisionError(f"{condition} is never reached")
    return {k: p / total for k, p in kept.items()}


def oracle_probe_state(spec, probes, index: int, detector: str = "DET1") -> np.ndarray:
    """Conditional 2x2 density matrix of probe ``index`` given ``detector``."""
    sums = coherent_sums(enumerate_branches(spec, probes))
    rho = np.zeros((2, 2), dtype=complex)
    for (o, t), a in sums.items():
        if t != detector:
            continue
        for (o2, t2), a2 in sums.items():
            if t2 == detector and o[:index] + o[index + 1:] == o2[:index] + o2[index + 1:]:
                rho[o[index], o2[index]] += a * np.conj(a2)
    return rho / np.trace(rho).real


def oracle_conditional_vector(spec, probes, detector: str = "DET1") -> dict:
    """Normalized conditional amplitudes ``{outcomes: amplitude}`` at ``detector``."""
    sums = {o: a for (o, t), a in coherent_sums(enumerate_branches(spec, probes)).items()
            if t == detector}
    norm = math.sqrt(sum(abs(a) ** 2 for a in sums.values()))
    return {o: a / norm for o, a in sums.items()}


def route_weights(spec, probes, predicate: Callable[[tuple, str], bool]) -> dict:
    """Share of each route in the incoherent weight of the accepted branches."""
    weights: dict = {}
    for b in enumerate_branches(spec, probes):
        if predicate(b.outcomes, b.terminal):
            weights[b.route] = weights.get(b.route, 0.0) + abs(b.amplitude) ** 2
    total = sum(weights.values())
    return {r: w / total for r, w in weights.items()} if total else weights


__all__ = [
    "Branch",
    "enumerate_branches",
    "coherent_sums",
    "oracle_probability",
    "oracle_distribution",
    "oracle_probe_state",
    "oracle_conditional_vector",
    "route_weights",
]
