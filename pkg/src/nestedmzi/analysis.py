"""Post-selection, conditional probe states, weak values and click statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from . import oracle
from .interferometer import (
    InterferometerSpec,
    forward_evolve,
    propagate,
    transfer_amplitude,
)
from .probes import QUBIT_LOCAL, ProbeSet
from .statevec import (
    TERMINALS,
    DensityMatrix,
    JointState,
    bures_angle,
    partial_trace_probe,
)

ENGINES = ("statevec", "oracle")
MAX_PATTERNS = 2**20
DEFAULT_TRACE_GRID = tuple(np.logspace(-6, -2, 9))


class ImpossibleBranchError(ValueError):
    """Post-selection on a detector that is (numerically) never reached."""


class UndefinedWeakValueError(ValueError):
    pass


class NoTraceError(ValueError):
    """Probe shows no change at numerical precision anywhere on the sweep."""


class OutcomePattern(NamedTuple):
    outcomes: tuple
    detector: str


@dataclass(frozen=True)
class PatternDistribution:
    """Exact probabilities of every probe-outcome pattern and terminal.

    With ``condition`` set, probabilities are renormalized on that detector.
    """

    probs: Mapping[OutcomePattern, float]
    probe_ids: tuple
    condition: Optional[str] = None
    acceptance: float = 1.0

    @property
    def conditional(self) -> bool:
        return self.condition is not None

    def total(self) -> float:
        return float(sum(self.probs.values()))

    def _mask(self, clicks, silent):
        idx = [self.probe_ids.index(c) for c in clicks]
        quiet = [self.probe_ids.index(c) for c in silent]
        return idx, quiet

    def probability(self, clicks: Iterable[str] = (), silent: Iterable[str] = (),
                    detector: Optional[str] = None) -> float:
        """P(every probe in ``clicks`` fired, every probe in ``silent`` stayed at 0)."""
        on, off = self._mask(tuple(clicks), tuple(silent))
        total = 0.0
        for pat, p in self.probs.items():
            if detector is not None and pat.detector != detector:
                continue
            o = pat.outcomes
            if all(o[i] != 0 for i in on) and all(o[i] == 0 for i in off):
                total += p
        return total

    def only(self, clicks: Iterable[str], detector: Optional[str] = None) -> float:
        """P(exactly the probes in ``clicks`` fired)."""
        clicks = tuple(clicks)
        silent = tuple(i for i in self.probe_ids if i not in clicks)
        return self.probability(clicks, silent, detector)

    def click_probability(self, probe_id: str) -> float:
        return self.probability((probe_id,))

    def marginal(self, index: int, dim: int = 2) -> np.ndarray:
        out = np.zeros(dim)
        for pat, p in self.probs.items():
            out[pat.outcomes[index]] += p
        return out

    def sorted_items(self):
        """Patterns in canonical order (detector, then outcome tuple)."""
        return sorted(self.probs.items(), key=lambda kv: (kv[0].detector, kv[0].outcomes))


def postselect(final: JointState, detector: str) -> tuple[JointState, float]:
    """Project onto ``detector``; returns the normalized state and its probability."""
    stray = set(final.path_weights()) - set(TERMINALS)
    if stray:
        raise ValueError(f"state still has amplitude inside the network on {sorted(stray)}")
    branch = final.restrict([detector])
    acceptance = branch.norm2()
    if acceptance < 1e-300:
        raise ImpossibleBranchError(f"post-selection on {detector} has probability "
                                    f"{acceptance:.3g}")
    return branch.normalized(), acceptance


def _check_engine(engine: str) -> None:
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def pattern_distribution(spec: InterferometerSpec, probes: ProbeSet,
                         condition: Optional[str] = None,
                         engine: str = "statevec") -> PatternDistribution:
    """Probability of every outcome pattern, by enumeration of the final state."""
    _check_engine(engine)
    n_patterns = math.prod(probes.dims) if len(probes) else 1
    if n_patterns > MAX_PATTERNS:
        raise ValueError(f"{n_patterns} outcome patterns exceed the enumeration bound "
                         f"{MAX_PATTERNS}; sample with montecarlo.run_campaign instead")
    if engine == "oracle":
        raw = oracle.oracle_distribution(spec, probes)
    else:
        final = forward_evolve(spec, probes)
        raw = {(o, p): abs(a) ** 2 for (p, o), a in final.amplitudes.items()}
    probs = {OutcomePattern(o, t): p for (o, t), p in raw.items()}
    acceptance = 1.0
    if condition is not None:
        acceptance = sum(p for k, p in probs.items() if k.detector == condition)
        if acceptance < 1e-300:
            raise ImpossibleBranchError(f"{condition} is never reached")
        probs = {k: p / acceptance for k, p in probs.items() if k.detector == condition}
    return PatternDistribution(probs, probes.ids, condition, acceptance)


def conditional_state(spec: InterferometerSpec, probes: ProbeSet,
                      detector: str = "DET1") -> tuple[JointState, float]:
    return postselect(forward_evolve(spec, probes), detector)


def conditional_probe_state(spec: InterferometerSpec, probes: ProbeSet, index: int,
                            detector: str = "DET1", engine: str = "statevec") -> DensityMatrix:
    """Reduced state of probe ``index`` in the post-selected ensemble."""
    _check_engine(engine)
    if engine == "oracle":
        return DensityMatrix(oracle.oracle_probe_state(spec, probes, index, detector), tol=1e-10)
    cond, _ = conditional_state(spec, probes, detector)
    return partial_trace_probe(cond, index)


def ready_density(probes: ProbeSet, index: int) -> DensityMatrix:
    return DensityMatrix.pure(probes[index].ready_state())


@dataclass(frozen=True)
class WeakValueReport:
    values: Mapping[str, complex]
    overlap: complex  # <post|pre>, the probe-free detector amplitude
    detector: str = "DET1"

    def __getitem__(self, path: str) -> complex:
        return self.values[path]


def weak_values(spec: InterferometerSpec, detector: str = "DET1",
                paths: Sequence[str] = ("S", "A", "B", "C", "D", "E", "F")) -> WeakValueReport:
    """Weak values of the path projectors, each on the slice where the path exists."""
    source = JointState.basis(spec.source)
    overlap = propagate(spec, ProbeSet(), source).amplitude(detector)
    if abs(overlap) < 1e-14:
        raise UndefinedWeakValueError(f"pre- and post-selected states are orthogonal "
                                      f"for {detector}")
    values = {}
    for path in paths:
        cut = spec.producer_index(path) + 1
        fwd = propagate(spec, ProbeSet(), source, 0, cut).amplitude(path)
        back = transfer_amplitude(spec, path, detector, cut)
        values[path] = complex(fwd * back / overlap)
    return WeakValueReport(values, complex(overlap), detector)


@dataclass(frozen=True)
class TraceFit:
    path: str
    exponent: float
    epsilons: tuple
    angles: tuple


def probe_angles(spec: InterferometerSpec, probes: ProbeSet, detector: str = "DET1",
                 engine: str = "statevec") -> dict:
    """Bures angle of every probe's conditional state from its ready state."""
    out = {}
    if engine == "oracle":
        for i, p in enumerate(probes):
            out[p.id] = bures_angle(conditional_probe_state(spec, probes, i, detector, engine),
                                    ready_density(probes, i))
        return out
    cond, _ = conditional_state(spec, probes, detector)
    for i, p in enumerate(probes):
        out[p.id] = bures_angle(partial_trace_probe(cond, i), ready_density(probes, i))
    return out


def trace_order(spec: InterferometerSpec, probes: ProbeSet, path: str,
                epsilons: Sequence[float] = DEFAULT_TRACE_GRID,
                detector: str = "DET1") -> TraceFit:
    """Log-log slope of the conditional Bures angle against ``sqrt(epsilon)``.

    Every qubit probe in ``probes`` is set to each grid strength in turn.
    """
    index = probes.on_path(path, QUBIT_LOCAL)
    angles = []
    for eps in epsilons:
        swept = probes.with_epsilon(eps)
        rho = conditional_probe_state(spec, swept, index, detector)
        angles.append(bures_angle(rho, ready_density(swept, index)))
    angles = np.array(angles)
    ok = angles >= 1e-14
    if ok.sum() < 2:
        raise NoTraceError(f"probe on {path} shows no trace at numerical precision")
    x = 0.5 * np.log(np.asarray(epsilons, dtype=float)[ok])
    slope = float(np.polyfit(x, np.log(angles[ok]), 1)[0])
    return TraceFit(path, slope, tuple(float(e) for e in epsilons), tuple(angles.tolist()))


@dataclass(frozen=True)
class Quantity:
    """A click-pattern probability evaluated in a sweep.

    ``clicks`` must all fire; with ``exclusive`` every other probe stays
    silent. The probability is joint with ``detector`` unless ``conditional``.
    """

    clicks: tuple = ()
    exclusive: bool = False
    detector: str = "DET1"
    conditional: bool = False

    @classmethod
    def parse(cls, text: str) -> "Quantity":
        """``accept``, ``clicks:D,B`` or ``only:B``; append ``|cond`` to condition."""
        body, _, flag = text.partition("|")
        if flag not in ("", "cond"):
            raise ValueError(f"unknown quantity flag {flag!r}")
        cond = flag == "cond"
        if body == "accept":
            return cls((), False, conditional=cond)
        kind, _, ids = body.partition(":")
        if kind not in ("clicks", "only") or not ids:
            raise ValueError(f"cannot parse quantity {text!r}")
        return cls(tuple(ids.split(",")), kind == "only", conditional=cond)

    @property
    def label(self) -> str:
        if not self.clicks:
            body = "accept"
        else:
            body = ("only:" if self.exclusive else "clicks:") + ",".join(self.clicks)
        return body + ("|cond" if self.conditional else "")

    def evaluate(self, dist: PatternDistribution) -> float:
        if dist.conditional:
            raise ValueError("evaluate() expects an unconditioned distribution")
        if self.exclusive:
            joint = dist.only(self.clicks, self.detector)
        else:
            joint = dist.probability(self.clicks, (), self.detector)
        if self.conditional:
            return joint / dist.probability((), (), self.detector)
        return joint


@dataclass
class Table:
    columns: tuple
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([r[j] for r in self.rows])


def phase_sweep(spec: InterferometerSpec, probes: ProbeSet, quantity, grid: Sequence[float],
                engine: str = "statevec") -> Table:
    """Evaluate one or more quantities at every inner phase in ``grid``."""
    quantities = [quantity] if isinstance(quantity, Quantity) else list(quantity)
    table = Table(("phi",) + tuple(q.label for q in quantities))
    for phi in grid:
        dist = pattern_distribution(spec.with_phase(phi), probes, None, engine)
        table.rows.append((float(phi),) + tuple(q.evaluate(dist) for q in quantities))
    return table


def epsilon_sweep(spec: InterferometerSpec, probes: ProbeSet, grid: Sequence[float],
                  detector: str = "DET1", engine: str = "statevec") -> Table:
    """Bures angle of every probe against ``sqrt(epsilon)`` over ``grid``."""
    table = Table(("epsilon", "sqrt_epsilon") + probes.ids)
    for eps in grid:
        angles = probe_angles(spec, probes.with_epsilon(eps), detector, engine)
        table.rows.append((float(eps), math.sqrt(eps)) + tuple(angles[i] for i in probes.ids))
    return table


def loglog_slope(x, y) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = (x > 0) & (y >= 1e-14)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


@dataclass(frozen=True)
class SilentUpdate:
    path: str
    prior: float
    posterior: float


def silent_probe_update(spec: InterferometerSpec, probes: ProbeSet, path: str,
                        detector: str = "DET1") -> SilentUpdate:
    """Route weight through ``path`` before and after learning its probe stayed silent.

    Weights are the incoherent branch weights of the enumerated routes that
    end at ``detector``.
    """
    index = probes.on_path(path, QUBIT_LOCAL)
    at_det = oracle.route_weights(spec, probes, lambda o, t: t == detector)
    silent = oracle.route_weights(spec, probes, lambda o, t: t == detector and o[index] == 0)
    share = lambda w: sum(v for r, v in w.items() if path in r)  # noqa: E731
    return SilentUpdate(path, share(at_det), share(silent))
