"""Sparse amplitude bookkeeping for one particle plus a register of probes.

A basis label is ``(path, outcomes)`` where ``path`` is one of :data:`PATHS`
and ``outcomes`` holds one basis index per registered probe (0/1 for qubits,
a bin index for discretized pointers). States are immutable mappings from
labels to complex amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

PATHS = ("S", "A", "B", "C", "D", "E", "F", "G", "DET1", "DET2")
DETECTORS = ("DET1", "DET2")
TERMINALS = ("DET1", "DET2", "G")

PRUNE_TOL = 1e-15
UNITARY_TOL = 1e-10
NORM_TOL = 1e-9

Label = tuple  # (path, outcomes)


def check_path(path: str) -> str:
    if path not in PATHS:
        raise ValueError(f"unknown path label {path!r}; expected one of {PATHS}")
    return path


def unitarity_defect(u: np.ndarray) -> float:
    """Frobenius norm of ``u^dagger u - I``."""
    u = np.asarray(u, dtype=complex)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def check_unitary(u, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    defect = unitarity_defect(u)
    if defect > tol:
        raise ValueError(f"matrix is not unitary: ||u^dag u - I|| = {defect:.3e}")
    return u


@dataclass(frozen=True)
class JointState:
    """Amplitudes over ``(path, probe outcomes)`` labels.

    ``probe_dims`` fixes the length of every outcome tuple. Amplitudes with
    modulus below ``PRUNE_TOL`` are dropped on construction.
    """

    amplitudes: Mapping[Label, complex]
    probe_dims: tuple[int, ...] = ()

    def __post_init__(self):
        pruned = {}
        n = len(self.probe_dims)
        for (path, outcomes), amp in self.amplitudes.items():
            if len(outcomes) != n:
                raise ValueError(f"label {(path, outcomes)} does not match {n} probes")
            if abs(amp) >= PRUNE_TOL:
                pruned[(path, tuple(outcomes))] = complex(amp)
        object.__setattr__(self, "amplitudes", MappingProxyType(pruned))
        object.__setattr__(self, "probe_dims", tuple(self.probe_dims))

    @classmethod
    def basis(cls, path: str, probe_dims: Sequence[int] = (), outcomes=None) -> "JointState":
        check_path(path)
        outcomes = tuple(outcomes) if outcomes is not None else (0,) * len(probe_dims)
        return cls({(path, outcomes): 1.0}, tuple(probe_dims))

    @property
    def n_probes(self) -> int:
        return len(self.probe_dims)

    def amplitude(self, path: str, outcomes=None) -> complex:
        outcomes = tuple(outcomes) if outcomes is not None else (0,) * self.n_probes
        return self.amplitudes.get((path, outcomes), 0j)

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> "JointState":
        n2 = self.norm2()
        if n2 <= 0.0:
            raise ValueError("cannot normalize the zero state")
        scale = 1.0 / np.sqrt(n2)
        return JointState({k: a * scale for k, a in self.amplitudes.items()}, self.probe_dims)

    def probability(self, predicate: Callable[[str, tuple], bool]) -> float:
        return float(
            sum(abs(a) ** 2 for (p, o), a in self.amplitudes.items() if predicate(p, o))
        )

    def path_weights(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for (p, _), a in self.amplitudes.items():
            out[p] = out.get(p, 0.0) + abs(a) ** 2
        return out

    def restrict(self, paths: Iterable[str]) -> "JointState":
        """Unnormalized projection onto the given path labels."""
        keep = set(paths)
        return JointState(
            {k: a for k, a in self.amplitudes.items() if k[0] in keep}, self.probe_dims
        )

    def inner(self, other: "JointState") -> complex:
        """``<self|other>``."""
        return complex(
            sum(a.conjugate() * other.amplitudes.get(k, 0j) for k, a in self.amplitudes.items())
        )

    def permute_probes(self, order: Sequence[int]) -> "JointState":
        """Reorder the probe register; ``order[i]`` is the old index placed at ``i``."""
        order = tuple(order)
        if sorted(order) != list(range(self.n_probes)):
            raise ValueError(f"{order} is not a permutation of {self.n_probes} probes")
        return JointState(
            {(p, tuple(o[j] for j in order)): a for (p, o), a in self.amplitudes.items()},
            tuple(self.probe_dims[j] for j in order),
        )


@dataclass(frozen=True)
class PathModes:
    """Selects path modes for a linear-optics style unitary.

    Amplitude on ``inputs[j]`` feeds column ``j``; row ``i`` lands on
    ``outputs[i]``. ``None`` marks an empty (vacuum) port.
    """

    inputs: tuple
    outputs: Optional[tuple] = None

    def __post_init__(self):
        outputs = self.outputs if self.outputs is not None else self.inputs
        if len(outputs) != len(self.inputs):
            raise ValueError("inputs and outputs must have equal length")
        for p in (*self.inputs, *outputs):
            if p is not None:
                check_path(p)
        real_in = [p for p in self.inputs if p is not None]
        if len(set(real_in)) != len(real_in):
            raise ValueError(f"duplicate input ports in {self.inputs}")
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(outputs))


@dataclass(frozen=True)
class ProbeFactor:
    """Selects one probe; ``when`` restricts the action to those particle paths."""

    index: int
    when: Optional[frozenset] = field(default=None)

    def __post_init__(self):
        if self.when is not None:
            object.__setattr__(self, "when", frozenset(check_path(p) for p in self.when))


def apply_local_unitary(state: JointState, subsystem, u) -> JointState:
    """Apply ``u`` to the path modes or to one probe factor of ``state``."""
    u = check_unitary(u)
    if isinstance(subsystem, PathModes):
        return _apply_paths(state, subsystem, u)
    if isinstance(subsystem, ProbeFactor):
        return _apply_probe(state, subsystem, u)
    raise TypeError(f"unsupported subsystem selector {subsystem!r}")


def _apply_paths(state: JointState, modes: PathModes, u: np.ndarray) -> JointState:
    if u.shape[0] != len(modes.inputs):
        raise ValueError(f"{u.shape} matrix does not fit {len(modes.inputs)} modes")
    col = {p: j for j, p in enumerate(modes.inputs) if p is not None}
    out: dict = {}
    groups: dict[tuple, np.ndarray] = {}
    for (p, o), a in state.amplitudes.items():
        if p in col:
            vec = groups.setdefault(o, np.zeros(len(modes.inputs), dtype=complex))
            vec[col[p]] += a
        else:
            out[(p, o)] = out.get((p, o), 0j) + a
    for o, vec in groups.items():
        res = u @ vec
        for i, p in enumerate(modes.outputs):
            if p is None:
                if abs(res[i]) > 1e-12:
                    raise ValueError("unitary sends amplitude into a vacuum port")
                continue
            out[(p, o)] = out.get((p, o), 0j) + res[i]
    return JointState(out, state.probe_dims)


def _apply_probe(state: JointState, sel: ProbeFactor, u: np.ndarray) -> JointState:
    k = sel.index
    if not 0 <= k < state.n_probes:
        raise IndexError(f"probe index {k} out of range for {state.n_probes} probes")
    dim = state.probe_dims[k]
    if u.shape[0] != dim:
        raise ValueError(f"{u.shape} matrix does not fit probe of dimension {dim}")
    out: dict = {}
    groups: dict[tuple, np.ndarray] = {}
    for (p, o), a in state.amplitudes.items():
        if sel.when is None or p in sel.when:
            key = (p, o[:k], o[k + 1:])
            vec = groups.setdefault(key, np.zeros(dim, dtype=complex))
            vec[o[k]] += a
        else:
            out[(p, o)] = a
    for (p, head, tail), vec in groups.items():
        res = u @ vec
        for j in np.flatnonzero(np.abs(res) >= PRUNE_TOL):
            out[(p, head + (int(j),) + tail)] = res[j]
    return JointState(out, state.probe_dims)


class DensityMatrix:
    """Validated density matrix: Hermitian, unit trace, positive semidefinite."""

    TOL = 1e-12

    def __init__(self, entries, tol: float = TOL):
        m = np.array(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise ValueError(f"density matrix trace is {np.trace(m).real!r}, expected 1")
        if np.min(np.linalg.eigvalsh(m)) < -tol:
            raise ValueError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        self._m = m

    @classmethod
    def pure(cls, vector) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._m

    def purity(self) -> float:
        return float(np.real(np.trace(self._m @ self._m)))

    def is_pure(self, tol: float = 1e-12) -> bool:
        return self.purity() > 1.0 - tol

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self._m)

    def dominant_vector(self) -> np.ndarray:
        """Top eigenvector with the phase fixed so its largest entry is real positive."""
        w, v = np.linalg.eigh(self._m)
        vec = v[:, -1]
        j = int(np.argmax(np.abs(vec)))
        return vec * (abs(vec[j]) / vec[j])

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def partial_trace_probe(state: JointState, probe_index: int) -> DensityMatrix:
    """Reduced state of one probe, tracing out the path and all other probes."""
    n2 = state.norm2()
    if abs(n2 - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm^2 = {n2!r})")
    if not 0 <= probe_index < state.n_probes:
        raise IndexError(f"probe index {probe_index} out of range")
    k = probe_index
    dim = state.probe_dims[k]
    rest: dict[tuple, int] = {}
    for (p, o) in state.amplitudes:
        rest.setdefault((p, o[:k] + o[k + 1:]), len(rest))
    psi = np.zeros((dim, len(rest)), dtype=complex)
    for (p, o), a in state.amplitudes.items():
        psi[o[k], rest[(p, o[:k] + o[k + 1:])]] += a
    rho = psi @ psi.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.real(np.trace(rho)), tol=1e-10)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    return 1.0 - _infidelity(rho, sigma)


def _infidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    # for a pure argument, 1 - F = tr(rho (I - sigma)) keeps precision at F ~ 1
    for a, b in ((rho, sigma), (sigma, rho)):
        if b.is_pure():
            comp = np.eye(b.dim) - b.entries
            return float(np.clip(np.real(np.trace(a.entries @ comp)), 0.0, 1.0))
    # sqrt(F) is the trace norm of sqrt(rho) sqrt(sigma); symmetric by construction
    sv = np.linalg.svd(_psd_sqrt(rho.entries) @ _psd_sqrt(sigma.entries), compute_uv=False)
    f = float(np.sum(sv) ** 2)
    return float(np.clip(1.0 - f, 0.0, 1.0))


def bures_angle(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Bures angle ``arccos(sqrt(F))`` in radians, in ``[0, pi/2]``."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    inf = _infidelity(rho, sigma)
    return float(np.arctan2(np.sqrt(inf), np.sqrt(1.0 - inf)))
