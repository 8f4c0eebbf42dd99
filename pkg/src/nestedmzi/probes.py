"""Probe models: local qubits, the two-arm probe ``w``, and Gaussian pointers.

Every probe starts in its ready state (``|0>`` for qubits, a centred Gaussian
for pointers). When the particle occupies a coupled path the probe is acted on
by :func:`coupling_unitary`; otherwise it is left alone.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

import numpy as np

from .statevec import (
    DensityMatrix,
    JointState,
    ProbeFactor,
    apply_local_unitary,
    check_path,
    partial_trace_probe,
)

QUBIT_LOCAL = "qubit-local"
QUBIT_W = "qubit-nonlocal-w"
POINTER = "pointer-gaussian"
MODELS = (QUBIT_LOCAL, QUBIT_W, POINTER)
W_ARMS = ("B", "C")


@dataclass(frozen=True)
class ProbeConfig:
    """One probe.

    ``epsilon`` is the click probability given presence, so qubit probes rotate
    by amplitude ``sqrt(epsilon)``. Pointer probes ignore it and use ``shift``
    (translation on presence) and ``width`` (position spread of the ready
    state), sampled on ``bins`` points spanning ``+-extent * width``.
    """

    id: str
    model: str
    paths: tuple
    epsilon: float = 0.0
    shift: float = 0.0
    width: float = 1.0
    extent: float = 8.0
    bins: int = 257

    def __post_init__(self):
        if isinstance(self.paths, str):
            object.__setattr__(self, "paths", (self.paths,))
        paths = tuple(check_path(p) for p in self.paths)
        object.__setattr__(self, "paths", paths)
        if self.model not in MODELS:
            raise ValueError(f"unknown probe model {self.model!r}; expected one of {MODELS}")
        if not paths or len(set(paths)) != len(paths):
            raise ValueError(f"probe {self.id!r}: paths must be non-empty and distinct")
        if self.model == QUBIT_LOCAL and len(paths) != 1:
            raise ValueError(f"probe {self.id!r}: a local probe sits on exactly one path")
        if self.model == QUBIT_W and not set(paths) <= set(W_ARMS):
            raise ValueError(f"probe {self.id!r}: the w probe couples only to arms B and C")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"probe {self.id!r}: epsilon {self.epsilon} outside [0, 1]")
        if self.model == POINTER:
            if self.width <= 0 or self.extent <= 0 or self.bins < 3:
                raise ValueError(f"probe {self.id!r}: invalid pointer grid")
            if self.width < 2 * self.grid_step:
                raise ValueError(
                    f"probe {self.id!r}: grid too coarse (width {self.width} < 2 bins "
                    f"of {self.grid_step:.4g})"
                )

    @property
    def dim(self) -> int:
        return self.bins if self.model == POINTER else 2

    @property
    def grid_step(self) -> float:
        return 2 * self.extent * self.width / (self.bins - 1)

    def grid(self) -> np.ndarray:
        return np.linspace(-self.extent * self.width, self.extent * self.width, self.bins)

    def ready_state(self) -> np.ndarray:
        if self.model != POINTER:
            return np.array([1.0, 0.0], dtype=complex)
        x = self.grid()
        psi = np.exp(-(x**2) / (4 * self.width**2)).astype(complex)
        return psi / np.linalg.norm(psi)

    def with_epsilon(self, epsilon: float) -> "ProbeConfig":
        return replace(self, epsilon=epsilon)


def local_probe(path: str, epsilon: float, id: str | None = None) -> ProbeConfig:
    return ProbeConfig(id or path, QUBIT_LOCAL, (path,), epsilon)


def w_probe(epsilon: float, arms: Sequence[str] = W_ARMS, id: str = "w") -> ProbeConfig:
    return ProbeConfig(id, QUBIT_W, tuple(arms), epsilon)


def pointer_probe(paths, shift: float, width: float = 1.0, id: str | None = None,
                  **grid) -> ProbeConfig:
    paths = (paths,) if isinstance(paths, str) else tuple(paths)
    return ProbeConfig(id or "ptr-" + "".join(paths), POINTER, paths, shift=shift,
                       width=width, **grid)


def matched_shift(epsilon: float, width: float = 1.0) -> float:
    """Pointer shift whose ready-state infidelity matches a qubit of strength ``epsilon``.

    A Gaussian translated by ``d`` keeps overlap ``exp(-d**2 / (8 width**2))``,
    so ``1 - |overlap|**2 ~ (d / 2 width)**2``.
    """
    return 2.0 * width * np.sqrt(epsilon)


@dataclass(frozen=True)
class ProbeSet:
    """Ordered probe register; the order fixes the outcome tuple layout."""

    probes: tuple = ()

    def __post_init__(self):
        probes = tuple(self.probes)
        object.__setattr__(self, "probes", probes)
        ids = [p.id for p in probes]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate probe ids in {ids}")
        seen = set()
        for p in probes:
            for path in p.paths:
                key = (p.model, path)
                if key in seen:
                    raise ValueError(f"more than one {p.model} probe on path {path}")
                seen.add(key)

    def __iter__(self) -> Iterator[ProbeConfig]:
        return iter(self.probes)

    def __len__(self) -> int:
        return len(self.probes)

    def __getitem__(self, i) -> ProbeConfig:
        return self.probes[i]

    @property
    def dims(self) -> tuple:
        return tuple(p.dim for p in self.probes)

    @property
    def ids(self) -> tuple:
        return tuple(p.id for p in self.probes)

    def index(self, id: str) -> int:
        try:
            return self.ids.index(id)
        except ValueError:
            raise KeyError(f"no probe with id {id!r}") from None

    def on_path(self, path: str, model: str = QUBIT_LOCAL) -> int:
        """Index of the probe of ``model`` on ``path``."""
        for i, p in enumerate(self.probes):
            if p.model == model and path in p.paths:
                return i
        raise KeyError(f"no {model} probe on path {path}")

    def is_binary(self) -> bool:
        return all(p.model != POINTER for p in self.probes)

    def with_epsilon(self, epsilon: float) -> "ProbeSet":
        return ProbeSet(tuple(p.with_epsilon(epsilon) if p.model != POINTER else p
                              for p in self.probes))

    def permuted(self, order: Sequence[int]) -> "ProbeSet":
        return ProbeSet(tuple(self.probes[j] for j in order))


def seven_local_probes(epsilon: float) -> ProbeSet:
    """One local qubit probe on each of S, A, B, C, D, E, F."""
    return ProbeSet(tuple(local_probe(p, epsilon) for p in "SABCDEF"))


def coupling_unitary(probe: ProbeConfig) -> np.ndarray:
    """Unitary applied to the probe while the particle is on a coupled path.

    Off the coupled paths the probe sees the identity. Qubits rotate
    ``|0> -> sqrt(1-eps)|0> + sqrt(eps)|1>``; pointers are translated by
    ``shift`` (exactly unitary on the periodic grid via the DFT).
    """
    if not 0.0 <= probe.epsilon <= 1.0:
        raise ValueError(f"epsilon {probe.epsilon} outside [0, 1]")
    if probe.model != POINTER:
        c, s = np.sqrt(1.0 - probe.epsilon), np.sqrt(probe.epsilon)
        return np.array([[c, -s], [s, c]], dtype=complex)
    n = probe.bins
    k = 2 * np.pi * np.fft.fftfreq(n, d=probe.grid_step)
    phase = np.exp(-1j * k * probe.shift)
    return np.fft.ifft(phase[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0)


def couple(state: JointState, probes: ProbeSet, path: str, _cache: dict | None = None) -> JointState:
    """Apply every probe coupled to ``path`` (registration order)."""
    for i, p in enumerate(probes):
        if path in p.paths:
            if _cache is not None:
                u = _cache.get(i)
                if u is None:
                    u = _cache[i] = coupling_unitary(p)
            else:
                u = coupling_unitary(p)
            state = apply_local_unitary(state, ProbeFactor(i, frozenset({path})), u)
    return state


def ready_joint_state(path: str, probes: ProbeSet) -> JointState:
    """Particle on ``path`` with every probe in its ready state."""
    amps = {(path, ()): 1.0 + 0j}
    for p in probes:
        vec = p.ready_state()
        nz = np.flatnonzero(np.abs(vec) > 0)
        amps = {(path, o + (int(j),)): a * vec[j] for (_, o), a in amps.items() for j in nz}
    return JointState(amps, probes.dims)


def _require_w(w: ProbeConfig) -> None:
    if w.model != QUBIT_W:
        raise ValueError(f"probe {w.id!r} is {w.model}, not the two-arm w probe")


def c_only_variant(w: ProbeConfig) -> ProbeConfig:
    """Copy of ``w`` coupled only while the particle is in arm C."""
    _require_w(w)
    return replace(w, paths=("C",))


def b_only_variant(w: ProbeConfig) -> ProbeConfig:
    """Copy of ``w`` coupled only while the particle is in arm B."""
    _require_w(w)
    return replace(w, paths=("B",))


@dataclass(frozen=True)
class PointerState:
    """Conditional pointer wavefunction sampled on ``grid``."""

    grid: np.ndarray
    psi: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    def mean(self) -> float:
        return float(np.sum(self.grid * self.probabilities))

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix.pure(self.psi)


def gaussian_pointer_state(conditional: JointState, probes: ProbeSet,
                           index: int) -> PointerState:
    """Post-selected pointer wavefunction of probe ``index``.

    The pointer must be unentangled from the rest of the register after
    conditioning; otherwise use :func:`partial_trace_probe` directly.
    """
    probe = probes[index]
    if probe.model != POINTER:
        raise ValueError(f"probe {probe.id!r} is not a Gaussian pointer")
    if abs(probe.shift) >= probe.width:
        warnings.warn(f"pointer {probe.id!r} is outside the weak regime "
                      f"(shift {probe.shift} >= width {probe.width})", stacklevel=2)
    rho = partial_trace_probe(conditional.normalized(), index)
    w = rho.eigenvalues()
    if w[-2] > 1e-10:
        raise ValueError(f"pointer {probe.id!r} is entangled with the rest of the register")
    return PointerState(probe.grid(), rho.dominant_vector())
