import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nestedmzi.statevec import (
    DensityMatrix,
    JointState,
    PathModes,
    ProbeFactor,
    apply_local_unitary,
    bures_angle,
    fidelity,
    partial_trace_probe,
)

from .conftest import random_density

H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def qubit_rotation(eps):
    c, s = math.sqrt(1 - eps), math.sqrt(eps)
    return np.array([[c, -s], [s, c]])


def superposed(probe_dims=(2,)):
    r = 1 / math.sqrt(3)
    zeros = (0,) * len(probe_dims)
    return JointState({("A", zeros): r, ("B", zeros): r, ("C", zeros): 1j * r}, probe_dims)


def test_identity_leaves_state_unchanged():
    state = superposed()
    out = apply_local_unitary(state, PathModes(("B", "C")), np.eye(2))
    assert dict(out.amplitudes) == dict(state.amplitudes)
    out = apply_local_unitary(state, ProbeFactor(0), np.eye(2))
    assert dict(out.amplitudes) == dict(state.amplitudes)


def test_splitter_twice_equals_square_once():
    state = superposed()
    twice = apply_local_unitary(apply_local_unitary(state, PathModes(("B", "C")), H),
                                PathModes(("B", "C")), H)
    once = apply_local_unitary(state, PathModes(("B", "C")), H @ H)
    for key in set(twice.amplitudes) | set(once.amplitudes):
        assert abs(twice.amplitudes.get(key, 0) - once.amplitudes.get(key, 0)) < 1e-12
    # reflection convention squares to the identity
    assert abs(twice.amplitude("C") - state.amplitude("C")) < 1e-12


def test_symmetric_splitter_twice_is_swap_with_phase():
    sym = np.array([[1, 1j], [1j, 1]]) / math.sqrt(2)
    state = superposed()
    twice = apply_local_unitary(apply_local_unitary(state, PathModes(("B", "C")), sym),
                                PathModes(("B", "C")), sym)
    assert abs(twice.amplitude("B") - 1j * state.amplitude("C")) < 1e-12
    assert abs(twice.amplitude("C") - 1j * state.amplitude("B")) < 1e-12


def test_coupling_rotation_on_c_branch():
    state = superposed()
    prior = state.amplitude("C", (0,))
    out = apply_local_unitary(state, ProbeFactor(0, frozenset({"C"})), qubit_rotation(0.04))
    assert abs(out.amplitude("C", (1,)) - 0.2 * prior) < 1e-12
    assert out.amplitude("B", (1,)) == 0


def test_relabelling_modes_and_vacuum_port():
    state = JointState.basis("S")
    out = apply_local_unitary(state, PathModes(("S", None), ("A", "D")), H)
    assert abs(out.amplitude("A") - 1 / math.sqrt(2)) < 1e-15
    assert abs(out.amplitude("D") - 1 / math.sqrt(2)) < 1e-15
    assert "S" not in out.path_weights()


def test_non_unitary_rejected_with_defect():
    with pytest.raises(ValueError, match=r"u\^dag u - I"):
        apply_local_unitary(superposed(), PathModes(("B", "C")), [[1, 0], [0, 1.001]])


def test_probe_index_out_of_range():
    with pytest.raises(IndexError):
        apply_local_unitary(superposed(), ProbeFactor(3), np.eye(2))


def test_pruning_drops_tiny_amplitudes():
    s = JointState({("A", ()): 1.0, ("B", ()): 1e-16})
    assert ("B", ()) not in s.amplitudes
    assert abs(s.norm2() - 1.0) < 1e-12


def test_partial_trace_product_state():
    rho = partial_trace_probe(JointState.basis("A", (2,)), 0)
    assert np.allclose(rho.entries, [[1, 0], [0, 0]], atol=1e-15)
    assert np.allclose(sorted(rho.eigenvalues()), [0, 1], atol=1e-15)


def test_partial_trace_maximally_mixed():
    r = 1 / math.sqrt(2)
    state = JointState({("B", (0,)): r, ("C", (1,)): r}, (2,))
    assert np.allclose(partial_trace_probe(state, 0).eigenvalues(), [0.5, 0.5], atol=1e-15)


def test_partial_trace_rejects_unnormalized():
    state = JointState({("B", (0,)): 0.5}, (2,))
    with pytest.raises(ValueError, match="normalized"):
        partial_trace_probe(state, 0)


def test_bures_examples():
    zero = DensityMatrix.pure([1, 0])
    one = DensityMatrix.pure([0, 1])
    assert bures_angle(zero, zero) == 0.0
    assert abs(bures_angle(zero, one) - math.pi / 2) < 1e-15
    eps = 1e-4
    tilted = DensityMatrix.pure([math.sqrt(1 - eps), math.sqrt(eps)])
    # arcsin(sqrt(eps)) == arccos(sqrt(1 - eps)) = 0.010000166674167...
    assert abs(bures_angle(tilted, zero) - 0.01000016667416711) < 1e-15


def test_bures_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        bures_angle(DensityMatrix.pure([1, 0]), DensityMatrix.pure([1, 0, 0]))


def test_density_matrix_validation():
    with pytest.raises(ValueError, match="Hermitian"):
        DensityMatrix([[0.5, 0.1], [0.2, 0.5]])
    with pytest.raises(ValueError, match="trace"):
        DensityMatrix([[0.6, 0], [0, 0.6]])
    with pytest.raises(ValueError, match="negative"):
        DensityMatrix([[1.2, 0], [0, -0.2]])


def test_mixed_fidelity_matches_closed_form_for_commuting_states():
    rho = DensityMatrix(np.diag([0.7, 0.3]))
    sigma = DensityMatrix(np.diag([0.2, 0.8]))
    expected = (math.sqrt(0.7 * 0.2) + math.sqrt(0.3 * 0.8)) ** 2
    assert abs(fidelity(rho, sigma) - expected) < 1e-12


unitaries = st.integers(0, 2**32 - 1).map(
    lambda seed: np.linalg.qr(np.random.default_rng(seed).normal(size=(2, 2))
                              + 1j * np.random.default_rng(seed + 1).normal(size=(2, 2)))[0])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["paths", "p0", "p1"]), unitaries), max_size=12))
def test_norm_preserved_by_any_sequence(ops):
    state = JointState({("A", (0, 0)): 0.6, ("B", (1, 0)): 0.8j}, (2, 2))
    for kind, u in ops:
        sel = PathModes(("A", "B")) if kind == "paths" else ProbeFactor(int(kind[1]))
        state = apply_local_unitary(state, sel, u)
    assert abs(state.norm2() - 1.0) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.permutations([0, 1, 2]))
def test_partial_trace_is_order_independent(seed, order):
    rng = np.random.default_rng(seed)
    amps = {}
    for path in "ABC":
        for o in np.ndindex(2, 2, 2):
            amps[(path, o)] = complex(rng.normal(), rng.normal())
    state = JointState(amps, (2, 2, 2)).normalized()
    permuted = state.permute_probes(order)
    for new, old in enumerate(order):
        a = partial_trace_probe(permuted, new).entries
        b = partial_trace_probe(state, old).entries
        assert np.max(np.abs(a - b)) < 1e-12
    back = permuted.permute_probes(np.argsort(order))
    for k in range(3):
        assert np.max(np.abs(partial_trace_probe(back, k).entries
                             - partial_trace_probe(state, k).entries)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 4]))
def test_bures_symmetric_and_triangle(seed, dim):
    rng = np.random.default_rng(seed)
    r, s, t = (DensityMatrix(random_density(rng, dim, rank=int(rng.integers(1, dim + 1))),
                             tol=1e-10) for _ in range(3))
    assert abs(bures_angle(r, s) - bures_angle(s, r)) < 1e-9
    assert bures_angle(r, t) <= bures_angle(r, s) + bures_angle(s, t) + 1e-9
    assert 0.0 <= bures_angle(r, s) <= math.pi / 2
