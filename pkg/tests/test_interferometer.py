import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nestedmzi.interferometer import (
    BeamSplitter,
    DetectorMap,
    InterferometerSpec,
    PhaseShift,
    backward_state,
    e_amplitude,
    forward_evolve,
    mid_state,
    nested_mzi,
    preset,
    preset_balanced,
    preset_griffiths_eq22,
    transfer_amplitude,
)
from nestedmzi.probes import ProbeSet, local_probe, seven_local_probes

R3 = 1 / math.sqrt(3)


def test_mid_slice_state(spec):
    mid = mid_state(spec)
    for p in "ABC":
        assert abs(mid.amplitude(p) - R3) < 1e-12
    assert set(mid.path_weights()) == {"A", "B", "C"}


def test_backward_det1_state(spec):
    back = backward_state(spec, "DET1")
    assert abs(back["A"] - R3) < 1e-12
    assert abs(back["B"] + R3) < 1e-12
    assert abs(back["C"] - R3) < 1e-12


def test_det2_state_orthogonal_to_det1(spec):
    b1, b2 = backward_state(spec, "DET1"), backward_state(spec, "DET2")
    overlap = sum(np.conj(b1[p]) * b2[p] for p in "ABC")
    assert abs(overlap) < 1e-12


def explicit_det1_row(phi):
    """Hand-built transfer row from the (A, B, C) slice to DET1."""
    r2, r3, r23 = 1 / math.sqrt(2), 1 / math.sqrt(3), math.sqrt(2 / 3)
    bs3_e = np.array([r2, -r2])  # E = (B - C)/sqrt(2)
    bs4_f = np.array([r3, -r23])  # F = A/sqrt(3) - sqrt(2/3) E
    phase = np.diag([np.exp(1j * phi), 1])
    e_row = bs3_e @ phase
    return np.array([bs4_f[0], bs4_f[1] * e_row[0], bs4_f[1] * e_row[1]])


@pytest.mark.parametrize("phi", [0.0, math.pi / 3, math.pi])
def test_backward_state_matches_explicit_adjoint(phi):
    spec = preset_griffiths_eq22(phi)
    row = explicit_det1_row(phi)
    expected = np.conj(row) / np.linalg.norm(row)
    back = backward_state(spec, "DET1")
    assert np.allclose([back[p] for p in "ABC"], expected, atol=1e-12)


def det1_probability(spec):
    return forward_evolve(spec).path_weights().get("DET1", 0.0)


def test_det1_probability_tuning():
    assert abs(det1_probability(preset_griffiths_eq22(0.0)) - 1 / 9) < 1e-12
    assert abs(det1_probability(preset_griffiths_eq22(math.pi)) - 1.0) < 1e-12


@pytest.mark.parametrize("phi", np.linspace(0, 2 * math.pi, 7))
def test_det1_closed_form(phi):
    assert abs(det1_probability(preset_griffiths_eq22(phi)) - (5 - 4 * math.cos(phi)) / 9) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * math.pi))
def test_dark_port_law(phi):
    e = e_amplitude(preset_griffiths_eq22(phi))
    assert abs(e - (math.cos(phi) - 1) / math.sqrt(6) - 1j * math.sin(phi) / math.sqrt(6)) < 1e-12


def test_e_dark_at_zero_phase(spec):
    assert abs(e_amplitude(spec)) < 1e-12


@pytest.mark.parametrize("name", ["griffiths-eq22", "balanced"])
@pytest.mark.parametrize("phi", [0.0, 1.0, math.pi])
def test_probability_conserved_with_probes(name, phi):
    final = forward_evolve(preset(name, phi), seven_local_probes(0.3))
    assert abs(final.norm2() - 1.0) < 1e-12
    assert set(final.path_weights()) <= {"DET1", "DET2", "G"}


def test_full_strength_probe_on_b_gives_which_path_result():
    probes = ProbeSet((local_probe("B", 1.0),))
    final = forward_evolve(preset_griffiths_eq22(), probes)
    # B is fully marked: A + C = 2/3 interfere on the silent branch, B alone on the fired one
    p_det1 = final.probability(lambda path, o: path == "DET1")
    assert abs(p_det1 - (4 / 9 + 1 / 9)) < 1e-12
    p_b_det1 = final.probability(lambda path, o: path == "DET1" and o[0] == 1)
    assert abs(p_b_det1 - 1 / 9) < 1e-12


def test_transfer_amplitudes(spec):
    assert abs(transfer_amplitude(spec, "A", "DET1") - R3) < 1e-12
    assert abs(transfer_amplitude(spec, "E", "DET1") + math.sqrt(2 / 3)) < 1e-12
    assert abs(transfer_amplitude(spec, "E", "DET2") + R3) < 1e-12


def test_balanced_preset_mid_state():
    mid = mid_state(preset_balanced())
    assert abs(mid.amplitude("A") - 1 / math.sqrt(2)) < 1e-12
    assert abs(mid.amplitude("B") - 0.5) < 1e-12


def test_unknown_preset():
    with pytest.raises(ValueError, match="unknown preset"):
        preset("nope")


def test_topology_errors():
    bs = BeamSplitter.real("BS1", ("S", None), ("A", "D"), 0.3)
    with pytest.raises(ValueError, match="not produced"):
        InterferometerSpec((BeamSplitter.real("X", ("B", None), ("E", "G"), 0.3),))
    with pytest.raises(ValueError, match="produced twice"):
        InterferometerSpec((bs, BeamSplitter.real("BS2", ("D", None), ("A", "C"), 0.3)))
    with pytest.raises(ValueError, match="duplicate element"):
        InterferometerSpec((bs, DetectorMap("BS1", "A", "DET1")))
    with pytest.raises(ValueError, match="unitary|u\\^dag"):
        BeamSplitter("BAD", ("S", None), ("A", "D"), ((1, 1), (1, 1)))
    with pytest.raises(ValueError, match="unknown detector"):
        DetectorMap("D", "F", "DET3")
    with pytest.raises(ValueError):
        PhaseShift("P", "Q")


def test_probe_on_unknown_path_rejected():
    spec = nested_mzi(0.4, -0.4)
    with pytest.raises(ValueError, match="not an optical path"):
        forward_evolve(spec, ProbeSet((local_probe("DET1", 0.1),)))


def test_with_phase_copies(spec):
    other = spec.with_phase(1.5)
    assert other.inner_phase == 1.5 and spec.inner_phase == 0.0
