import math

import numpy as np
import pytest

from nestedmzi.config import ConfigError, dump_config, load_config, parse_config
from nestedmzi.interferometer import (
    BeamSplitter,
    DetectorMap,
    InterferometerSpec,
    PhaseShift,
    preset_griffiths_eq22,
)
from nestedmzi.probes import ProbeSet, local_probe, pointer_probe, w_probe

BASIC = """\
[interferometer]
preset = "griffiths-eq22"
inner_phase = 0.5

[[probe]]
id = "w"
model = "qubit-nonlocal-w"
paths = ["B", "C"]
epsilon = 1e-4

[[probe]]
id = "D"
model = "qubit-local"
path = "D"
epsilon = 0.01

[campaign]
n_runs = 1e6
seed = 5

[output]
formats = "csv"
"""


def test_parse_basic():
    cfg = parse_config(BASIC)
    assert cfg.spec.name == "griffiths-eq22"
    assert cfg.spec.inner_phase == 0.5
    assert cfg.probes.ids == ("w", "D")
    assert cfg.probes[0].paths == ("B", "C")
    assert cfg.campaign == {"n_runs": 10**6, "seed": 5}
    assert cfg.output["formats"] == ["csv"]


def test_round_trip_preset():
    spec = preset_griffiths_eq22(1.25)
    probes = ProbeSet((w_probe(1e-4), local_probe("E", 0.3), pointer_probe("A", 0.02)))
    text = dump_config(spec, probes, {"n_runs": 100, "seed": 1}, {"directory": "out"})
    cfg = parse_config(text)
    assert cfg.spec == spec
    assert cfg.probes == probes
    assert dump_config(cfg.spec, cfg.probes, cfg.campaign,
                       {"directory": cfg.output["directory"]}) == text


def test_round_trip_complex_splitter():
    sym = ((1 / math.sqrt(2), 1j / math.sqrt(2)), (1j / math.sqrt(2), 1 / math.sqrt(2)))
    spec = InterferometerSpec((
        BeamSplitter("BS1", ("S", None), ("A", "D"), sym),
        BeamSplitter.real("BS2", ("D", None), ("B", "C"), math.pi / 4),
        PhaseShift("P", "B", 0.3),
        PhaseShift("Q", "C"),
        BeamSplitter.real("BS3", ("B", "C"), ("G", "E"), math.pi / 4),
        BeamSplitter.real("BS4", ("A", "E"), ("F", "DET2"), -math.pi / 4),
        DetectorMap("D1", "F", "DET1"),
    ), inner_phase=0.7, name="complex")
    cfg = parse_config(dump_config(spec))
    assert cfg.spec == spec
    assert np.allclose(cfg.spec.elements[0].unitary, np.array(sym))


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.toml")


def line_of(text, needle):
    return next(i for i, line in enumerate(text.splitlines(), 1) if needle in line)


@pytest.mark.parametrize("old, new, needle, match", [
    ("epsilon = 0.01", "epsilon = 1.5", "epsilon = 1.5", "outside"),
    ('path = "D"', 'path = "Q"', None, "path"),
    ('model = "qubit-local"', 'model = "qubit-odd"', None, "unknown probe model"),
    ("seed = 5", "seed = -5", "seed = -5", "seed"),
    ("n_runs = 1e6", "n_runs = 0", "n_runs = 0", "n_runs"),
    ('formats = "csv"', 'formats = "xml"', 'formats = "xml"', "format"),
    ('preset = "griffiths-eq22"', 'preset = "other"', 'preset = "other"', "unknown preset"),
    ("seed = 5", "colour = 5", "colour = 5", "unknown campaign key"),
    ('paths = ["B", "C"]', 'paths = ["A", "B"]', None, "arms B and C"),
])
def test_errors_are_line_anchored(old, new, needle, match):
    text = BASIC.replace(old, new)
    with pytest.raises(ConfigError, match=match) as info:
        parse_config(text, "run.toml")
    assert info.value.line is not None
    assert str(info.value).startswith(f"run.toml:{info.value.line}:")
    if needle:
        assert info.value.line == line_of(text, needle)


def test_probe_on_path_missing_from_network():
    text = BASIC.replace('path = "D"', 'path = "DET1"')
    with pytest.raises(ConfigError, match="absent") as info:
        parse_config(text)
    assert info.value.line == line_of(text, 'path = "DET1"')


def test_second_probe_table_is_located():
    text = BASIC.replace('id = "D"', 'id = "D"\nwidth = 2\ncolour = 1')
    with pytest.raises(ConfigError, match="unknown probe key") as info:
        parse_config(text)
    assert info.value.line == line_of(text, "colour = 1")


def test_toml_syntax_error():
    with pytest.raises(ConfigError) as info:
        parse_config("[interferometer\npreset = 1\n")
    assert info.value.line == 1


def test_missing_sections():
    with pytest.raises(ConfigError, match="missing \\[interferometer\\]"):
        parse_config("[campaign]\nseed = 1\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config('[interferometer]\npreset = "balanced"\n[extra]\nx = 1\n')
    with pytest.raises(ConfigError, match="preset"):
        parse_config("[interferometer]\ninner_phase = 0.1\n")


def test_bad_element_located():
    spec = preset_griffiths_eq22()
    text = dump_config(spec).replace('kind = "phase"', 'kind = "mirror"')
    with pytest.raises(ConfigError, match="unknown element kind") as info:
        parse_config(text)
    headers = [i for i, line in enumerate(text.splitlines(), 1)
               if line.strip() == "[[interferometer.element]]"]
    assert info.value.line == headers[2]


def test_non_unitary_element_rejected():
    text = dump_config(preset_griffiths_eq22()).replace("-0.5773502691896258", "-0.6", 1)
    with pytest.raises(ConfigError, match="u\\^dag"):
        parse_config(text)
