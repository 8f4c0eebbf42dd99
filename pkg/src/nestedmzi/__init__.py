"""Single-particle nested Mach-Zehnder interferometer with weak which-path probes."""

from .analysis import (
    PatternDistribution,
    Quantity,
    conditional_probe_state,
    pattern_distribution,
    phase_sweep,
    postselect,
    trace_order,
    weak_values,
)
from .interferometer import (
    InterferometerSpec,
    backward_state,
    forward_evolve,
    preset,
    preset_griffiths_eq22,
)
from .montecarlo import CampaignConfig, RunReport, expected_counts, run_campaign
from .probes import (
    ProbeConfig,
    ProbeSet,
    b_only_variant,
    c_only_variant,
    coupling_unitary,
    local_probe,
    pointer_probe,
    seven_local_probes,
    w_probe,
)
from .statevec import DensityMatrix, JointState, bures_angle, partial_trace_probe

__version__ = "0.1.0"
