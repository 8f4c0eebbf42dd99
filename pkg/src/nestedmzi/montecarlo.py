"""Sampled click campaigns drawn from the exact pattern distribution.

Runs are drawn with a multinomial over all outcome patterns, so a campaign of
1e7 particles costs one draw per shard. Shard seeds come from
``numpy.random.SeedSequence(seed).spawn(shards)`` and each shard uses PCG64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import PatternDistribution, pattern_distribution
from .interferometer import InterferometerSpec
from .probes import ProbeSet

MODES = ("post-selected", "full")
GENERATOR = "PCG64"


@dataclass(frozen=True)
class CampaignConfig:
    """``n_runs`` counts post-selected particles in post-selected mode, emitted ones in full mode."""

    spec: InterferometerSpec
    probes: ProbeSet
    n_runs: int
    seed: int = 0
    detector: str = "DET1"
    mode: str = "post-selected"
    shards: int = 1
    engine: str = "statevec"

    def __post_init__(self):
        if int(self.n_runs) != self.n_runs or self.n_runs < 1:
            raise ValueError(f"n_runs must be a positive integer, got {self.n_runs!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.shards < 1:
            raise ValueError("shards must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if not self.probes.is_binary():
            raise ValueError("campaigns need click/no-click probes; pointer probes have no clicks")


@dataclass
class RunReport:
    probe_ids: tuple
    n_runs: int
    n_accepted: int
    clicks: dict
    coincidences: dict  # click-set label -> count, two or more probes
    patterns: dict  # outcome bit string -> count over accepted runs
    expected: dict  # probe id -> (expectation, variance)
    acceptance_probability: float
    seed: int
    mode: str
    detector: str
    shards: int
    generator: str = GENERATOR
    config: dict = field(default_factory=dict)


def _pattern_key(outcomes) -> str:
    return "".join(str(o) for o in outcomes)


def _click_label(probe_ids, outcomes) -> str:
    return "+".join(i for i, o in zip(probe_ids, outcomes) if o)


def _distribution(cfg: CampaignConfig) -> PatternDistribution:
    cond = cfg.detector if cfg.mode == "post-selected" else None
    return pattern_distribution(cfg.spec, cfg.probes, cond, cfg.engine)


def shard_sizes(n: int, shards: int) -> list:
    base, extra = divmod(n, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def _draw(probs: np.ndarray, n: int, seed: int, shards: int) -> np.ndarray:
    children = np.random.SeedSequence(seed).spawn(shards)
    total = np.zeros(len(probs), dtype=np.int64)
    p = np.clip(probs, 0.0, None)
    p = p / p.sum()
    for child, size in zip(children, shard_sizes(n, shards)):
        rng = np.random.Generator(np.random.PCG64(child))
        total += rng.multinomial(size, p)
    return total


def expected_counts(cfg: CampaignConfig, dist: Optional[PatternDistribution] = None) -> dict:
    """Per-probe click expectation and variance among accepted runs.

    Post-selected mode: ``n * p`` with Bernoulli variance. Full mode: each
    emitted particle clicks-and-is-accepted with ``P(click and detector)``.
    """
    dist = dist or _distribution(cfg)
    out = {}
    for pid in cfg.probes.ids:
        p = dist.probability((pid,), (), cfg.detector)
        out[pid] = (cfg.n_runs * p, cfg.n_runs * p * (1.0 - p))
    return out


def expected_pattern_counts(cfg: CampaignConfig, clicks) -> float:
    """Expected number of accepted runs in which exactly ``clicks`` fired."""
    dist = _distribution(cfg)
    return cfg.n_runs * dist.only(tuple(clicks), cfg.detector)


def run_campaign(cfg: CampaignConfig) -> RunReport:
    dist = _distribution(cfg)
    items = dist.sorted_items()
    counts = _draw(np.array([p for _, p in items]), cfg.n_runs, cfg.seed, cfg.shards)
    ids = cfg.probes.ids
    clicks = {pid: 0 for pid in ids}
    coincidences: dict = {}
    patterns: dict = {}
    accepted = 0
    for (pat, _), c in zip(items, counts):
        if c == 0 or pat.detector != cfg.detector:
            continue
        c = int(c)
        accepted += c
        patterns[_pattern_key(pat.outcomes)] = patterns.get(_pattern_key(pat.outcomes), 0) + c
        fired = [pid for pid, o in zip(ids, pat.outcomes) if o]
        for pid in fired:
            clicks[pid] += c
        if len(fired) >= 2:
            label = _click_label(ids, pat.outcomes)
            coincidences[label] = coincidences.get(label, 0) + c
    if cfg.mode == "post-selected":
        acceptance = dist.acceptance
    else:
        acceptance = dist.probability((), (), cfg.detector)
    return RunReport(
        probe_ids=ids,
        n_runs=int(cfg.n_runs),
        n_accepted=accepted,
        clicks=clicks,
        coincidences=dict(sorted(coincidences.items())),
        patterns=dict(sorted(patterns.items())),
        expected=expected_counts(cfg, dist),
        acceptance_probability=float(acceptance),
        seed=int(cfg.seed),
        mode=cfg.mode,
        detector=cfg.detector,
        shards=cfg.shards,
    )


def merge_reports(reports) -> RunReport:
    """Combine reports of disjoint campaigns over the same configuration."""
    reports = list(reports)
    first = reports[0]
    for r in reports[1:]:
        if (r.probe_ids, r.mode, r.detector) != (first.probe_ids, first.mode, first.detector):
            raise ValueError("cannot merge reports of different configurations")

    def add(dicts):
        out: dict = {}
        for d in dicts:
            for k, v in d.items():
                out[k] = out.get(k, 0) + v
        return dict(sorted(out.items()))

    expected = {}
    for pid in first.probe_ids:
        expected[pid] = (math.fsum(r.expected[pid][0] for r in reports),
                         math.fsum(r.expected[pid][1] for r in reports))
    return RunReport(
        probe_ids=first.probe_ids,
        n_runs=sum(r.n_runs for r in reports),
        n_accepted=sum(r.n_accepted for r in reports),
        clicks={pid: sum(r.clicks[pid] for r in reports) for pid in first.probe_ids},
        coincidences=add(r.coincidences for r in reports),
        patterns=add(r.patterns for r in reports),
        expected=expected,
        acceptance_probability=first.acceptance_probability,
        seed=first.seed,
        mode=first.mode,
        detector=first.detector,
        shards=sum(r.shards for r in reports),
    )


def coincidence_violations(report: RunReport, probes: ProbeSet,
                           triggers=("D", "E"), partners=("B", "C")) -> int:
    """Accepted runs in which a trigger-path probe fired without any partner-path probe."""
    def on(paths):
        return [i for i, p in enumerate(probes) if set(p.paths) & set(paths)]

    trig, part = on(triggers), on(partners)
    bad = 0
    for key, c in report.patterns.items():
        bits = [int(ch) for ch in key]
        if any(bits[i] for i in trig) and not any(bits[i] for i in part):
            bad += c
    return bad
