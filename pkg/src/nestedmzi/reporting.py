"""Serialization of reports: counts CSV, JSON documents and text tables.

All writers are byte-stable for identical inputs: keys are sorted and floats
use ``repr`` so that repeated runs with one seed give identical files.
"""

from __future__ import annotations

import io
import json
import math
from pathlib import Path

import numpy as np

from .analysis import (
    Table,
    conditional_probe_state,
    conditional_state,
    pattern_distribution,
    ready_density,
)
from .montecarlo import RunReport
from .probes import POINTER, ProbeSet, gaussian_pointer_state
from .statevec import bures_angle, partial_trace_probe

SCHEMA_VERSION = 1
CSV_HEADER = ("probe", "expected", "observed", "sigma")


def _num(x) -> str:
    return repr(float(x))


def counts_csv(report: RunReport) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    for pid in report.probe_ids:
        mean, var = report.expected[pid]
        buf.write(f"{pid},{_num(mean)},{report.clicks[pid]},{_num(math.sqrt(var))}\n")
    return buf.getvalue()


def report_document(report: RunReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "mode": report.mode,
        "detector": report.detector,
        "n_runs": report.n_runs,
        "n_accepted": report.n_accepted,
        "acceptance_probability": report.acceptance_probability,
        "seed": report.seed,
        "generator": report.generator,
        "shards": report.shards,
        "probes": list(report.probe_ids),
        "clicks": report.clicks,
        "expected": {pid: {"mean": m, "variance": v} for pid, (m, v) in report.expected.items()},
        "coincidences": report.coincidences,
        "patterns": report.patterns,
        "config": report.config,
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_counts(report: RunReport, out_dir, formats=("csv", "json")) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        path = out / "counts.csv"
        path.write_text(counts_csv(report))
        written.append(path)
    if "json" in formats:
        path = out / "coincidences.json"
        path.write_text(dumps(report_document(report)))
        written.append(path)
    return written


def counts_table(report: RunReport) -> str:
    lines = [f"{report.n_accepted} runs accepted at {report.detector} "
             f"({report.mode}, seed {report.seed})",
             f"{'probe':>8} {'expected':>12} {'observed':>9} {'sigma':>9}"]
    for pid in report.probe_ids:
        mean, var = report.expected[pid]
        lines.append(f"{pid:>8} {mean:12.4f} {report.clicks[pid]:9d} {math.sqrt(var):9.3f}")
    if report.coincidences:
        lines.append("coincidences:")
        for label, c in report.coincidences.items():
            lines.append(f"{label:>16} {c:9d}")
    else:
        lines.append("coincidences: none")
    return "\n".join(lines)


def _complex_pair(z) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def simulate_document(spec, probes: ProbeSet, detector: str = "DET1",
                      engine: str = "statevec") -> dict:
    """Acceptance, conditional probe states and their Bures angles from the ready state."""
    cond = None
    if engine == "oracle":
        acceptance = pattern_distribution(spec, probes, detector, engine).acceptance
    else:
        cond, acceptance = conditional_state(spec, probes, detector)
    entries = []
    for i, p in enumerate(probes):
        entry = {"id": p.id, "model": p.model, "paths": list(p.paths)}
        if p.model == POINTER:
            ptr = gaussian_pointer_state(cond, probes, i)
            entry["shift"] = p.shift
            entry["width"] = p.width
            entry["mean_position"] = ptr.mean()
            entry["bures_angle"] = bures_angle(ptr.density_matrix(), ready_density(probes, i))
        else:
            entry["epsilon"] = p.epsilon
            if cond is None:
                rho = conditional_probe_state(spec, probes, i, detector, engine)
            else:
                rho = partial_trace_probe(cond, i)
            entry["density_matrix"] = [[_complex_pair(z) for z in row] for row in rho.entries]
            entry["purity"] = rho.purity()
            if rho.is_pure(1e-10):
                entry["amplitudes"] = [_complex_pair(z) for z in rho.dominant_vector()]
            entry["bures_angle"] = bures_angle(rho, ready_density(probes, i))
        entries.append(entry)
    return {
        "schema_version": SCHEMA_VERSION,
        "interferometer": spec.name,
        "inner_phase": spec.inner_phase,
        "detector": detector,
        "engine": engine,
        "acceptance": acceptance,
        "probes": entries,
    }


def table_csv(table: Table) -> str:
    buf = io.StringIO()
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_num(x) for x in row) + "\n")
    return buf.getvalue()
