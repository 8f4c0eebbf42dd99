"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import claims as _claims
from .analysis import ENGINES, Quantity, epsilon_sweep, loglog_slope, phase_sweep
from .config import FORMATS, ConfigError, load_config
from .montecarlo import CampaignConfig, run_campaign
from .probes import QUBIT_LOCAL
from .reporting import (
    counts_table,
    dumps,
    simulate_document,
    table_csv,
    write_counts,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _grid(text: str, axis: str) -> np.ndarray:
    """``start:stop:num`` (linear for phase, logarithmic for epsilon) or a comma list."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            start, stop, num = float(start), float(stop), int(num)
            if num < 1:
                raise ValueError
            if axis == "epsilon":
                if start <= 0 or stop <= 0:
                    raise ValueError
                return np.logspace(np.log10(start), np.log10(stop), num)
            return np.linspace(start, stop, num)
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise ConfigError(f"bad --grid {text!r}; use start:stop:num or a comma list",
                          source="--grid") from None


def _out_dir(args, cfg):
    return args.out or (cfg.output.get("directory") if cfg else None)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    doc = simulate_document(cfg.spec, cfg.probes, args.detector, args.engine)
    text = dumps(doc)
    out = _out_dir(args, cfg)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / "simulate.json").write_text(text)
    if not args.quiet:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_counts(args) -> int:
    cfg = load_config(args.config)
    camp = dict(cfg.campaign)
    if args.seed is not None:
        camp["seed"] = args.seed
    try:
        campaign = CampaignConfig(cfg.spec, cfg.probes, camp.get("n_runs", 10**7),
                                  camp.get("seed", 0), camp.get("detector", "DET1"),
                                  camp.get("mode", "post-selected"), camp.get("shards", 1),
                                  args.engine)
    except ValueError as exc:
        raise ConfigError(str(exc), source=str(args.config)) from None
    report = run_campaign(campaign)
    report.config = {"interferometer": cfg.spec.name, "inner_phase": cfg.spec.inner_phase,
                     "probes": {p.id: {"model": p.model, "paths": list(p.paths),
                                       "epsilon": p.epsilon} for p in cfg.probes},
                     "engine": args.engine}
    formats = [args.format] if args.format else cfg.output.get("formats", list(FORMATS))
    out = _out_dir(args, cfg)
    if out:
        write_counts(report, out, formats)
    if not args.quiet:
        print(counts_table(report))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    grid = _grid(args.grid, args.sweep) if args.grid else None
    if args.sweep == "phase":
        grid = np.linspace(0, 2 * np.pi, 9) if grid is None else grid
        if args.quantity:
            quantities = [Quantity.parse(q) for q in args.quantity]
        else:
            quantities = _default_quantities(cfg.probes)
        table = phase_sweep(cfg.spec, cfg.probes, quantities, grid, args.engine)
    else:
        grid = np.logspace(-6, -2, 9) if grid is None else grid
        table = epsilon_sweep(cfg.spec, cfg.probes, grid, args.detector, args.engine)
    text = table_csv(table)
    out = _out_dir(args, cfg)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / f"sweep_{args.sweep}.csv").write_text(text)
    if not args.quiet:
        sys.stdout.write(text)
        if args.sweep == "epsilon":
            x = table.column("sqrt_epsilon")
            slopes = ", ".join(f"{pid}={loglog_slope(x, table.column(pid)):.4f}"
                               for pid in cfg.probes.ids)
            print(f"# log-log slope vs sqrt(epsilon): {slopes}", file=sys.stderr)
    return EXIT_OK


def _default_quantities(probes) -> list:
    """P(DET1), every single-click pattern, and every pairwise coincidence."""
    ids = [p.id for p in probes if p.model != "pointer-gaussian"]
    qs = [Quantity()]
    qs += [Quantity((i,), exclusive=True) for i in ids]
    qs += [Quantity((a, b)) for n, a in enumerate(ids) for b in ids[n + 1:]]
    return qs


def cmd_verify(args) -> int:
    selected = _claims.CLAIMS
    if args.only:
        wanted = set(args.only.split(","))
        selected = tuple(c for c in selected if c.id in wanted)
    if args.list:
        for c in selected:
            print(f"{c.id}\t{c.title}")
        return EXIT_OK
    ctx = _claims.Context()
    if args.config:
        ctx.spec = load_config(args.config).spec
    if args.seed is not None:
        ctx.seed = args.seed
    failed = 0
    t0 = time.perf_counter()
    for c in selected:
        result = _claims.run_claim(c, ctx)
        failed += not result.passed
        print(_claims.format_line(c, result), flush=True)
    print(f"{len(selected) - failed}/{len(selected)} claims passed "
          f"in {time.perf_counter() - t0:.1f} s")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nestedmzi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, type=Path, help="TOML config")
        p.add_argument("--engine", choices=ENGINES, default="statevec")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--quiet", action="store_true", help="no standard output")

    p = sub.add_parser("simulate", help="conditional probe states and Bures angles")
    common(p)
    p.add_argument("--detector", default="DET1", choices=("DET1", "DET2"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("counts", help="sampled click counts and coincidences")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=FORMATS)
    p.set_defaults(func=cmd_counts)

    p = sub.add_parser("sweep", help="phase or coupling-strength sweep as CSV")
    common(p)
    p.add_argument("--sweep", required=True, choices=("phase", "epsilon"))
    p.add_argument("--grid", help="start:stop:num or comma list")
    p.add_argument("--quantity", action="append",
                   help="accept | clicks:ID,ID | only:ID, optional |cond (repeatable)")
    p.add_argument("--detector", default="DET1", choices=("DET1", "DET2"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run every acceptance claim")
    p.add_argument("--config", type=Path, help="take the interferometer from this config")
    p.add_argument("--seed", type=int)
    p.add_argument("--list", action="store_true", help="list claim ids without running")
    p.add_argument("--only", help="comma-separated claim ids")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
