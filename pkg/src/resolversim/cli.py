"""Command-line entry point: gen-basis, run, sweep, metrics."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .basis import DEFAULT_SAMPLES_PER_REV, generate_synthetic_basis, save_basis
from .config import ScenarioConfig
from .errors import ResolverSimError
from .pipeline import recompute_metrics, run_scenario
from .sweep import SweepSpec, run_sweep

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARTIAL = 2


def _load_config(args) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    overrides = list(args.override or [])
    if getattr(args, "allow_low_fs", False):
        overrides.append("timebase.allow_low_fs=true")
    return cfg.with_overrides(overrides)


def cmd_gen_basis(args) -> int:
    cfg = _load_config(args)
    samples = args.samples_per_rev or cfg.values["basis.samples_per_rev"]
    basis = generate_synthetic_basis(cfg.geometry(), samples)
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    save_basis(basis, out)
    print(f"wrote {out} (N = {basis.n_exc}, K = {basis.samples_per_rev})")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load_config(args)
    result = run_scenario(cfg, args.out)
    m = result.metrics
    print(f"{result.scenario_id}: aape_deg = {m.aape:.6g}, mpe_deg = {m.mpe:.6g}")
    for name, path in result.paths.items():
        print(f"  {name}: {path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec.load(args.config)
    if args.override:
        spec.base = spec.base.with_overrides(args.override)
    if args.allow_low_fs:
        spec.base = spec.base.with_overrides(["timebase.allow_low_fs=true"])
    manifest, rows = run_sweep(spec, args.out, args.workers)
    failed = [r for r in rows if r["status"] != "ok"]
    print(f"{len(rows) - len(failed)}/{len(rows)} scenarios ok; manifest: {manifest}")
    for r in failed:
        print(f"  {r['scenario_id']}: {r['error']}", file=sys.stderr)
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_metrics(args) -> int:
    cfg = _load_config(args) if (args.config or args.override) else None
    metrics, _ = recompute_metrics(args.wave, cfg)
    lines = (
        f"aape_deg = {metrics.aape!r}\n"
        f"mpe_deg = {metrics.mpe!r}\n"
        f"n_samples = {metrics.n_samples}\n"
        f"n_excluded = {metrics.n_excluded}\n"
    )
    if args.out:
        Path(args.out).write_text(lines)
    sys.stdout.write(lines)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="resolversim", description="Resolver fault simulation and dataset generation")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_help="scenario config file"):
        p.add_argument("--config", help=config_help)
        p.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--allow-low-fs", action="store_true",
                       help="downgrade the f_s >= 16*f_e check to a warning")

    p = sub.add_parser("gen-basis", help="generate a synthetic basis file")
    common(p)
    p.add_argument("--out", required=True, help="basis file to write")
    p.add_argument("--samples-per-rev", type=int, default=None,
                   help=f"angle samples per revolution (default from config, {DEFAULT_SAMPLES_PER_REV})")
    p.set_defaults(func=cmd_gen_basis)

    p = sub.add_parser("run", help="run one scenario")
    common(p)
    p.add_argument("--out", default=None, help="output root (default: output.dir from the config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a parameter sweep and write a manifest")
    common(p, "sweep file")
    p.add_argument("--out", required=True, help="dataset output directory")
    p.add_argument("--workers", type=int, default=None, help="parallel worker processes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("metrics", help="recompute metrics from a wave CSV")
    common(p)
    p.add_argument("--wave", required=True, help="wave.csv written by a run")
    p.add_argument("--out", default=None, help="optional file for the metrics lines")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResolverSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
