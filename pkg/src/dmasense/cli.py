"""Command-line entry point.

Subcommands: synth-model, diversity-map, rank-study, sweep-single,
dual-scenario.  Each takes --config (JSON experiment config) and --out
(output directory); --seed overrides the config's master seed (for
synth-model it overrides the model seed, the only one that command uses).
"""

from __future__ import annotations

import argparse
from pathlib import Path

from . import harness


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, type=Path, help="experiment config JSON file")
    sub.add_argument("--out", required=True, type=Path, help="output directory")
    sub.add_argument("--seed", type=int, default=None, help="override the config seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmasense",
        description="Metasurface-antenna direction and polarization estimation toolkit",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("synth-model", "synthesize a random network model and write it as JSON"),
        ("diversity-map", "per-direction field standard deviation over random configurations"),
        ("rank-study", "optimized effective rank against the random-sequence baseline"),
        ("sweep-single", "single-source error sweep over K, SNR and sequences"),
        ("dual-scenario", "jammer plus weaker transmitter estimation scenario"),
    ):
        _add_common(commands.add_parser(name, help=text))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = harness.load_config(args.config)
    if args.seed is not None:
        if args.command == "synth-model":
            cfg.model.seed = args.seed
        else:
            cfg.seed = args.seed
    out = Path(args.out)
    if args.command == "synth-model":
        harness.run_synth_model(cfg, out)
    elif args.command == "diversity-map":
        harness.run_diversity_map(cfg, out)
    elif args.command == "rank-study":
        harness.run_rank_study(cfg, out)
    elif args.command == "sweep-single":
        harness.run_single_source_sweep(cfg, out)
    elif args.command == "dual-scenario":
        harness.run_dual_source_scenario(cfg, out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
