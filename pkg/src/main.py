"""
MAES Laboratory CLI
Run with: python3 -m src.main <subcommand> --config configs/toy.json
"""

import argparse
import json
import logging
import sys

import pandas as pd

from .errors import MaesError
from .expcli import (
    ExperimentConfig,
    PointRunner,
    collect_artifacts,
    emit_reports,
    load_config,
    roster_predictions,
    run_ablations,
    run_delta_sweep,
    run_search,
    sweep_point_key,
)
from .expcli.ablations import GRIDS
from .expcli.checkpoints import atomic_write_text
from .expcli.pipeline import json_safe
from .metrics import stepwise_apr
from .settings import Settings, load_settings
from .utils import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

DEFAULT_CONFIG = "configs/toy.json"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=DEFAULT_CONFIG, help="experiment config (JSON)")
    common.add_argument("--output-dir", help="overrides MAES_OUTPUT_DIR and the config file")
    common.add_argument("--seed", type=int, help="run a single seed instead of the configured list")
    common.add_argument("--delta", type=float, help="run a single delta instead of the configured grid")
    common.add_argument("--parallelism", type=int, help="concurrent points (process pool)")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING, ...")

    parser = argparse.ArgumentParser(
        prog="python3 -m src.main",
        description="Mixture of attentive experts vs. ensemble baselines under temporal conditional shift",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("gen-data", parents=[common], help="generate and save datasets for every delta and seed")
    commands.add_parser("train", parents=[common], help="train pool, baselines and MAES for one point")
    commands.add_parser("evaluate", parents=[common], help="re-evaluate a trained point from its checkpoints")
    commands.add_parser("sweep-delta", parents=[common], help="full delta sweep with summary table")
    ablate = commands.add_parser("ablate", parents=[common], help="MAES ablation grids on validation data")
    ablate.add_argument("--grid", action="append", choices=GRIDS, help="restrict to these grids (repeatable)")
    commands.add_parser("search", parents=[common], help="random search over MAES dimensions")
    commands.add_parser("report", parents=[common], help="regenerate figure data from saved checkpoints")
    return parser


def resolve_config(args, settings: Settings) -> ExperimentConfig:
    """Config file, then environment, then command-line flags"""
    config = load_config(args.config)
    updates = {}
    if settings.output_dir:
        updates["output_dir"] = settings.output_dir
    if settings.parallelism:
        updates["parallelism"] = settings.parallelism
    if args.output_dir:
        updates["output_dir"] = args.output_dir
    if args.parallelism:
        updates["parallelism"] = args.parallelism
    if args.seed is not None:
        updates["seeds"] = [args.seed]
    if args.delta is not None:
        updates["deltas"] = [args.delta]
    return ExperimentConfig.model_validate({**config.model_dump(), **updates})


def print_reports(reports: dict) -> None:
    for name, report in reports.items():
        print(f"   {name:<18} mean_apr={report['mean_apr']:.4f} ± {report['std_apr']:.4f}")


def cmd_gen_data(config: ExperimentConfig, args) -> int:
    runner = PointRunner(config)
    for delta in config.deltas:
        for seed in config.seeds:
            key = f"data/delta={delta}/seed={seed}"
            dataset = runner.generate_data(key, delta, seed)
            print(f"✅ {key}: positive ratio train={dataset.positive_ratio('train'):.4f} "
                  f"test={dataset.positive_ratio('test'):.4f}")
    return EXIT_OK


def cmd_train(config: ExperimentConfig, args) -> int:
    delta, seed = config.deltas[0], config.seeds[0]
    key = sweep_point_key(delta, seed)
    print(f"🚀 Training {key}...")
    result = PointRunner(config).run(key, "sweep", delta, seed)
    if result["status"] != "ok":
        print(f"❌ {key} failed: {result['error']}")
        return EXIT_FAILED
    print_reports(result["models"])
    print(f"✅ Saved to {config.artifact_path(key)}")
    return EXIT_OK


def cmd_evaluate(config: ExperimentConfig, args) -> int:
    key = sweep_point_key(config.deltas[0], config.seeds[0])
    artifacts = collect_artifacts(config, key)
    X, Y = artifacts.dataset.arrays("test")
    reports = {name: stepwise_apr(preds, Y).model_dump() for name, preds in roster_predictions(artifacts, X).items()}
    atomic_write_text(
        config.artifact_path(key, "evaluation.json"),
        json.dumps(json_safe({"point": key, "models": reports, "provenance": config.provenance()}),
                   indent=2, sort_keys=True),
    )
    print(f"📊 {key}")
    print_reports(reports)
    return EXIT_OK


def cmd_sweep(config: ExperimentConfig, args) -> int:
    print(f"🚀 Sweeping {len(config.deltas)} deltas x {len(config.seeds)} seeds...")
    frame, failed = run_delta_sweep(config)
    pooled = frame[frame["seed"] == "pooled"] if len(config.seeds) > 1 else frame
    with pd.option_context("display.width", 120):
        print(pooled.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    return finish(failed, config.artifact_path("sweep", "summary.csv"))


def cmd_ablate(config: ExperimentConfig, args) -> int:
    print(f"🚀 Ablations at delta={config.ablation.delta}...")
    tables, failed = run_ablations(config, args.grid)
    for grid, frame in tables.items():
        print(f"\n📊 {grid}")
        print(frame.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    return finish(failed, config.artifact_path("ablation"))


def cmd_search(config: ExperimentConfig, args) -> int:
    frame, failed = run_search(config, seed=args.seed)
    print(frame.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    return finish(failed, config.artifact_path("search"))


def cmd_report(config: ExperimentConfig, args) -> int:
    failed = 0
    for delta in config.deltas:
        for seed in config.seeds:
            key = sweep_point_key(delta, seed)
            try:
                written = emit_reports(collect_artifacts(config, key))
                print(f"✅ {key}: {len(written)} files")
            except MaesError as error:
                print(f"❌ {key}: {error}")
                failed += 1
    return EXIT_FAILED if failed else EXIT_OK


def finish(failed: int, location) -> int:
    if failed:
        print(f"⚠️  {failed} point(s) failed; see result.json files under {location}")
        return EXIT_FAILED
    print(f"✅ Done! Results in {location}")
    return EXIT_OK


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "sweep-delta": cmd_sweep,
    "ablate": cmd_ablate,
    "search": cmd_search,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings()
    except ValueError as error:
        print(f"❌ Invalid environment settings: {error}")
        return EXIT_CONFIG
    setup_logging(args.log_level or settings.log_level)

    try:
        config = resolve_config(args, settings)
    except MaesError as error:
        print(f"❌ {error}")
        return EXIT_CONFIG
    except ValueError as error:
        print(f"❌ Invalid configuration: {error}")
        return EXIT_CONFIG

    try:
        return COMMANDS[args.command](config, args)
    except MaesError as error:
        logger.exception(f"[CLI] {args.command} failed")
        print(f"❌ {error}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
