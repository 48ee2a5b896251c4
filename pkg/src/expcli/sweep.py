"""
Delta Sweep - every (delta, seed) point through the point graph, then one summary table
"""

import json
import logging

import numpy as np
import pandas as pd

from ..metrics import permutation_test
from .checkpoints import atomic_write_text
from .config import BASELINES, ExperimentConfig
from .pipeline import PointSpec, execute_points, sweep_point_key
from .reports import SUMMARY_FLOAT_FORMAT, write_table

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "model", "delta", "seed", "mean_apr", "std_apr", "std_across_seeds", "p_value_vs_best_baseline", "status",
]
POOLED = "pooled"


def per_step(report: dict) -> np.ndarray:
    return np.array([np.nan if v is None else v for v in report["per_step_apr"]], dtype=np.float64)


def pooled_rows(results: list[dict], config: ExperimentConfig) -> list[dict]:
    """Per model and delta: mean over seeds, std across seeds and a p-value on the concatenated step series"""
    rows = []
    for delta in config.deltas:
        finished = [r for r in results if r["delta"] == delta and r["status"] == "ok"]
        if not finished:
            continue
        models = [name for name in config.roster if all(name in r["models"] for r in finished)]
        series = {name: np.concatenate([per_step(r["models"][name]) for r in finished]) for name in models}
        means = {name: np.array([r["models"][name]["mean_apr"] for r in finished]) for name in models}

        baselines = [name for name in models if name in BASELINES]
        best = max(baselines, key=lambda name: means[name].mean()) if baselines else None
        for name in models:
            defined = series[name][np.isfinite(series[name])]
            p_value = np.nan
            if best is not None and name in ("maes", "maes_hard"):
                p_value = permutation_test(series[name], series[best], n_perm=config.n_perm, seed=0)
            rows.append({
                "model": name,
                "delta": delta,
                "seed": POOLED,
                "mean_apr": float(means[name].mean()),
                "std_apr": float(defined.std()) if defined.size else np.nan,
                "std_across_seeds": float(means[name].std()),
                "p_value_vs_best_baseline": p_value,
                "status": "ok",
            })
    return rows


def summary_frame(results: list[dict], config: ExperimentConfig) -> pd.DataFrame:
    rows = []
    for result in results:
        if result["status"] != "ok":
            rows.append({
                "model": "*", "delta": result["delta"], "seed": str(result["seed"]),
                "status": f"failed: {result.get('error', '')}",
            })
            continue
        for name in config.roster:
            report = result["models"].get(name)
            if report is None:
                continue
            rows.append({
                "model": name,
                "delta": result["delta"],
                "seed": str(result["seed"]),
                "mean_apr": report["mean_apr"],
                "std_apr": report["std_apr"],
                "std_across_seeds": np.nan,
                "p_value_vs_best_baseline": report["p_values"].get("vs_best_baseline", np.nan),
                "status": "ok",
            })
    if len(config.seeds) > 1:
        rows.extend(pooled_rows(results, config))

    frame = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
    order = {name: i for i, name in enumerate([*config.roster, "*"])}
    seed_order = {str(s): i for i, s in enumerate(config.seeds)}
    frame["_model"] = frame["model"].map(order)
    frame["_seed"] = frame["seed"].map(lambda s: seed_order.get(s, len(seed_order)))
    frame = frame.sort_values(["_model", "delta", "_seed"], kind="stable").drop(columns=["_model", "_seed"])
    return frame.reset_index(drop=True)


def run_delta_sweep(config: ExperimentConfig, parallelism: int | None = None) -> tuple[pd.DataFrame, int]:
    """Returns the summary table and the number of failed points"""
    points = [
        PointSpec(point_key=sweep_point_key(delta, seed), mode="sweep", delta=delta, seed=seed)
        for delta in config.deltas
        for seed in config.seeds
    ]
    logger.info(f"[SWEEP] {len(points)} points: deltas={config.deltas} seeds={config.seeds}")
    results = execute_points(config, points, parallelism)

    frame = summary_frame(results, config)
    provenance = config.provenance()
    write_table(frame, config.artifact_path("sweep", "summary.csv"), provenance, SUMMARY_FLOAT_FORMAT)
    records = "".join(json.dumps({**r, "provenance": provenance}, sort_keys=True) + "\n" for r in results)
    atomic_write_text(config.artifact_path("sweep", "summary.jsonl"), records)

    failed = sum(r["status"] != "ok" for r in results)
    if failed:
        logger.warning(f"[SWEEP] {failed}/{len(points)} points failed")
    return frame, failed
