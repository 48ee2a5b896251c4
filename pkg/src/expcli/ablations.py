"""
Ablations - MAES validation performance across training, scoring-function and expert-count grids
"""

import logging

import numpy as np
import pandas as pd

from ..errors import ConfigurationError
from ..gate import AttentionKind
from ..utils import derive_seed
from .config import ExperimentConfig
from .pipeline import PointSpec, execute_points
from .reports import SUMMARY_FLOAT_FORMAT, write_table
from .search import SEARCHED_DIMS, random_search

logger = logging.getLogger(__name__)

GRIDS = ("w_imp", "pretrain_epochs", "attention_kind", "n_experts")
ABLATION_SEARCH_KEY = 50_000


def grid_values(config: ExperimentConfig, grid: str) -> list:
    ablation = config.ablation
    if grid == "attention_kind":
        return [AttentionKind(k).value for k in ablation.attention_kinds]
    return list(getattr(ablation, grid))


def ablation_points(config: ExperimentConfig, grid: str) -> list[tuple[object, int, int, PointSpec]]:
    """(value, seed, sample, point) for every setting of one grid"""
    ablation = config.ablation
    jobs = []
    for value in grid_values(config, grid):
        for seed in config.seeds:
            if ablation.search_samples:
                kind = value if grid == "attention_kind" else config.maes.attention_kind
                samples = random_search(
                    {name: config.search.grid for name in SEARCHED_DIMS}, ablation.search_samples,
                    derive_seed(seed, ABLATION_SEARCH_KEY, GRIDS.index(grid)), kind,
                )
            else:
                samples = [{}]
            for index, sample in enumerate(samples):
                setting = {**sample, grid: value}
                point = PointSpec(
                    point_key=f"ablation/{grid}={value}/seed={seed}/sample={index}",
                    mode="ablation", delta=ablation.delta, seed=seed, setting=setting,
                )
                jobs.append((value, seed, index, point))
    return jobs


def ablation_frame(grid: str, jobs: list, results: list[dict], seeds: list[int]) -> pd.DataFrame:
    """Best validation APR over search samples per (setting, seed), plus pooled rows per setting"""
    best: dict[tuple, dict] = {}
    failures: dict[tuple, str] = {}
    for (value, seed, _, _), result in zip(jobs, results):
        key = (value, seed)
        if result["status"] != "ok":
            failures[key] = result.get("error", "")
            continue
        report = result["models"]["maes"]
        if key not in best or report["mean_apr"] > best[key]["mean_apr"]:
            best[key] = report

    rows = []
    values = list(dict.fromkeys(job[0] for job in jobs))
    for value in values:
        means = []
        for seed in seeds:
            key = (value, seed)
            if key in best:
                means.append(best[key]["mean_apr"])
                rows.append({
                    "setting": value, "seed": str(seed), "val_mean_apr": best[key]["mean_apr"],
                    "val_std_apr": best[key]["std_apr"], "std_across_seeds": np.nan, "status": "ok",
                })
            else:
                rows.append({"setting": value, "seed": str(seed), "status": f"failed: {failures.get(key, '')}"})
        if len(seeds) > 1 and means:
            rows.append({
                "setting": value, "seed": "pooled", "val_mean_apr": float(np.mean(means)),
                "val_std_apr": float(np.mean([best[(value, s)]["std_apr"] for s in seeds if (value, s) in best])),
                "std_across_seeds": float(np.std(means)), "status": "ok",
            })
    columns = ["setting", "seed", "val_mean_apr", "val_std_apr", "std_across_seeds", "status"]
    return pd.DataFrame(rows, columns=columns).rename(columns={"setting": grid})


def run_ablations(config: ExperimentConfig, grids: list[str] | None = None,
                  parallelism: int | None = None) -> tuple[dict[str, pd.DataFrame], int]:
    """One table per grid; returns the tables and the number of failed points"""
    grids = list(grids or GRIDS)
    unknown = [g for g in grids if g not in GRIDS]
    if unknown:
        raise ConfigurationError(f"unknown ablation grids {unknown}; available: {', '.join(GRIDS)}")
    tables, failed = {}, 0
    provenance = config.provenance()
    for grid in grids:
        jobs = ablation_points(config, grid)
        logger.info(f"[ABLATION] {grid}: {len(jobs)} points at delta={config.ablation.delta}")
        results = execute_points(config, [job[3] for job in jobs], parallelism)
        failed += sum(r["status"] != "ok" for r in results)
        frame = ablation_frame(grid, jobs, results, config.seeds)
        write_table(frame, config.artifact_path("ablation", f"{grid}.csv"), provenance, SUMMARY_FLOAT_FORMAT)
        tables[grid] = frame
    return tables, failed
