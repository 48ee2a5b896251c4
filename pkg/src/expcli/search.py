"""
Random Search - uniform draws of MAES dimensions from a discrete grid
"""

import logging

import numpy as np
import pandas as pd

from ..errors import ConfigurationError
from ..gate import AttentionKind
from ..utils import derive_seed
from .config import SEARCH_GRID, ExperimentConfig
from .pipeline import PointSpec, execute_points
from .reports import SUMMARY_FLOAT_FORMAT, write_table

logger = logging.getLogger(__name__)

SEARCHED_DIMS = ("context_hidden_dim", "attention_dim", "encoding_dim")
MAX_DOT_ATTEMPTS = 100_000
SEARCH_KEY = 40_000


def random_search(ranges: dict[str, list[int]] | None, n_samples: int, seed: int,
                  attention_kind: AttentionKind | str = AttentionKind.ADDITIVE) -> list[dict]:
    """n_samples configurations, each dimension drawn uniformly from its grid.

    Dot attention needs encoding_dim == context_hidden_dim; draws that break it
    are rejected and redrawn.
    """
    kind = AttentionKind(attention_kind)
    ranges = ranges or {name: SEARCH_GRID for name in SEARCHED_DIMS}
    if any(not values for values in ranges.values()):
        raise ConfigurationError("every searched dimension needs at least one value")
    rng = np.random.default_rng(seed)

    samples = []
    for _ in range(n_samples):
        for _attempt in range(MAX_DOT_ATTEMPTS):
            sample = {name: int(rng.choice(values)) for name, values in ranges.items()}
            if kind is not AttentionKind.DOT or sample.get("encoding_dim") == sample.get("context_hidden_dim"):
                break
        else:
            raise ConfigurationError("could not draw encoding_dim == context_hidden_dim for dot attention")
        samples.append({**sample, "attention_kind": kind.value})
    return samples


def run_search(config: ExperimentConfig, seed: int | None = None,
               parallelism: int | None = None) -> tuple[pd.DataFrame, int]:
    """Write the sampled table; with search.evaluate, also score each sample on validation data"""
    search = config.search
    seed = config.seeds[0] if seed is None else seed
    samples = random_search(
        {name: search.grid for name in SEARCHED_DIMS}, search.n_samples, derive_seed(seed, SEARCH_KEY),
        search.attention_kind,
    )
    frame = pd.DataFrame(samples)
    frame.insert(0, "sample", range(len(samples)))
    provenance = config.provenance()
    write_table(frame, config.artifact_path("search", "samples.csv"), provenance)
    logger.info(f"[SEARCH] sampled {len(samples)} configurations")
    if not search.evaluate:
        return frame, 0

    jobs = [(i, s) for i in range(len(samples)) for s in config.seeds]
    points = [
        PointSpec(
            point_key=f"search/sample={i}/seed={s}", mode="ablation",
            delta=config.ablation.delta, seed=s, setting=samples[i],
        )
        for i, s in jobs
    ]
    results = execute_points(config, points, parallelism)

    rows = []
    for (index, seed_value), point, result in zip(jobs, points, results):
        ok = result["status"] == "ok"
        report = result["models"]["maes"] if ok else {}
        rows.append({
            "sample": index,
            "seed": seed_value,
            **{name: point.setting[name] for name in SEARCHED_DIMS},
            "val_mean_apr": report.get("mean_apr", np.nan),
            "val_std_apr": report.get("std_apr", np.nan),
            "status": "ok" if ok else f"failed: {result.get('error', '')}",
        })
    results_frame = pd.DataFrame(rows)
    write_table(results_frame, config.artifact_path("search", "results.csv"), provenance, SUMMARY_FLOAT_FORMAT)
    failed = sum(r["status"] != "ok" for r in results)
    return results_frame, failed
