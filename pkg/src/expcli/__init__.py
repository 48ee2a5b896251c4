"""
expcli - experiment configuration, persistence, sweeps, ablations, search and reports
"""

from .config import (
    BASELINES,
    ROSTER,
    SEARCH_GRID,
    AblationConfig,
    ExperimentConfig,
    MaesConfig,
    PoolConfig,
    SearchConfig,
    load_config,
    save_config,
)
from .checkpoints import (
    load_checkpoint,
    load_maes,
    load_pool,
    load_stacking,
    save_checkpoint,
    save_maes,
    save_pool,
    save_stacking,
)
from .reports import RunArtifacts, collect_artifacts, emit_reports, read_table, roster_predictions, write_table
from .pipeline import PointRunner, PointSpec, execute_points, sweep_point_key
from .sweep import run_delta_sweep, summary_frame
from .search import random_search, run_search
from .ablations import GRIDS, run_ablations

__all__ = [
    "BASELINES",
    "ROSTER",
    "SEARCH_GRID",
    "AblationConfig",
    "ExperimentConfig",
    "MaesConfig",
    "PoolConfig",
    "SearchConfig",
    "load_config",
    "save_config",
    "load_checkpoint",
    "load_maes",
    "load_pool",
    "load_stacking",
    "save_checkpoint",
    "save_maes",
    "save_pool",
    "save_stacking",
    "RunArtifacts",
    "collect_artifacts",
    "emit_reports",
    "read_table",
    "roster_predictions",
    "write_table",
    "PointRunner",
    "PointSpec",
    "execute_points",
    "sweep_point_key",
    "run_delta_sweep",
    "summary_frame",
    "random_search",
    "run_search",
    "GRIDS",
    "run_ablations",
]
