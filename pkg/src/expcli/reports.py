"""
Reports - figure data as plain CSV files (attention weights, correlations, APR curves, traces)
Every file starts with a provenance comment line; read them with pandas.read_csv(comment="#").
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from ..baselines import (
    ModelPool,
    StackingWeights,
    average_predictions,
    combine_predictions,
    stepwise_select_predict,
)
from ..datagen import Dataset, load_dataset
from ..errors import ConfigurationError
from ..maes import TrainedMaes, maes_forward, maes_predict_hard
from ..metrics import envelope, prediction_correlation, stepwise_apr
from .checkpoints import atomic_write_text, load_maes, load_pool, load_stacking
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

SUMMARY_FLOAT_FORMAT = "%.6f"


def provenance_line(provenance: dict) -> str:
    seeds = ",".join(str(s) for s in provenance.get("seeds", []))
    return f"# config_hash={provenance.get('config_hash', '')} seeds={seeds}\n"


def write_table(frame: pd.DataFrame, path: str | Path, provenance: dict, float_format: str | None = None) -> Path:
    """CSV preceded by the provenance comment; ``float_format=None`` keeps full precision"""
    path = Path(path)
    text = provenance_line(provenance) + frame.to_csv(index=False, float_format=float_format, lineterminator="\n")
    atomic_write_text(path, text)
    return path


def read_table(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


@dataclass
class RunArtifacts:
    config: ExperimentConfig
    point_key: str
    delta: float
    seed: int
    dataset: Dataset
    pool: ModelPool
    maes: TrainedMaes
    stacking: dict[str, StackingWeights]
    selection: dict
    maes_subset: list[int]


def collect_artifacts(config: ExperimentConfig, point_key: str) -> RunArtifacts:
    """Reload a finished sweep point from its persisted files"""
    point_dir = config.artifact_path(point_key)
    result_path = point_dir / "result.json"
    if not result_path.exists():
        raise ConfigurationError(f"no finished run in {point_dir}")
    result = json.loads(result_path.read_text(encoding="utf-8"))
    if result.get("mode") != "sweep":
        raise ConfigurationError(f"{point_dir} is not a sweep point; reports need pool and baselines")

    return RunArtifacts(
        config=config,
        point_key=point_key,
        delta=result["delta"],
        seed=result["seed"],
        dataset=load_dataset(point_dir / "data"),
        pool=load_pool(point_dir / "pool"),
        maes=load_maes(point_dir / "maes.npz"),
        stacking=load_stacking(point_dir / "stacking.npz"),
        selection=result["selection"],
        maes_subset=result["maes_subset"],
    )


def _architecture_labels(dims: list[int]) -> list[str]:
    return [f"{i}:h={h}" for i, h in enumerate(dims)]


def _correlation_frame(predictions: np.ndarray, dims: list[int]) -> pd.DataFrame:
    report = prediction_correlation(predictions)
    labels = _architecture_labels(dims)
    frame = pd.DataFrame(report.matrix, columns=labels)
    frame.insert(0, "model", labels)
    return frame


def emit_reports(artifacts: RunArtifacts, directory: str | Path | None = None) -> list[Path]:
    """Attention weights, correlation matrices, per-step APR curves and a sample trace on the test split"""
    config = artifacts.config
    directory = Path(directory) if directory is not None else config.artifact_path(artifacts.point_key, "reports")
    provenance = {"config_hash": config.config_hash(), "seeds": [artifacts.seed]}
    X, Y = artifacts.dataset.arrays("test")
    N, T = Y.shape
    written = []

    ensemble, expert_preds, weights = maes_forward(artifacts.maes.model, X)
    M = expert_preds.shape[-1]

    # attention: one row per (n, t)
    n_index, t_index = np.meshgrid(np.arange(N), np.arange(T), indexing="ij")
    attention = pd.DataFrame({"n": n_index.reshape(-1), "t": t_index.reshape(-1)})
    flat_alpha = weights.alpha.reshape(-1, M)
    for m in range(M):
        attention[f"alpha_{m}"] = flat_alpha[:, m]
    written.append(write_table(attention, directory / "attention.csv", provenance))

    # correlations: MAES experts vs the pool restricted to the same architectures
    pool_preds = artifacts.pool.predict(X)
    maes_dims = [s.hidden_dim for s in artifacts.maes.model.spec.expert_specs]
    subset_preds = pool_preds[artifacts.maes_subset]
    written.append(write_table(
        _correlation_frame(np.moveaxis(expert_preds, -1, 0), maes_dims),
        directory / "correlation_maes.csv", provenance,
    ))
    written.append(write_table(
        _correlation_frame(subset_preds, maes_dims), directory / "correlation_pool.csv", provenance,
    ))

    # per-step APR curves for every model in the roster
    predictions = roster_predictions(artifacts, X, pool_preds, (ensemble, expert_preds, weights))
    curves = pd.DataFrame({"t": np.arange(T)})
    for name, preds in predictions.items():
        curves[name] = stepwise_apr(preds, Y).apr_array()
    written.append(write_table(curves, directory / "apr_curves.csv", provenance))

    # one sample sequence
    n = min(config.trace_sequence, N - 1)
    low, high = envelope(pool_preds[:, n, :])
    trace = pd.DataFrame({"t": np.arange(T), "label": Y[n].astype(int), "maes": ensemble[n]})
    for m in range(M):
        trace[f"expert_{m}"] = expert_preds[n, :, m]
    if "stacking_stepwise" in artifacts.stacking:
        trace["stacking_stepwise"] = combine_predictions(pool_preds, artifacts.stacking["stacking_stepwise"])[n]
    trace["pool_min"] = low
    trace["pool_max"] = high
    written.append(write_table(trace, directory / "trace.csv", provenance))

    logger.info(f"[REPORT] wrote {len(written)} files to {directory}")
    return written


def roster_predictions(artifacts: RunArtifacts, X: np.ndarray, pool_preds: np.ndarray | None = None,
                       maes_outputs=None) -> dict[str, np.ndarray]:
    """(N, T) test predictions of every roster model of a sweep point"""
    roster = artifacts.config.roster
    pool_preds = artifacts.pool.predict(X) if pool_preds is None else pool_preds
    ensemble = (maes_outputs or maes_forward(artifacts.maes.model, X))[0]

    available = {
        "best_single": lambda: pool_preds[artifacts.selection["best_single"]],
        "stepwise_select": lambda: stepwise_select_predict(artifacts.selection["stepwise"], pool_preds),
        "average": lambda: average_predictions(pool_preds),
        "stacking_global": lambda: combine_predictions(pool_preds, artifacts.stacking["stacking_global"]),
        "stacking_stepwise": lambda: combine_predictions(pool_preds, artifacts.stacking["stacking_stepwise"]),
        "maes": lambda: ensemble,
        "maes_hard": lambda: maes_predict_hard(artifacts.maes.model, X),
    }
    return {name: available[name]() for name in roster}
