"""
Checkpoints - named-tensor archives with a JSON header, and the pool manifest
"""

import json
import logging
import os
from pathlib import Path

import numpy as np

from ..baselines import ModelPool, PoolMember, StackingWeights
from ..errors import ConfigurationError
from ..maes import EnsembleSpec, EpochRecord, MaesModel, TrainConfig, TrainedMaes, TrainingHistory
from ..seqmodels import ExpertSpec, LstmExpert

logger = logging.getLogger(__name__)

HEADER_KEY = "__header__"
VAL_PREDICTIONS_KEY = "__val_predictions__"


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def save_checkpoint(path: str | Path, arrays: dict[str, np.ndarray], header: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as handle:
        np.savez(handle, **{HEADER_KEY: np.array(json.dumps(header, sort_keys=True))}, **arrays)
    os.replace(tmp, path)
    return path


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"checkpoint {path} not found")
    with np.load(path, allow_pickle=False) as archive:
        header = json.loads(str(archive[HEADER_KEY][()]))
        arrays = {name: archive[name] for name in archive.files if name != HEADER_KEY}
    return arrays, header


def _params_only(arrays: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {name: values for name, values in arrays.items() if not name.startswith("__")}


# Pool

def save_pool(pool: ModelPool, directory: str | Path, provenance: dict | None = None) -> Path:
    """member_<i>.npz per LSTM plus pool.json listing specs, seeds and per-step validation losses"""
    directory = Path(directory)
    entries = []
    for index, member in enumerate(pool.members):
        filename = f"member_{index}.npz"
        arrays = member.expert.params.to_arrays()
        if member.val_predictions is not None:
            arrays[VAL_PREDICTIONS_KEY] = member.val_predictions
        header = {
            "expert_spec": member.spec.model_dump(mode="json"),
            "seed": member.seed,
            "input_dim": member.expert.input_dim,
            "provenance": provenance or {},
        }
        save_checkpoint(directory / filename, arrays, header)
        atomic_write_text(directory / f"member_{index}.history.jsonl", member.history.to_jsonl(provenance))
        entries.append({
            "file": filename,
            "expert_spec": member.spec.model_dump(mode="json"),
            "seed": member.seed,
            "val_apr": None if np.isnan(member.val_apr) else member.val_apr,
            "val_step_losses": member.val_step_losses.tolist(),
        })

    manifest = {"members": entries, "provenance": provenance or {}}
    atomic_write_text(directory / "pool.json", json.dumps(manifest, indent=2, sort_keys=True))
    logger.info(f"[POOL] Saved {len(entries)} members to {directory}")
    return directory


def load_pool(directory: str | Path) -> ModelPool:
    directory = Path(directory)
    manifest_path = directory / "pool.json"
    if not manifest_path.exists():
        raise ConfigurationError(f"no pool manifest in {directory}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))

    members = []
    for entry in manifest["members"]:
        arrays, header = load_checkpoint(directory / entry["file"])
        spec = ExpertSpec.model_validate(header["expert_spec"])
        expert = LstmExpert(spec, input_dim=header["input_dim"], seed=header["seed"])
        expert.params.load_arrays(_params_only(arrays))
        history_path = directory / entry["file"].replace(".npz", ".history.jsonl")
        members.append(PoolMember(
            spec=spec,
            seed=header["seed"],
            val_step_losses=np.asarray(entry["val_step_losses"], dtype=np.float64),
            val_predictions=arrays.get(VAL_PREDICTIONS_KEY),
            val_apr=float("nan") if entry["val_apr"] is None else entry["val_apr"],
            expert=expert,
            history=load_history(history_path),
        ))
    return ModelPool(members=members)


# MAES

def load_history(path: Path) -> TrainingHistory:
    """Epoch records plus the provenance from the header line"""
    if not path.exists():
        return TrainingHistory()
    history = TrainingHistory()
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        entry = json.loads(line)
        if "header" in entry:
            history.provenance = entry["header"].get("provenance")
        else:
            history.records.append(EpochRecord.model_validate(entry))
    return history


def save_maes(trained: TrainedMaes, path: str | Path, provenance: dict | None = None) -> Path:
    """Archive of every named tensor; the header holds EnsembleSpec, TrainConfig and seed"""
    path = Path(path)
    model = trained.model
    header = {
        "ensemble_spec": model.spec.model_dump(mode="json"),
        "train_config": trained.config.model_dump(mode="json"),
        "seed": model.seed,
        "input_dim": model.input_dim,
        "best_epoch": trained.history.best_epoch,
        "provenance": provenance or {},
    }
    save_checkpoint(path, model.params.to_arrays(), header)
    atomic_write_text(path.with_suffix(".history.jsonl"), trained.history.to_jsonl(provenance))
    return path


def load_maes(path: str | Path) -> TrainedMaes:
    path = Path(path)
    arrays, header = load_checkpoint(path)
    spec = EnsembleSpec.model_validate(header["ensemble_spec"])
    config = TrainConfig.model_validate(header["train_config"])
    model = MaesModel(spec, input_dim=header["input_dim"], seed=header["seed"])
    model.params.load_arrays(_params_only(arrays))
    history = load_history(path.with_suffix(".history.jsonl"))
    history.best_epoch = header.get("best_epoch")
    return TrainedMaes(model=model, config=config, history=history)


# Stacking

def save_stacking(weights: dict[str, StackingWeights], path: str | Path, provenance: dict | None = None) -> Path:
    arrays, entries = {}, {}
    for name, w in weights.items():
        arrays[f"{name}.weights"] = w.weights
        if w.bias is not None:
            arrays[f"{name}.bias"] = np.asarray(w.bias)
        entries[name] = {"mode": w.mode, "parametrization": w.parametrization}
    return save_checkpoint(path, arrays, {"stacking": entries, "provenance": provenance or {}})


def load_stacking(path: str | Path) -> dict[str, StackingWeights]:
    arrays, header = load_checkpoint(path)
    return {
        name: StackingWeights(
            mode=entry["mode"],
            parametrization=entry["parametrization"],
            weights=arrays[f"{name}.weights"],
            bias=arrays.get(f"{name}.bias"),
        )
        for name, entry in header["stacking"].items()
    }
