"""
Dataset persistence - one JSONL file per split plus the generating weights
Layout and field names are documented in docs/FORMATS.md.
"""

import json
import logging
import os
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from .shift import Dataset, SequenceInstance, ShiftConfig, ShiftWeights

logger = logging.getLogger(__name__)

SPLITS = ("train", "validation", "test")
FORMAT_VERSION = 1


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def save_dataset(dataset: Dataset, directory: str | Path, provenance: dict | None = None) -> Path:
    """Write <split>.jsonl (header line + one record per sequence) and shift_weights.json"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    for split in SPLITS:
        header = {
            "header": {
                "format_version": FORMAT_VERSION,
                "split": split,
                "n_classes": dataset.n_classes,
                "threshold": dataset.thresholds.get(split),
                "shift_config": dataset.config.model_dump(),
                "provenance": provenance or {},
            }
        }
        lines = [json.dumps(header, sort_keys=True)]
        for instance in dataset.split(split):
            record = {
                "x": instance.x.reshape(-1).tolist(),
                "y": instance.y.astype(int).tolist(),
                "static": instance.static.tolist(),
            }
            lines.append(json.dumps(record))
        _atomic_write(directory / f"{split}.jsonl", "\n".join(lines) + "\n")

    weights = {
        "w_l": dataset.weights.w_l.tolist(),
        "w_d": dataset.weights.w_d.tolist(),
        "provenance": provenance or {},
    }
    _atomic_write(directory / "shift_weights.json", json.dumps(weights, sort_keys=True))

    logger.info(f"[DATAGEN] Saved dataset to {directory}")
    return directory


def load_dataset(directory: str | Path) -> Dataset:
    """Inverse of save_dataset"""
    directory = Path(directory)
    if not (directory / "train.jsonl").exists():
        raise ConfigurationError(f"no dataset found in {directory}")

    config = None
    thresholds = {}
    splits = {}
    for split in SPLITS:
        with open(directory / f"{split}.jsonl", encoding="utf-8") as handle:
            header = json.loads(handle.readline())["header"]
            config = ShiftConfig.model_validate(header["shift_config"])
            if header["threshold"] is not None:
                thresholds[split] = header["threshold"]
            instances = []
            for line in handle:
                if not line.strip():
                    continue
                record = json.loads(line)
                instances.append(SequenceInstance(
                    x=np.asarray(record["x"], dtype=np.float64).reshape(config.T, config.d),
                    y=np.asarray(record["y"], dtype=np.int8),
                    static=np.asarray(record["static"], dtype=np.float64),
                ))
            splits[split] = instances

    raw_weights = json.loads((directory / "shift_weights.json").read_text(encoding="utf-8"))
    weights = ShiftWeights(w_l=np.asarray(raw_weights["w_l"]), w_d=np.asarray(raw_weights["w_d"]))

    return Dataset(
        train=splits["train"],
        validation=splits["validation"],
        test=splits["test"],
        config=config,
        weights=weights,
        thresholds=thresholds,
    )
