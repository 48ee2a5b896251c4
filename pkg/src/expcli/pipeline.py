"""
Point Pipeline - builds and runs the experiment graph for one sweep point or ablation setting
"""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from langgraph.graph import StateGraph

from ..baselines import (
    ModelPool,
    best_single,
    fit_stacking,
    stepwise_select,
    train_pool,
)
from ..datagen import Dataset, generate_dataset, save_dataset
from ..edges import create_point_edges
from ..gate import AttentionKind
from ..maes import EnsembleSpec, TrainConfig, TrainedMaes, maes_forward, train_maes
from ..metrics import permutation_test, prediction_correlation, stepwise_apr
from ..nodes import (
    create_cache_check_node,
    create_evaluate_node,
    create_fit_baselines_node,
    create_generate_data_node,
    create_persist_node,
    create_train_maes_node,
    create_train_pool_node,
)
from ..seqmodels import sample_expert_specs
from ..states import PointState
from ..utils import derive_seed, setup_logging
from .checkpoints import atomic_write_text, save_maes, save_pool, save_stacking
from .config import BASELINES, ExperimentConfig
from .reports import RunArtifacts, emit_reports, roster_predictions

logger = logging.getLogger(__name__)

# Keys mixed into the point seed for each random stream
DATA_KEY = 1
POOL_SPECS_KEY = 2
POOL_TRAIN_KEY = 3
MAES_SUBSET_KEY = 4
MAES_SPECS_KEY = 5
MAES_TRAIN_KEY = 6
PERMUTATION_KEY = 7

MAES_OVERRIDES = ("n_experts", "context_hidden_dim", "encoding_dim", "attention_dim", "attention_kind")
TRAIN_OVERRIDES = ("w_imp", "pretrain_epochs")


def sweep_point_key(delta: float, seed: int) -> str:
    return f"sweep/delta={delta}/seed={seed}"


def json_safe(value):
    """NaN/inf become null so every record is strict JSON"""
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def choose_subset(pool_size: int, n: int, seed: int) -> list[int]:
    """n pool indices drawn without replacement while the pool is large enough"""
    rng = np.random.default_rng(seed)
    chosen = rng.choice(pool_size, size=n, replace=n > pool_size)
    return sorted(int(i) for i in chosen)


class PointRunner:
    """Everything one point needs, with the configuration bound once"""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.config_hash = config.config_hash()
        self.graph = self._create_graph()

    def _create_graph(self):
        graph_builder = StateGraph(PointState)

        graph_builder.add_node("cache_check", create_cache_check_node(self))
        graph_builder.add_node("generate_data", create_generate_data_node(self))
        graph_builder.add_node("train_pool", create_train_pool_node(self))
        graph_builder.add_node("fit_baselines", create_fit_baselines_node(self))
        graph_builder.add_node("train_maes", create_train_maes_node(self))
        graph_builder.add_node("evaluate", create_evaluate_node(self))
        graph_builder.add_node("persist", create_persist_node(self))

        graph_builder = create_point_edges(graph_builder)
        return graph_builder.compile()

    # Graph entry

    def run(self, point_key: str, mode: str, delta: float, seed: int, setting: dict | None = None) -> dict:
        """Invoke the graph; failures are recorded in the returned result instead of raised"""
        initial_state = {
            "point_key": point_key,
            "mode": mode,
            "delta": delta,
            "seed": seed,
            "setting": setting or {},
            "events": [],
        }
        try:
            final_state = self.graph.invoke(initial_state)
            return final_state["result"]
        except Exception as error:
            logger.exception(f"[SWEEP] {point_key} failed")
            result = {
                "point": point_key,
                "mode": mode,
                "delta": delta,
                "seed": seed,
                "setting": json_safe(setting or {}),
                "status": "failed",
                "error": f"{type(error).__name__}: {error}",
                "config_hash": self.config_hash,
            }
            atomic_write_text(
                self.config.artifact_path(point_key, "result.json"),
                json.dumps(result, indent=2, sort_keys=True),
            )
            return result

    # Node implementations

    def load_cached(self, point_key: str) -> dict | None:
        path = self.config.artifact_path(point_key, "result.json")
        if not path.exists():
            return None
        result = json.loads(path.read_text(encoding="utf-8"))
        if result.get("status") != "ok" or result.get("config_hash") != self.config_hash:
            return None
        return result

    def shift_config(self, delta: float, seed: int):
        data_seed = derive_seed(self.config.data.seed, seed, DATA_KEY)
        return self.config.data.model_copy(update={"delta": delta, "seed": data_seed})

    def generate_data(self, point_key: str, delta: float, seed: int) -> Dataset:
        dataset = generate_dataset(self.shift_config(delta, seed))
        save_dataset(dataset, self.config.artifact_path(point_key, "data"), self.config.provenance())
        return dataset

    def train_pool(self, dataset: Dataset, seed: int) -> ModelPool:
        pool_config = self.config.pool
        specs = sample_expert_specs(
            pool_config.size, pool_config.hidden_low, pool_config.hidden_high,
            seed=derive_seed(seed, POOL_SPECS_KEY), cell_variant=pool_config.cell_variant,
        )
        train_config = pool_config.train.model_copy(update={"seed": derive_seed(seed, POOL_TRAIN_KEY)})
        return train_pool(specs, dataset, train_config, parallelism=self.config.parallelism)

    def fit_baselines(self, pool: ModelPool, dataset: Dataset) -> tuple[dict, dict]:
        _, Y_val = dataset.arrays("validation")
        selection = {
            "best_single": best_single(pool),
            "stepwise": [int(i) for i in stepwise_select(pool)],
        }
        stacking = {
            f"stacking_{mode}": fit_stacking(pool, Y_val, self.config.stacking.model_copy(update={"mode": mode}))
            for mode in ("global", "stepwise")
        }
        return selection, stacking

    def ensemble_setup(self, seed: int, setting: dict, pool: ModelPool | None):
        """EnsembleSpec, TrainConfig and pool indices (None without a pool) for a point"""
        maes_config = self.config.maes.model_copy(
            update={k: setting[k] for k in MAES_OVERRIDES if k in setting}
        )
        kind = AttentionKind(maes_config.attention_kind)
        n = maes_config.n_experts

        if pool is not None:
            subset = choose_subset(len(pool), n, derive_seed(seed, MAES_SUBSET_KEY))
            expert_specs = [pool.members[i].spec for i in subset]
        else:
            subset = None
            expert_specs = sample_expert_specs(
                n, self.config.pool.hidden_low, self.config.pool.hidden_high,
                seed=derive_seed(seed, MAES_SPECS_KEY), cell_variant=self.config.pool.cell_variant,
            )

        encoding_dim = maes_config.context_hidden_dim if kind is AttentionKind.DOT else maes_config.encoding_dim
        spec = EnsembleSpec(
            expert_specs=expert_specs,
            context_hidden_dim=maes_config.context_hidden_dim,
            encoding_dim=encoding_dim,
            attention_kind=kind,
            attention_dim=maes_config.attention_dim,
        )
        train_config = TrainConfig.model_validate({
            **self.config.maes.train.model_dump(),
            **{k: setting[k] for k in TRAIN_OVERRIDES if k in setting},
            "seed": derive_seed(seed, MAES_TRAIN_KEY),
        })
        return spec, train_config, subset

    def train_maes(self, dataset: Dataset, seed: int, setting: dict,
                   pool: ModelPool | None) -> tuple[TrainedMaes, list[int] | None]:
        spec, train_config, subset = self.ensemble_setup(seed, setting, pool)
        return train_maes(spec, dataset, train_config), subset

    def evaluate(self, state) -> dict:
        mode = state["mode"]
        dataset = state["dataset"]
        result = {
            "point": state["point_key"],
            "mode": mode,
            "delta": state["delta"],
            "seed": state["seed"],
            "setting": json_safe(state.get("setting") or {}),
            "status": "ok",
            "config_hash": self.config_hash,
            "maes_best_epoch": state["maes"].history.best_epoch,
        }

        if mode == "ablation":
            X_val, Y_val = dataset.arrays("validation")
            report = stepwise_apr(maes_forward(state["maes"].model, X_val)[0], Y_val)
            result["models"] = {"maes": report.model_dump()}
            logger.info(f"[ABLATION] {state['point_key']}: val mean_apr={report.mean_apr:.4f}")
            return json_safe(result)

        X, Y = dataset.arrays("test")
        artifacts = self.artifacts(state)
        pool_preds = state["pool"].predict(X)
        maes_outputs = maes_forward(state["maes"].model, X)
        predictions = roster_predictions(artifacts, X, pool_preds, maes_outputs)
        reports = {name: stepwise_apr(preds, Y) for name, preds in predictions.items()}

        baselines = [name for name in reports if name in BASELINES]
        if baselines:
            best = max(baselines, key=lambda name: reports[name].mean_apr)
            for name in ("maes", "maes_hard"):
                if name not in reports:
                    continue
                report = reports[name]
                for other in baselines:
                    report.comparisons[f"vs_{other}"] = report.mean_apr - reports[other].mean_apr
                    report.p_values[f"vs_{other}"] = permutation_test(
                        report.apr_array(), reports[other].apr_array(),
                        n_perm=self.config.n_perm, seed=derive_seed(state["seed"], PERMUTATION_KEY),
                    )
                report.p_values["vs_best_baseline"] = report.p_values[f"vs_{best}"]
            result["best_baseline"] = best

        expert_preds = np.moveaxis(maes_outputs[1], -1, 0)
        subset_preds = pool_preds[state["maes_subset"]]
        result["correlation"] = {
            "maes_mean_off_diagonal": prediction_correlation(expert_preds).mean_off_diagonal(),
            "pool_mean_off_diagonal": prediction_correlation(subset_preds).mean_off_diagonal(),
        }
        result["selection"] = state["selection"]
        result["maes_subset"] = state["maes_subset"]
        result["models"] = {name: report.model_dump() for name, report in reports.items()}

        summary = ", ".join(f"{name}={r.mean_apr:.4f}" for name, r in reports.items())
        logger.info(f"[SWEEP] {state['point_key']}: {summary}")
        return json_safe(result)

    def artifacts(self, state) -> RunArtifacts:
        return RunArtifacts(
            config=self.config,
            point_key=state["point_key"],
            delta=state["delta"],
            seed=state["seed"],
            dataset=state["dataset"],
            pool=state["pool"],
            maes=state["maes"],
            stacking=state["stacking"],
            selection=state["selection"],
            maes_subset=state["maes_subset"],
        )

    def persist(self, state) -> None:
        point_dir = self.config.artifact_path(state["point_key"])
        provenance = {"config_hash": self.config_hash, "seeds": [state["seed"]]}
        save_maes(state["maes"], point_dir / "maes.npz", provenance)
        if state["mode"] == "sweep":
            save_pool(state["pool"], point_dir / "pool", provenance)
            save_stacking(state["stacking"], point_dir / "stacking.npz", provenance)
            emit_reports(self.artifacts(state), point_dir / "reports")
        # result last: its presence marks the point complete
        atomic_write_text(point_dir / "result.json", json.dumps(state["result"], indent=2, sort_keys=True))


@dataclass(frozen=True)
class PointSpec:
    point_key: str
    mode: str
    delta: float
    seed: int
    setting: dict = field(default_factory=dict)


def run_point_job(config_json: str, point: PointSpec, log_level: str = "INFO") -> dict:
    """Process-pool entry: rebuild the runner from the serialized config"""
    setup_logging(log_level)
    config = ExperimentConfig.model_validate_json(config_json)
    return PointRunner(config).run(point.point_key, point.mode, point.delta, point.seed, point.setting)


def execute_points(config: ExperimentConfig, points: list[PointSpec], parallelism: int | None = None) -> list[dict]:
    """Run points inline or on a process pool; results come back in input order"""
    parallelism = parallelism or config.parallelism
    if parallelism <= 1 or len(points) <= 1:
        runner = PointRunner(config)
        return [runner.run(p.point_key, p.mode, p.delta, p.seed, p.setting) for p in points]

    log_level = logging.getLevelName(logging.getLogger().getEffectiveLevel())
    # Point workers train their pools sequentially
    worker_json = config.model_copy(update={"parallelism": 1}).model_dump_json()
    with ProcessPoolExecutor(max_workers=parallelism) as executor:
        futures = [executor.submit(run_point_job, worker_json, p, log_level) for p in points]
        results = []
        for point, future in zip(points, futures):
            try:
                results.append(future.result())
            except Exception as error:
                logger.exception(f"[SWEEP] worker for {point.point_key} crashed")
                results.append({
                    "point": point.point_key, "mode": point.mode, "delta": point.delta, "seed": point.seed,
                    "setting": json_safe(point.setting), "status": "failed",
                    "error": f"{type(error).__name__}: {error}", "config_hash": config.config_hash(),
                })
    return results
