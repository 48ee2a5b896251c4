"""
Experiment Point Nodes - thin graph nodes over an injected point runner
The runner owns the configuration; nodes only move results through the state.
"""

import logging

logger = logging.getLogger(__name__)


def create_cache_check_node(runner):
    """Skip points whose finished result already exists for this config"""

    def cache_check(state):
        cached = runner.load_cached(state["point_key"])
        if cached is None:
            return {"cached": False, "events": [f"start {state['point_key']}"]}
        logger.info(f"[SWEEP] {state['point_key']} already complete, reusing result")
        return {"cached": True, "result": cached, "events": [f"cached {state['point_key']}"]}

    return cache_check


def create_generate_data_node(runner):
    def generate_data(state):
        dataset = runner.generate_data(state["point_key"], state["delta"], state["seed"])
        return {"dataset": dataset, "events": ["generate_data"]}

    return generate_data


def create_train_pool_node(runner):
    def train_pool(state):
        pool = runner.train_pool(state["dataset"], state["seed"])
        return {"pool": pool, "events": ["train_pool"]}

    return train_pool


def create_fit_baselines_node(runner):
    def fit_baselines(state):
        selection, stacking = runner.fit_baselines(state["pool"], state["dataset"])
        return {"selection": selection, "stacking": stacking, "events": ["fit_baselines"]}

    return fit_baselines


def create_train_maes_node(runner):
    def train_maes(state):
        trained, subset = runner.train_maes(state["dataset"], state["seed"], state.get("setting") or {},
                                            state.get("pool"))
        return {"maes": trained, "maes_subset": subset, "events": ["train_maes"]}

    return train_maes


def create_evaluate_node(runner):
    def evaluate(state):
        return {"result": runner.evaluate(state), "events": ["evaluate"]}

    return evaluate


def create_persist_node(runner):
    def persist(state):
        runner.persist(state)
        return {"events": ["persist"]}

    return persist
