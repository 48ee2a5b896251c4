"""
Nodes module - exports all node definitions
"""

from .point_nodes import (
    create_cache_check_node,
    create_evaluate_node,
    create_fit_baselines_node,
    create_generate_data_node,
    create_persist_node,
    create_train_maes_node,
    create_train_pool_node,
)

__all__ = [
    "create_cache_check_node",
    "create_evaluate_node",
    "create_fit_baselines_node",
    "create_generate_data_node",
    "create_persist_node",
    "create_train_maes_node",
    "create_train_pool_node",
]
