"""
gate - attention gating over experts
"""

from .attention import (
    AttentionKind,
    GateParams,
    GateWeights,
    gate_log_weights,
    gate_select_hard,
    gate_weights,
    init_gate,
    score,
    score_matrix,
)

__all__ = [
    "AttentionKind",
    "GateParams",
    "GateWeights",
    "gate_log_weights",
    "gate_select_hard",
    "gate_weights",
    "init_gate",
    "score",
    "score_matrix",
]
