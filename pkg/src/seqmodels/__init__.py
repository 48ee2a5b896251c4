"""
seqmodels - LSTM experts and the tanh RNN context model
"""

from .lstm import (
    ExpertSpec,
    LstmExpert,
    LstmState,
    expert_forward,
    init_lstm_params,
    lstm_step,
    zero_state,
)
from .rnn import ContextRnn, context_forward, init_rnn_params
from .specs import sample_expert_specs

__all__ = [
    "ExpertSpec",
    "LstmExpert",
    "LstmState",
    "expert_forward",
    "init_lstm_params",
    "lstm_step",
    "zero_state",
    "ContextRnn",
    "context_forward",
    "init_rnn_params",
    "sample_expert_specs",
]
