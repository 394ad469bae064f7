"""From-scratch float64 neural core: layers, loss, optimizer, checking, storage."""

from .gradcheck import gradient_check
from .initializers import glorot_uniform
from .layers import (
    Dense,
    GRULayer,
    LSTMLayer,
    TimeDistributedDense,
    dense_forward,
    rnn_forward,
    sigmoid,
)
from .loss import mae_loss
from .optim import Nadam
from .tensorio import load_tensors, save_tensors, tensors_from_bytes, tensors_to_bytes

__all__ = [
    "Dense",
    "GRULayer",
    "LSTMLayer",
    "Nadam",
    "TimeDistributedDense",
    "dense_forward",
    "glorot_uniform",
    "gradient_check",
    "load_tensors",
    "mae_loss",
    "rnn_forward",
    "save_tensors",
    "sigmoid",
    "tensors_from_bytes",
    "tensors_to_bytes",
]
