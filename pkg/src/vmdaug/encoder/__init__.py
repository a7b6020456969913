"""Numpy implementation of the Encoder time-series classifier."""

from .model import (
    PRESETS,
    EncoderConfig,
    EncoderModel,
    adam_step,
    backward,
    count_parameters,
    forward,
    load_model,
    loss,
    one_hot,
    parameter_shapes,
    save_model,
)
from .training import TrainReport, classify, classify_batch, fit, predict_proba, train

__all__ = [
    "PRESETS", "EncoderConfig", "EncoderModel", "TrainReport",
    "adam_step", "backward", "classify", "classify_batch", "count_parameters", "fit",
    "forward", "load_model", "loss", "one_hot", "parameter_shapes", "predict_proba",
    "save_model", "train",
]
