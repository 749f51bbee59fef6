"""Self-contained neural toolkit: MLP classifier, LSTM regressor, binary
weight files, finite-difference gradient checks."""

from .common import BCE, MSE, TrainConfig
from .gradcheck import grad_check
from .lstm import (CqiPredictor, cqi_from_tensors, cqi_tensors,
                   init_cqi_predictor, lstm_loss_and_grad, lstm_step,
                   make_windows, predict_window, run_sequence, train_cqi)
from .mlp import (PrunerModel, init_pruner, mlp_forward, mlp_loss_and_grad,
                  pruner_from_tensors, pruner_tensors, train_pruner)
from .weights_io import load_weights, save_weights

__all__ = [
    "BCE", "MSE", "TrainConfig", "grad_check",
    "CqiPredictor", "cqi_from_tensors", "cqi_tensors", "init_cqi_predictor",
    "lstm_loss_and_grad", "lstm_step", "make_windows", "predict_window",
    "run_sequence", "train_cqi",
    "PrunerModel", "init_pruner", "mlp_forward", "mlp_loss_and_grad",
    "pruner_from_tensors", "pruner_tensors", "train_pruner",
    "load_weights", "save_weights",
]
