from advdrop.services.training.loss import batch_objective, sgvb_loss
from advdrop.services.training.optimizer import SGD, SGDState, clip_grad_norm, lr_at, sgd_step
from advdrop.services.training.trainer import evaluate, fit, minibatches, predict

__all__ = [
    "SGD", "SGDState", "batch_objective", "clip_grad_norm", "evaluate", "fit", "lr_at",
    "minibatches", "predict", "sgd_step", "sgvb_loss",
]
