from .adam import Adam
from .checkpoint import load_checkpoint, save_checkpoint
from .loss import cos_loss, cos_loss_grad, l2_penalty, loss_and_gradients, total_loss
from .model import DEFAULT_HIDDEN, YawConvNet, kaiming_init
from .train import TrainConfig, train, write_training_log

__all__ = [
    "Adam",
    "DEFAULT_HIDDEN",
    "TrainConfig",
    "YawConvNet",
    "cos_loss",
    "cos_loss_grad",
    "kaiming_init",
    "l2_penalty",
    "load_checkpoint",
    "loss_and_gradients",
    "save_checkpoint",
    "total_loss",
    "train",
    "write_training_log",
]
