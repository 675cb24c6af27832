"""Mini-batch training loop with best-checkpoint tracking."""

import csv
from dataclasses import asdict, dataclass

import numpy as np

from ..angles import angle_diff
from .adam import Adam
from .loss import cos_loss, l2_penalty, loss_and_gradients
from .model import DEFAULT_HIDDEN, kaiming_init


@dataclass
class TrainConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 128
    epochs: int = 150
    l2: float = 1e-6
    seed: int = 0
    hidden: int = DEFAULT_HIDDEN
    shuffle: bool = True

    def validate(self):
        if min(self.lr, self.epsilon, self.batch_size, self.epochs) <= 0:
            raise ValueError("lr, epsilon, batch_size, epochs must be positive")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("beta coefficients must lie in (0, 1)")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")
        return self


def _val_metrics(model, x, y, lam):
    if x.shape[0] == 0:
        return float("nan"), float("nan")
    pred = model.predict(x)
    loss = float(np.mean(cos_loss(y, pred))) + l2_penalty(model, lam)
    mae_deg = float(np.degrees(np.abs(angle_diff(pred, y))).mean())
    return loss, mae_deg


def train(train_set, val_set=None, config=None, *, model=None, callback=None):
    """Train on labeled windows; returns (best model, per-epoch log).

    train_set/val_set expose .x (n, 100, 6) and .psi (n,). Batches are
    reshuffled each epoch from a seeded generator. The checkpoint with the
    lowest validation loss wins (training loss when no validation set is
    given). A non-finite loss aborts and the last good state is returned.
    """
    config = (config or TrainConfig()).validate()
    if len(train_set) == 0:
        raise ValueError("empty training set")
    if model is None:
        model = kaiming_init(seed=config.seed, hidden=config.hidden)
    opt = Adam(lr=config.lr, beta1=config.beta1, beta2=config.beta2,
               eps=config.epsilon)
    rng = np.random.default_rng(config.seed)

    x_tr, y_tr = train_set.x, train_set.psi
    x_val = val_set.x if val_set is not None and len(val_set) else np.empty((0, 100, 6))
    y_val = val_set.psi if val_set is not None and len(val_set) else np.empty(0)

    n = x_tr.shape[0]
    log = []
    best_state = model.copy_state()
    best_loss = np.inf
    aborted = False

    for epoch in range(config.epochs):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        epoch_losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = loss_and_gradients(model, x_tr[idx], y_tr[idx],
                                             lam=config.l2)
            if not np.isfinite(loss):
                aborted = True
                break
            opt.step(model, grads)
            epoch_losses.append(loss)
        if aborted:
            break

        train_loss = float(np.mean(epoch_losses))
        val_loss, val_mae = _val_metrics(model, x_val, y_val, config.l2)
        row = {
            "epoch": epoch,
            "train_loss": train_loss,
            "val_loss": val_loss,
            "val_mae_deg": val_mae,
        }
        log.append(row)
        if callback is not None:
            callback(row)

        selector = val_loss if x_val.shape[0] else train_loss
        if np.isfinite(selector) and selector < best_loss:
            best_loss = selector
            best_state = model.copy_state()

    model.load_state(best_state)
    return model, log


def write_training_log(log, path):
    """CSV with one row per epoch: epoch,train_loss,val_loss,val_mae_deg."""
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(
            f, fieldnames=["epoch", "train_loss", "val_loss", "val_mae_deg"]
        )
        writer.writeheader()
        for row in log:
            writer.writerow(row)


def config_to_dict(config):
    return asdict(config)
