"""Window classifier (clean vs noisy) and its training loop.

The topology is fixed by the consumer's weights-file contract: four 1-D
convolutions (70, 70, 140, 140 filters of width 10), a stride-3 max pool
after the second, global average pooling, then dense 32 -> 16 -> 2. Class
index 0 is clean, 1 is noisy. Training uses cross-entropy on logits; the
consumer applies softmax to the exported final layer itself.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .weights_format import write_weights


class WindowClassifier(nn.Module):
    # Inputs live in [0,1]; training sees them centered, and the export step
    # folds the constant shift into conv1's bias so the consumer can keep
    # feeding raw [0,1] windows.
    CENTER = 0.5

    def __init__(self):
        super().__init__()
        self.conv1 = nn.Conv1d(1, 70, 10)
        self.conv2 = nn.Conv1d(70, 70, 10)
        self.pool = nn.MaxPool1d(3)
        self.conv3 = nn.Conv1d(70, 140, 10)
        self.conv4 = nn.Conv1d(140, 140, 10)
        self.fc1 = nn.Linear(140, 32)
        self.fc2 = nn.Linear(32, 16)
        self.fc3 = nn.Linear(16, 2)

    def forward(self, x):  # x: (batch, 256)
        x = (x - self.CENTER).unsqueeze(1)
        x = F.relu(self.conv1(x))
        x = F.relu(self.conv2(x))
        x = self.pool(x)
        x = F.relu(self.conv3(x))
        x = F.relu(self.conv4(x))
        x = x.mean(dim=2)
        x = F.relu(self.fc1(x))
        x = F.relu(self.fc2(x))
        return self.fc3(x)  # logits; consumer applies softmax


@dataclass
class DetectorTrainConfig:
    epochs: int = 30
    batch_size: int = 32
    lr: float = 1e-3
    val_fraction: float = 0.25
    seed: int = 0
    min_windows: int = 64  # below this, train anyway but warn


def export_classifier(model: WindowClassifier, path) -> None:
    """Write the model in the portable weights format (float32)."""

    def np32(tensor):
        return tensor.detach().cpu().numpy().astype(np.float32)

    # conv1 saw centered inputs: W*(x - c) + b == W*x + (b - c * sum(W)).
    folded_bias = model.conv1.bias.detach() - model.CENTER * model.conv1.weight.detach().sum(
        dim=(1, 2)
    )
    convs = [(np32(model.conv1.weight), np32(folded_bias))] + [
        (np32(layer.weight), np32(layer.bias))
        for layer in (model.conv2, model.conv3, model.conv4)
    ]
    dense_layers = [
        (np32(model.fc1.weight), np32(model.fc1.bias), "relu"),
        (np32(model.fc2.weight), np32(model.fc2.bias), "relu"),
        (np32(model.fc3.weight), np32(model.fc3.bias), "softmax"),
    ]
    write_weights(path, convs, dense_layers)


def train_detector(
    windows: torch.Tensor,
    labels: torch.Tensor,
    out_path,
    config: DetectorTrainConfig | None = None,
    log_path=None,
) -> dict:
    """Train, export to ``out_path``, return summary with validation accuracy."""
    config = config or DetectorTrainConfig()
    n = windows.shape[0]
    if n < 2:
        raise ValueError("need at least 2 labeled windows")
    if n < config.min_windows:
        warnings.warn(f"training on only {n} windows", stacklevel=2)

    torch.manual_seed(config.seed)
    generator = torch.Generator().manual_seed(config.seed)
    order = torch.randperm(n, generator=generator)
    n_val = max(1, int(n * config.val_fraction))
    val_idx, train_idx = order[:n_val], order[n_val:]
    if train_idx.numel() == 0:  # tiny smoke runs
        train_idx = val_idx
    x_train, y_train = windows[train_idx], labels[train_idx]
    x_val, y_val = windows[val_idx], labels[val_idx]

    model = WindowClassifier()
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    # Constant rate, then tenfold decay for the last third to settle.
    scheduler = torch.optim.lr_scheduler.StepLR(
        optimizer, step_size=max(1, (2 * config.epochs) // 3), gamma=0.1
    )
    history = []
    best_acc = -1.0
    best_state = None
    for epoch in range(config.epochs):
        model.train()
        perm = torch.randperm(x_train.shape[0], generator=generator)
        total_loss = 0.0
        batches = 0
        for start in range(0, x_train.shape[0], config.batch_size):
            idx = perm[start : start + config.batch_size]
            optimizer.zero_grad()
            loss = F.cross_entropy(model(x_train[idx]), y_train[idx])
            loss.backward()
            optimizer.step()
            total_loss += float(loss.detach())
            batches += 1
        scheduler.step()
        model.eval()
        with torch.no_grad():
            val_acc = float((model(x_val).argmax(dim=1) == y_val).float().mean())
        history.append((epoch, total_loss / max(batches, 1), val_acc))
        if val_acc > best_acc:
            best_acc = val_acc
            best_state = {k: v.clone() for k, v in model.state_dict().items()}

    # Export the best-validation epoch; late epochs can wobble.
    model.load_state_dict(best_state)
    export_classifier(model, out_path)
    if log_path is not None:
        with open(log_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["epoch", "train_loss", "val_accuracy"])
            for row in history:
                writer.writerow([row[0], f"{row[1]:.6f}", f"{row[2]:.6f}"])
    summary = {
        "windows": n,
        "val_windows": int(n_val),
        "val_accuracy": best_acc,
        "weights_path": str(Path(out_path)),
    }
    print(
        f"detector: {n} windows, val accuracy {summary['val_accuracy']:.4f} "
        f"-> {out_path}"
    )
    return summary
