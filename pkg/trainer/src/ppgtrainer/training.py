"""CycleGAN training loop over two unpaired PGM folders.

Both generators and both discriminators train simultaneously: each step
updates the critics toward real/fake least-squares targets, then updates the
generators with the adversarial terms plus the weighted cycle loss. The
log-likelihood objective values are computed alongside and written to the
training log so runs can be compared against the reported formulation.
Checkpoints are written atomically (temp file + rename).
"""
from __future__ import annotations

import csv
import os
from dataclasses import asdict, dataclass
from itertools import zip_longest
from pathlib import Path

import torch

from .cyclegan import (
    PatchDiscriminator,
    ResnetGenerator,
    adversarial_loss,
    cycle_loss,
    lsgan_d_loss,
    lsgan_g_term,
)
from .data import PgmFolder


@dataclass
class TrainConfig:
    lambda_cyc: float = 10.0
    epochs: int = 1
    batch_size: int = 1
    lr: float = 2e-4
    beta1: float = 0.5
    seed: int = 0
    ngf: int = 64
    n_blocks: int = 9
    ndf: int = 64
    n_layers: int = 3
    checkpoint_interval: int = 5
    noisy_pattern: str = "*.pgm"
    clean_pattern: str = "*.pgm"
    max_images: int = 0  # 0 = use every image in the folder


def build_models(config: TrainConfig):
    gen_xy = ResnetGenerator(config.ngf, config.n_blocks)  # noisy -> clean
    gen_yx = ResnetGenerator(config.ngf, config.n_blocks)  # clean -> noisy
    disc_x = PatchDiscriminator(config.ndf, config.n_layers)
    disc_y = PatchDiscriminator(config.ndf, config.n_layers)
    return gen_xy, gen_yx, disc_x, disc_y


def save_checkpoint(path, config: TrainConfig, gen_xy, gen_yx, disc_x, disc_y, epoch: int):
    payload = {
        "config": asdict(config),
        "epoch": epoch,
        "gen_xy": gen_xy.state_dict(),
        "gen_yx": gen_yx.state_dict(),
        "disc_x": disc_x.state_dict(),
        "disc_y": disc_y.state_dict(),
    }
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    torch.save(payload, tmp)
    os.replace(tmp, path)


def load_checkpoint(path):
    payload = torch.load(path, map_location="cpu", weights_only=True)
    config = TrainConfig(**payload["config"])
    gen_xy, gen_yx, disc_x, disc_y = build_models(config)
    gen_xy.load_state_dict(payload["gen_xy"])
    gen_yx.load_state_dict(payload["gen_yx"])
    disc_x.load_state_dict(payload["disc_x"])
    disc_y.load_state_dict(payload["disc_y"])
    return config, gen_xy, gen_yx, disc_x, disc_y, payload["epoch"]


def train_cyclegan(noisy_dir, clean_dir, out_dir, config: TrainConfig | None = None) -> dict:
    """Train on unpaired folders (domain X = noisy, domain Y = clean).

    Writes ``checkpoint_epoch<N>.pt``/``checkpoint_final.pt``, a per-epoch
    ``log.csv`` (epoch, L_GAN_G, L_GAN_F, L_cyc, total, plus the trained
    least-squares values) and a per-step ``steps.csv`` with the cycle loss.
    """
    config = config or TrainConfig()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(config.seed)
    generator = torch.Generator().manual_seed(config.seed)

    domain_x = PgmFolder(noisy_dir, config.noisy_pattern, limit=config.max_images)
    domain_y = PgmFolder(clean_dir, config.clean_pattern, limit=config.max_images)
    if len(domain_x) < 2 or len(domain_y) < 2:
        raise ValueError(
            f"need at least 2 images per domain, got {len(domain_x)}/{len(domain_y)}"
        )

    gen_xy, gen_yx, disc_x, disc_y = build_models(config)
    opt_g = torch.optim.Adam(
        list(gen_xy.parameters()) + list(gen_yx.parameters()),
        lr=config.lr,
        betas=(config.beta1, 0.999),
    )
    opt_d = torch.optim.Adam(
        list(disc_x.parameters()) + list(disc_y.parameters()),
        lr=config.lr,
        betas=(config.beta1, 0.999),
    )

    step = 0
    epoch_rows = []
    step_rows = []
    for epoch in range(1, config.epochs + 1):
        sums = {"gan_g": 0.0, "gan_f": 0.0, "cyc": 0.0, "ls_g": 0.0, "ls_d": 0.0}
        batches = 0
        for batch_x, batch_y in zip_longest(
            domain_x.batches(config.batch_size, generator),
            domain_y.batches(config.batch_size, generator),
        ):
            # Unpaired domains may differ in size; recycle the shorter one.
            if batch_x is None or batch_y is None:
                refill = domain_x if batch_x is None else domain_y
                batch = next(iter(refill.batches(config.batch_size, generator)), None)
                if batch is None:
                    break
                if batch_x is None:
                    batch_x = batch
                else:
                    batch_y = batch

            fake_y = gen_xy(batch_x)
            fake_x = gen_yx(batch_y)

            opt_d.zero_grad()
            d_loss = lsgan_d_loss(disc_y, batch_y, fake_y) + lsgan_d_loss(
                disc_x, batch_x, fake_x
            )
            d_loss.backward()
            opt_d.step()

            opt_g.zero_grad()
            cyc = cycle_loss(gen_xy, gen_yx, batch_x, batch_y)
            g_loss = (
                lsgan_g_term(disc_y, fake_y)
                + lsgan_g_term(disc_x, fake_x)
                + config.lambda_cyc * cyc
            )
            g_loss.backward()
            opt_g.step()
            step += 1

            with torch.no_grad():
                gan_g = float(adversarial_loss(gen_xy, disc_y, batch_x, batch_y))
                gan_f = float(adversarial_loss(gen_yx, disc_x, batch_y, batch_x))
            sums["gan_g"] += gan_g
            sums["gan_f"] += gan_f
            sums["cyc"] += float(cyc.detach())
            sums["ls_g"] += float(g_loss.detach())
            sums["ls_d"] += float(d_loss.detach())
            batches += 1
            step_rows.append(
                (step, float(cyc.detach()), float(g_loss.detach()), float(d_loss.detach()))
            )

        if batches == 0:
            raise ValueError("no full batches; lower batch_size")
        means = {k: v / batches for k, v in sums.items()}
        total = means["gan_g"] + means["gan_f"] + config.lambda_cyc * means["cyc"]
        epoch_rows.append(
            (
                epoch,
                means["gan_g"],
                means["gan_f"],
                means["cyc"],
                total,
                means["ls_g"],
                means["ls_d"],
            )
        )
        print(
            f"epoch {epoch}: L_GAN_G {means['gan_g']:.4f} L_GAN_F {means['gan_f']:.4f} "
            f"L_cyc {means['cyc']:.4f} total {total:.4f}"
        )
        if epoch % config.checkpoint_interval == 0:
            save_checkpoint(
                out / f"checkpoint_epoch{epoch}.pt", config, gen_xy, gen_yx, disc_x, disc_y, epoch
            )

    final = out / "checkpoint_final.pt"
    save_checkpoint(final, config, gen_xy, gen_yx, disc_x, disc_y, config.epochs)
    with open(out / "log.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "L_GAN_G", "L_GAN_F", "L_cyc", "total", "ls_g", "ls_d"])
        for row in epoch_rows:
            writer.writerow([row[0]] + [f"{v:.6f}" for v in row[1:]])
    with open(out / "steps.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "L_cyc", "ls_g", "ls_d"])
        for row in step_rows:
            writer.writerow([row[0]] + [f"{v:.6f}" for v in row[1:]])
    return {
        "checkpoint": str(final),
        "epochs": config.epochs,
        "steps": step,
        "log": str(out / "log.csv"),
    }
