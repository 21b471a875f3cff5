"""Unpaired image-translation networks and objectives.

Two generator/discriminator pairs: G maps domain X (noisy window images) to
domain Y (clean window images), F maps Y back to X. Patch discriminators
score 70x70 receptive fields. The reported objective combines the
log-likelihood adversarial terms for both mappings with an L1 cycle term
weighted by ``lambda_cyc``; training itself uses the least-squares variant
(see ``training``), which is stabler, while this module's values are what
get logged and gradient-checked.
"""
from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F


class ResnetBlock(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.block = nn.Sequential(
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            nn.InstanceNorm2d(channels),
            nn.ReLU(inplace=True),
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            nn.InstanceNorm2d(channels),
        )

    def forward(self, x):
        return x + self.block(x)


class ResnetGenerator(nn.Module):
    """c7s1 stem, two stride-2 downsamplings, residual trunk, two
    fractionally-strided upsamplings, c7s1 head with tanh output."""

    def __init__(self, ngf: int = 64, n_blocks: int = 9):
        super().__init__()
        layers: list[nn.Module] = [
            nn.ReflectionPad2d(3),
            nn.Conv2d(1, ngf, 7),
            nn.InstanceNorm2d(ngf),
            nn.ReLU(inplace=True),
        ]
        ch = ngf
        for _ in range(2):
            layers += [
                nn.Conv2d(ch, ch * 2, 3, stride=2, padding=1),
                nn.InstanceNorm2d(ch * 2),
                nn.ReLU(inplace=True),
            ]
            ch *= 2
        layers += [ResnetBlock(ch) for _ in range(n_blocks)]
        for _ in range(2):
            layers += [
                nn.ConvTranspose2d(ch, ch // 2, 3, stride=2, padding=1, output_padding=1),
                nn.InstanceNorm2d(ch // 2),
                nn.ReLU(inplace=True),
            ]
            ch //= 2
        layers += [nn.ReflectionPad2d(3), nn.Conv2d(ngf, 1, 7), nn.Tanh()]
        self.model = nn.Sequential(*layers)

    def forward(self, x):
        return self.model(x)


class PatchDiscriminator(nn.Module):
    """Convolutional patch critic; returns raw per-patch scores (no sigmoid)."""

    def __init__(self, ndf: int = 64, n_layers: int = 3):
        super().__init__()
        layers: list[nn.Module] = [
            nn.Conv2d(1, ndf, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
        ]
        ch = ndf
        for _ in range(n_layers - 1):
            layers += [
                nn.Conv2d(ch, ch * 2, 4, stride=2, padding=1),
                nn.InstanceNorm2d(ch * 2),
                nn.LeakyReLU(0.2, inplace=True),
            ]
            ch *= 2
        layers += [
            nn.Conv2d(ch, ch * 2, 4, stride=1, padding=1),
            nn.InstanceNorm2d(ch * 2),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(ch * 2, 1, 4, stride=1, padding=1),
        ]
        self.model = nn.Sequential(*layers)

    def forward(self, x):
        return self.model(x)


def adversarial_loss(generator, discriminator, batch_x, batch_y) -> torch.Tensor:
    """Log-likelihood adversarial value for (generator, its discriminator).

    E_y[log D(y)] + E_x[log(1 - D(G(x)))] with D's raw scores squashed by a
    sigmoid; log(1 - sigmoid(s)) is computed as logsigmoid(-s) for stability.
    """
    if batch_x.shape[0] == 0 or batch_y.shape[0] == 0:
        raise ValueError("adversarial_loss needs non-empty batches")
    real_term = F.logsigmoid(discriminator(batch_y)).mean()
    fake_term = F.logsigmoid(-discriminator(generator(batch_x))).mean()
    return real_term + fake_term


def cycle_loss(gen_xy, gen_yx, batch_x, batch_y) -> torch.Tensor:
    """L1 reconstruction through both translation cycles."""
    if batch_x.shape[1:] != batch_y.shape[1:]:
        raise ValueError(f"domain shapes differ: {batch_x.shape} vs {batch_y.shape}")
    forward = (gen_yx(gen_xy(batch_x)) - batch_x).abs().mean()
    backward = (gen_xy(gen_yx(batch_y)) - batch_y).abs().mean()
    return forward + backward


def total_objective(gen_xy, gen_yx, disc_x, disc_y, batch_x, batch_y, lambda_cyc: float):
    """Full minimax objective: both adversarial values plus the cycle term."""
    return (
        adversarial_loss(gen_xy, disc_y, batch_x, batch_y)
        + adversarial_loss(gen_yx, disc_x, batch_y, batch_x)
        + lambda_cyc * cycle_loss(gen_xy, gen_yx, batch_x, batch_y)
    )


def lsgan_d_loss(discriminator, real, fake) -> torch.Tensor:
    """Least-squares critic loss: real toward 1, fake toward 0."""
    real_scores = discriminator(real)
    fake_scores = discriminator(fake.detach())
    return 0.5 * (
        F.mse_loss(real_scores, torch.ones_like(real_scores))
        + F.mse_loss(fake_scores, torch.zeros_like(fake_scores))
    )


def lsgan_g_term(discriminator, fake) -> torch.Tensor:
    """Least-squares generator term: push translated samples toward 1."""
    scores = discriminator(fake)
    return F.mse_loss(scores, torch.ones_like(scores))
