"""KL-divergence loss against a one-hot heading target."""

from __future__ import annotations

import torch

from .pipeline import HeadingDistribution

EPS = 1e-12


def gt_bin(gt_yaw_deg: float, n_angles: int) -> int:
    """Nearest heading bin: round(yaw / bin width) mod n_angles."""
    return int(round(gt_yaw_deg / (360.0 / n_angles))) % n_angles


def kld_loss(
    dist: HeadingDistribution,
    gt_yaw_deg: float,
    twin_aware: bool = False,
) -> torch.Tensor:
    """KLD(p, one-hot at the ground-truth bin), which reduces to -log p[gt].

    Evaluated as -log_softmax(scores)[gt] when the pre-softmax scores are
    available, so an underflowed p[gt] still carries gradient; otherwise
    p[gt] is clamped at 1e-12. ``twin_aware`` scores the better of the
    ground-truth bin and its half-turn twin (the DFT-magnitude rows make
    the correlation 180-degree periodic, so the twin bin carries the same
    evidence); default off, leaving the twin to inference-time
    disambiguation.
    """
    n = dist.p.shape[0]
    g = gt_bin(gt_yaw_deg, n)
    twin = (g + n // 2) % n
    if dist.scores is not None:
        logp = torch.log_softmax(dist.scores, dim=0)
        target = torch.maximum(logp[g], logp[twin]) if twin_aware else logp[g]
        return -target
    p = dist.p
    target = torch.maximum(p[g], p[twin]) if twin_aware else p[g]
    return -torch.log(torch.clamp(target, min=EPS))
