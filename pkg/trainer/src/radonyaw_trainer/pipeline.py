"""Differentiable forward pass: masked BEVs to a heading distribution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .radon_layer import RadonGeometry, correlation_scores, descriptor_rows


@dataclass
class HeadingDistribution:
    """Probability vector over heading bins (sums to 1).

    ``scores`` keeps the pre-softmax correlation vector so the loss can be
    evaluated in log space without underflow.
    """

    p: torch.Tensor
    scores: torch.Tensor | None = None

    def __post_init__(self):
        total = float(self.p.detach().sum())
        if not np.isfinite(total) or abs(total - 1.0) > 1e-6:
            raise ValueError(f"heading distribution sums to {total}, expected 1")
        if float(self.p.detach().min()) < 0:
            raise ValueError("heading distribution has negative entries")

    @property
    def argmax_bin(self) -> int:
        return int(torch.argmax(self.p))


def masked_correlation(
    bev_q: torch.Tensor,
    bev_p: torch.Tensor,
    mask_q: torch.Tensor,
    mask_p: torch.Tensor,
    n_angles: int,
    geom_q: RadonGeometry | None = None,
    geom_p: RadonGeometry | None = None,
    normalize: bool = False,
) -> torch.Tensor:
    """Circular-correlation scores of the masked BEV pair.

    ``normalize`` scales each descriptor to unit Frobenius norm first
    (cosine scores). Raw scores (default) match the estimator CLI output;
    the softmax path normalizes, since a softmax over raw sums of spectral
    magnitudes saturates to a one-hot and stops gradients.
    """
    if bev_q.shape != bev_p.shape:
        raise ValueError("BEV pair must share one grid shape")
    if mask_q.shape != bev_q.shape or mask_p.shape != bev_p.shape:
        raise ValueError("masks must match the BEV spatial shape")
    if geom_q is None:
        geom_q = RadonGeometry(bev_q.detach().numpy() != 0, n_angles)
    if geom_p is None:
        geom_p = RadonGeometry(bev_p.detach().numpy() != 0, n_angles)
    dq = descriptor_rows(geom_q.sinogram(geom_q.gather_values(mask_q * bev_q)))
    dp = descriptor_rows(geom_p.sinogram(geom_p.gather_values(mask_p * bev_p)))
    if normalize:
        dq = dq / torch.linalg.norm(dq).clamp_min(1e-30)
        dp = dp / torch.linalg.norm(dp).clamp_min(1e-30)
    return correlation_scores(dq, dp)


def differentiable_pipeline(
    bev_q: torch.Tensor,
    bev_p: torch.Tensor,
    net_q: torch.nn.Module,
    net_p: torch.nn.Module,
    n_angles: int,
    geom_q: RadonGeometry | None = None,
    geom_p: RadonGeometry | None = None,
) -> HeadingDistribution:
    """Masks from the two (non-shared) networks, then softmax over scores.

    Every stage is differentiable with respect to both networks'
    parameters; the geometry tensors are constants of the binary supports.
    """
    mask_q = net_q(bev_q)
    mask_p = net_p(bev_p)
    scores = masked_correlation(
        bev_q, bev_p, mask_q, mask_p, n_angles, geom_q, geom_p, normalize=True
    )
    return HeadingDistribution(p=torch.softmax(scores, dim=0), scores=scores)
