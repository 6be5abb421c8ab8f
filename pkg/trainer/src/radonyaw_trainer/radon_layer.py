"""Differentiable sinogram pipeline cloned from the estimator's math.

The Radon step deposits each occupied pixel's (masked) value exactly onto
the two offset bins its center projects to, at every angle. The deposition
geometry depends only on the grid and the binary support, so it is
precomputed per sample as constant index/weight tensors; the transform is
then a fixed linear map of the masked values and its gradients are exact.
Row-wise DFT magnitudes and the frequency-domain circular correlation
mirror the estimator exactly (DC bin dropped, half spectrum kept), which is
what makes the all-ones-mask forward pass reproduce its scores.
"""

from __future__ import annotations

import numpy as np
import torch


class RadonGeometry:
    """Constant deposition geometry for one binary support set.

    ``support`` is a boolean/binary (S, S) array; masked BEV values at the
    support pixels are the only inputs the transform depends on.
    """

    def __init__(
        self,
        support: np.ndarray,
        n_angles: int,
        n_offsets: int | None = None,
        dtype: torch.dtype = torch.float32,
    ):
        support = np.asarray(support)
        if support.ndim != 2 or support.shape[0] != support.shape[1]:
            raise ValueError("support must be a square 2-D array")
        s = support.shape[0]
        n_offsets = n_offsets if n_offsets is not None else s
        ix, iy = np.nonzero(support)
        c = 0.5 * (s - 1)
        pitch = s / n_offsets
        theta = np.arange(n_angles, dtype=np.float64) * (2.0 * np.pi / n_angles)
        tau = np.sin(theta)[:, None] * (ix - c)[None, :] + np.cos(theta)[:, None] * (iy - c)[None, :]
        u = tau / pitch + 0.5 * (n_offsets - 1)
        j0 = np.floor(u).astype(np.int64)
        frac = u - j0
        ok0 = (j0 >= 0) & (j0 < n_offsets)
        ok1 = (j0 + 1 >= 0) & (j0 + 1 < n_offsets)
        self.size_px = s
        self.n_angles = n_angles
        self.n_offsets = n_offsets
        self.pitch = pitch
        self.support_index = torch.from_numpy(
            np.ascontiguousarray(ix * s + iy)
        )  # flat indices into the image
        self.j0 = torch.from_numpy(np.where(ok0, j0, 0))
        self.j1 = torch.from_numpy(np.where(ok1, j0 + 1, 0))
        self.w0 = torch.from_numpy(np.where(ok0, 1.0 - frac, 0.0)).to(dtype)
        self.w1 = torch.from_numpy(np.where(ok1, frac, 0.0)).to(dtype)

    def gather_values(self, image: torch.Tensor) -> torch.Tensor:
        """Masked-image values at the support pixels (keeps gradients)."""
        return image.reshape(-1)[self.support_index]

    def sinogram(self, values: torch.Tensor) -> torch.Tensor:
        """(n_angles, n_offsets) sinogram of point masses ``values``."""
        rows = values.new_zeros((self.n_angles, self.n_offsets))
        rows.scatter_add_(1, self.j0, self.w0.to(values.dtype) * values.unsqueeze(0))
        rows.scatter_add_(1, self.j1, self.w1.to(values.dtype) * values.unsqueeze(0))
        return rows / self.pitch


def descriptor_rows(sinogram: torch.Tensor) -> torch.Tensor:
    """Per-row DFT magnitudes, DC dropped, half spectrum retained."""
    n_tau = sinogram.shape[1]
    return torch.abs(torch.fft.rfft(sinogram, dim=1))[:, 1 : n_tau // 2 + 1]


def correlation_scores(dq: torch.Tensor, dp: torch.Tensor) -> torch.Tensor:
    """scores[s] = sum_i <dq[i, :], dp[(i - s) mod n, :]> via the angle-axis FFT."""
    if dq.shape != dp.shape:
        raise ValueError(f"descriptor shapes differ: {tuple(dq.shape)} vs {tuple(dp.shape)}")
    n = dq.shape[0]
    fa = torch.fft.rfft(dq, dim=0)
    fb = torch.fft.rfft(dp, dim=0)
    return torch.fft.irfft((fa * fb.conj()).sum(dim=1), n=n, dim=0)
