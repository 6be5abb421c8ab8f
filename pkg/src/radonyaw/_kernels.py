"""Numba kernels for the two hot loops: sinogram deposition and BEV warps.

Determinism: rows of the sinogram are partitioned over threads by angle, and
each row is accumulated sequentially in pixel order, so results are
bit-identical for any thread count or schedule. fastmath stays off to keep
IEEE evaluation order.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(parallel=True, cache=True)
def splat_linear(px, py, vals, sin_t, cos_t, n_tau, inv_pitch, tau0, out):
    """Deposit point masses onto tau bins with a 2-tap linear kernel.

    ``tau0`` is the tau coordinate of bin center 0; ``out`` is (n_angles,
    n_tau) and is accumulated in float64. Mass falling outside the bin range
    is dropped tap by tap.
    """
    n_ang = sin_t.shape[0]
    n_pts = px.shape[0]
    for i in prange(n_ang):
        s = sin_t[i]
        c = cos_t[i]
        row = out[i]
        for n in range(n_pts):
            tau = s * px[n] + c * py[n]
            u = (tau - tau0) * inv_pitch
            j = int(np.floor(u))
            f = u - j
            v = vals[n]
            if 0 <= j < n_tau:
                row[j] += v * (1.0 - f)
            if 0 <= j + 1 < n_tau:
                row[j + 1] += v * f


@njit(parallel=True, cache=True)
def splat_quadratic(px, py, vals, sin_t, cos_t, n_tau, inv_pitch, tau0, out):
    """Deposit point masses onto tau bins with a 3-tap quadratic B-spline."""
    n_ang = sin_t.shape[0]
    n_pts = px.shape[0]
    for i in prange(n_ang):
        s = sin_t[i]
        c = cos_t[i]
        row = out[i]
        for n in range(n_pts):
            tau = s * px[n] + c * py[n]
            u = (tau - tau0) * inv_pitch
            j = int(np.floor(u + 0.5))
            d = u - j
            v = vals[n]
            wm = 0.5 * (0.5 - d) * (0.5 - d)
            w0 = 0.75 - d * d
            wp = 0.5 * (0.5 + d) * (0.5 + d)
            if 0 <= j - 1 < n_tau:
                row[j - 1] += v * wm
            if 0 <= j < n_tau:
                row[j] += v * w0
            if 0 <= j + 1 < n_tau:
                row[j + 1] += v * wp


@njit(cache=True)
def whiten_spectrum(cross):
    """Normalize a complex64 cross-power spectrum to unit modulus in place.

    Entries below 1e-12 of the peak modulus keep their (near-zero) value
    scaled by the floor instead of dividing by zero.
    """
    h, w = cross.shape
    peak_sq = 0.0
    for i in range(h):
        for j in range(w):
            c = cross[i, j]
            a = c.real * c.real + c.imag * c.imag
            if a > peak_sq:
                peak_sq = a
    floor = np.sqrt(peak_sq) * 1e-12 + 1e-30
    for i in range(h):
        for j in range(w):
            c = cross[i, j]
            a = np.sqrt(c.real * c.real + c.imag * c.imag)
            if a < floor:
                a = floor
            cross[i, j] = c / a


@njit(parallel=True, cache=True)
def warp_nearest(grid, ca, sa, cx, tx, ty, out):
    """Nearest-neighbor rotate+translate of a square image.

    Inverse map: src = R(-alpha) (u - c - t) + c with precomputed
    ca = cos(alpha), sa = sin(alpha). Out-of-bounds samples are 0.
    """
    s = grid.shape[0]
    for i in prange(s):
        di = i - cx - tx
        bx = ca * di + cx
        by = -sa * di + cx
        for j in range(s):
            dj = j - cx - ty
            x = bx + sa * dj
            y = by + ca * dj
            xi = int(np.rint(x))
            yi = int(np.rint(y))
            if 0 <= xi < s and 0 <= yi < s:
                out[i, j] = grid[xi, yi]
            else:
                out[i, j] = 0
