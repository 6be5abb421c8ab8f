"""Translation-invariant descriptors and the global heading solver.

The magnitude of each sinogram row's 1-D DFT is unchanged by circular shifts
of that row, so in-plane translation (a per-row tau shift) drops out and the
relative heading survives as a pure circular shift along the angle axis,
solved globally by circular cross-correlation. Because the magnitude rows at
theta and theta+180 coincide, the correlation is 180-degree periodic; the
two candidate headings are scored in image space by phase-correlating the
candidate de-rotations, which tolerates the residual translation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from ._kernels import warp_nearest, whiten_spectrum
from .bev import BevImage
from .config import EstimatorConfig
from .radon import Sinogram, radon_transform


class EmptySceneError(ValueError):
    """Raised when a BEV (after optional masking) carries no occupancy."""


@dataclass
class InvariantDescriptor:
    """Per-row DFT magnitudes of a sinogram: n_angles x n_freq, entries >= 0.

    Invariant under any circular tau shift of the source sinogram rows by
    construction.
    """

    data: np.ndarray
    normalization: str = "raw"

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValueError("descriptor must be a 2-D matrix")


@dataclass
class CorrelationResult:
    """Circular correlation over candidate heading shifts.

    ``scores[s]`` is the sum over rows of the inner product between the
    first descriptor and the second one shifted by s bins. ``best_bin`` is
    the first index attaining the maximum; ``ambiguity_pair`` holds the
    half-turn twin candidates in degrees (their scores are analytically
    equal for ideal inputs, so both are always reported); ``chosen`` is one
    of the pair, set by disambiguation. ``confidence`` is the ratio of the
    peak to the largest score outside the +-1-bin neighborhoods of the peak
    and its twin.
    """

    scores: np.ndarray
    best_bin: int
    best_angle_deg: float
    ambiguity_pair: tuple[float, float]
    confidence: float
    chosen: float
    refined_angle_deg: float | None = None


@dataclass
class HeadingEstimate:
    angle_deg: float
    confidence: float
    correlation: CorrelationResult
    disambiguation_peaks: tuple[float, float]
    low_confidence: bool = False


def dft_magnitude_rows(
    sino: Sinogram,
    drop_dc: bool = True,
    half_spectrum: bool = True,
    normalization: str = "raw",
) -> InvariantDescriptor:
    """Replace each sinogram row by the magnitude of its 1-D DFT.

    ``drop_dc`` removes frequency bin 0 (the row mass); ``half_spectrum``
    keeps only bins up to n_offsets/2 (real-input symmetry). With
    ``normalization='l2'`` the whole matrix is scaled to unit Frobenius
    norm (an all-zero descriptor is left as zero).
    """
    if normalization not in ("raw", "l2"):
        raise ValueError(f"unknown normalization {normalization!r}")
    rows = sino.data
    n_tau = rows.shape[1]
    start = 1 if drop_dc else 0
    if half_spectrum:
        mags = np.abs(np.fft.rfft(rows, axis=1))[:, start : n_tau // 2 + 1]
    else:
        mags = np.abs(np.fft.fft(rows, axis=1))[:, start:]
    if normalization == "l2":
        norm = np.linalg.norm(mags)
        if norm > 0:
            mags = mags / norm
    return InvariantDescriptor(data=mags, normalization=normalization)


def circular_correlate(dq: InvariantDescriptor, dp: InvariantDescriptor) -> CorrelationResult:
    """Correlation scores over all circular shifts of the angle axis.

    scores[s] = sum_i <dq[i, :], dp[(i - s) mod n, :]>, evaluated per column
    in the frequency domain (correlation theorem); equals the brute-force
    double loop to ~1e-12 relative. Ties break to the lowest index.
    """
    a = dq.data
    b = dp.data
    if a.shape != b.shape:
        raise ValueError(f"descriptor shapes differ: {a.shape} vs {b.shape}")
    n = a.shape[0]
    fa = np.fft.rfft(a, axis=0)
    fb = np.fft.rfft(b, axis=0)
    scores = np.fft.irfft((fa * fb.conj()).sum(axis=1), n=n, axis=0)
    best_bin = int(np.argmax(scores))
    dpb = 360.0 / n
    best_angle = best_bin * dpb
    twin_bin = (best_bin + n // 2) % n
    pair = (best_angle, twin_bin * dpb)
    confidence = _peak_confidence(scores, best_bin, twin_bin)
    return CorrelationResult(
        scores=scores,
        best_bin=best_bin,
        best_angle_deg=best_angle,
        ambiguity_pair=pair,
        confidence=confidence,
        chosen=best_angle,
    )


def _peak_confidence(scores: np.ndarray, best_bin: int, twin_bin: int) -> float:
    n = scores.shape[0]
    mask = np.ones(n, dtype=bool)
    for b in (best_bin, twin_bin):
        for d in (-1, 0, 1):
            mask[(b + d) % n] = False
    if not mask.any():
        return 1.0
    peak = float(scores[best_bin])
    second = float(scores[mask].max())
    if peak <= 0.0:
        return 1.0
    return peak / max(second, peak * 1e-12)


def correlate_bruteforce(dq: np.ndarray, dp: np.ndarray) -> np.ndarray:
    """Reference correlation: explicit loop over shifts, no FFT (test oracle)."""
    n = dq.shape[0]
    idx = np.arange(n)
    scores = np.zeros(n, dtype=np.float64)
    for s in range(n):
        scores[s] = float((dq * dp[(idx - s) % n]).sum())
    return scores


def refine_peak(scores: np.ndarray, bin: int) -> float:
    """Sub-bin peak position in degrees via a parabola through 3 points.

    Fits scores at bins {bin-1, bin, bin+1} (circular indexing); the vertex
    offset is clamped to +-0.5 bin. A flat or degenerate triple returns the
    bin center.
    """
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.shape[0]
    if n < 3:
        raise ValueError("refinement needs at least 3 bins")
    ym = scores[(bin - 1) % n]
    y0 = scores[bin % n]
    yp = scores[(bin + 1) % n]
    denom = 2.0 * (ym + yp - 2.0 * y0)
    if denom == 0.0 or not np.isfinite(denom):
        offset = 0.0
    else:
        offset = float((ym - yp) / denom)
        offset = min(0.5, max(-0.5, offset))
    angle = ((bin + offset) * 360.0 / n) % 360.0
    return angle if angle < 360.0 else 0.0  # -1e-16 % 360 rounds to 360.0


def _as_array(image: BevImage | np.ndarray) -> np.ndarray:
    if isinstance(image, BevImage):
        return image.grid
    arr = np.asarray(image)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("expected a square 2-D image")
    return arr


def _rotate_content(arr: np.ndarray, alpha_deg: float) -> np.ndarray:
    """Nearest-neighbor content rotation about the image center."""
    a = np.deg2rad(alpha_deg)
    src = np.ascontiguousarray(arr)
    out = np.empty_like(src)
    warp_nearest(src, np.cos(a), np.sin(a), 0.5 * (arr.shape[0] - 1), 0.0, 0.0, out)
    return out


def _whitened_peak(fa: np.ndarray, fb: np.ndarray, shape: tuple[int, int]) -> float:
    cross = fa * np.conj(fb)
    whiten_spectrum(cross)
    corr = sfft.irfft2(cross, s=shape)
    return float(corr.max())


def phase_correlation_peak(a: np.ndarray, b: np.ndarray) -> float:
    """Peak of the whitened cross-power spectrum (~1.0 for a pure shift)."""
    fa = sfft.rfft2(np.ascontiguousarray(a, dtype=np.float32))
    fb = sfft.rfft2(np.ascontiguousarray(b, dtype=np.float32))
    return _whitened_peak(fa, fb, np.asarray(a).shape)


def _pool_max(arr: np.ndarray, factor: int) -> np.ndarray:
    """Max-pool a square array by an integer factor (binary OR for BEVs)."""
    if factor <= 1:
        return arr
    s = arr.shape[0] - arr.shape[0] % factor
    if factor == 2:
        a = arr[:s, :s]
        return np.maximum(
            np.maximum(a[0::2, 0::2], a[1::2, 0::2]),
            np.maximum(a[0::2, 1::2], a[1::2, 1::2]),
        )
    view = arr[:s, :s].reshape(s // factor, factor, s // factor, factor)
    return view.max(axis=(1, 3))


def disambiguate_halfturn(
    bq: BevImage | np.ndarray,
    bp: BevImage | np.ndarray,
    candidates: tuple[float, float],
    peak_floor: float = 1e-6,
    pool: int = 2,
) -> tuple[float, tuple[float, float], bool]:
    """Pick between the two half-turn-ambiguous heading candidates.

    Each candidate de-rotates ``bp`` and is scored by the 2-D
    phase-correlation peak against ``bq``; phase correlation absorbs the
    residual translation, which is exactly the unknown the descriptor
    discarded. The images are max-pooled by ``pool`` first: the check only
    needs gross structure and the smaller FFTs keep the stage inside the
    per-pair time budget (pool=1 disables). Returns (chosen_deg,
    (peak_1, peak_2), low_confidence); when both peaks fall below
    ``peak_floor`` the first candidate is chosen by convention and the
    flag is set.
    """
    a1, a2 = candidates
    if abs((a2 - a1) % 360.0 - 180.0) > 1e-6:
        raise ValueError(f"candidates must be 180 degrees apart, got {candidates}")
    qa = _pool_max(_as_array(bq), pool)
    pa = _pool_max(_as_array(bp), pool)
    fq = sfft.rfft2(np.ascontiguousarray(qa, dtype=np.float32))
    derot_1 = _rotate_content(pa, -a1).astype(np.float32)
    # De-rotating by -a2 = -a1 - 180 is the point reflection of derot_1
    # about the center: grid-exact, no second interpolation pass.
    derot_2 = np.ascontiguousarray(derot_1[::-1, ::-1])
    peaks = (
        _whitened_peak(fq, sfft.rfft2(derot_1), qa.shape),
        _whitened_peak(fq, sfft.rfft2(derot_2), qa.shape),
    )
    low_confidence = max(peaks) < peak_floor
    chosen = a1 if (low_confidence or peaks[0] >= peaks[1]) else a2
    return chosen, peaks, low_confidence


def estimate_heading(
    bq: BevImage,
    bp: BevImage,
    config: EstimatorConfig = EstimatorConfig(),
    mask_q: np.ndarray | None = None,
    mask_p: np.ndarray | None = None,
) -> HeadingEstimate:
    """Global heading angle from query BEV ``bq`` to reference BEV ``bp``.

    Returns the angle alpha in [0, 360) such that bp's content is bq's
    rotated by alpha (plus an arbitrary translation within range), i.e.
    bp ~= transform_bev(bq, alpha, t). Pipeline: sinograms -> per-row DFT
    magnitudes -> circular correlation -> parabolic sub-bin refinement ->
    half-turn disambiguation. Optional per-pixel masks (same shape, values
    in [0, 1]) are multiplied onto the BEVs before the sinogram.
    """
    if bq.spec != bp.spec:
        raise ValueError("query and reference BEVs must share a GridSpec")
    arr_q = _apply_mask(bq, mask_q)
    arr_p = _apply_mask(bp, mask_p)
    if not arr_q.any():
        raise EmptySceneError("query BEV is empty")
    if not arr_p.any():
        raise EmptySceneError("reference BEV is empty")
    rspec = config.radon_spec(bq.spec.size_px)
    sino_q = radon_transform(arr_q, rspec)
    sino_p = radon_transform(arr_p, rspec)
    if config.ablation_raw_sinogram:
        dq = InvariantDescriptor(data=sino_q.data)
        dp = InvariantDescriptor(data=sino_p.data)
        if config.normalization == "l2":
            for d in (dq, dp):
                norm = np.linalg.norm(d.data)
                if norm > 0:
                    d.data = d.data / norm
    else:
        dq = dft_magnitude_rows(sino_q, config.drop_dc, config.half_spectrum, config.normalization)
        dp = dft_magnitude_rows(sino_p, config.drop_dc, config.half_spectrum, config.normalization)
    corr = circular_correlate(dq, dp)
    n = config.n_angles
    dpb = 360.0 / n
    if config.refine:
        corr.refined_angle_deg = refine_peak(corr.scores, corr.best_bin)
    chosen, peaks, low_conf = disambiguate_halfturn(
        arr_q, arr_p, corr.ambiguity_pair, config.peak_floor, config.disamb_pool
    )
    corr.chosen = chosen
    winner_bin = corr.best_bin if chosen == corr.ambiguity_pair[0] else (corr.best_bin + n // 2) % n
    if config.refine:
        angle = refine_peak(corr.scores, winner_bin)
    else:
        angle = (winner_bin * dpb) % 360.0
    return HeadingEstimate(
        angle_deg=angle,
        confidence=corr.confidence,
        correlation=corr,
        disambiguation_peaks=peaks,
        low_confidence=low_conf,
    )


def _apply_mask(bev: BevImage, mask: np.ndarray | None) -> np.ndarray:
    if mask is None:
        return bev.grid
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != bev.grid.shape:
        raise ValueError(f"mask shape {mask.shape} does not match BEV {bev.grid.shape}")
    return bev.grid.astype(np.float64) * mask


def write_descriptor_npy(path: str | os.PathLike, desc: InvariantDescriptor) -> None:
    """Export as NPY v1.0 float32 [n_angles, n_freq]."""
    np.save(os.fspath(path), desc.data.astype(np.float32))
