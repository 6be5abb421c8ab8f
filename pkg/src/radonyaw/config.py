"""Shared configuration for the estimation pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

from .bev import GridSpec
from .radon import RadonSpec

DEFAULT_Z_MIN_M = -1.2
DEFAULT_Z_MAX_M = 30.0


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs for the heading estimator.

    Defaults follow the 400x400 @ 0.5 m/px grid with one sinogram row per
    degree. ``drop_dc`` removes the per-row DFT bin 0, whose value is the row
    mass and therefore near-constant across rows (it adds an uninformative
    rank-one bias to every correlation score). ``half_spectrum`` keeps bins
    1..n_offsets/2 of the real-input spectrum. ``normalization='l2'`` scales
    each descriptor to unit Frobenius norm so confidences compare across
    scene masses; 'raw' is the faithful default. ``ablation_raw_sinogram``
    skips the magnitude step and correlates raw sinogram rows (translation
    then biases the estimate; kept for experiments).
    """

    grid: GridSpec = field(default_factory=GridSpec)
    n_angles: int = 360
    n_offsets: int | None = None
    kernel: str = "linear"
    sample_step_px: float = 0.5
    drop_dc: bool = True
    half_spectrum: bool = True
    normalization: str = "raw"
    refine: bool = True
    ablation_raw_sinogram: bool = False
    peak_floor: float = 1e-6
    disamb_pool: int = 2

    def __post_init__(self):
        if self.n_angles < 8 or self.n_angles % 2 != 0:
            raise ValueError(
                f"n_angles must be even and >= 8 for half-turn handling, got {self.n_angles}"
            )
        if self.normalization not in ("raw", "l2"):
            raise ValueError(f"unknown normalization {self.normalization!r}")

    def radon_spec(self, source_size_px: int | None = None) -> RadonSpec:
        size = source_size_px if source_size_px is not None else self.grid.size_px
        return RadonSpec(
            n_angles=self.n_angles,
            n_offsets=self.n_offsets if self.n_offsets is not None else size,
            kernel=self.kernel,
            sample_step_px=self.sample_step_px,
        )
