"""Training configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters; grid/angle settings must match the estimator config
    that will consume the exported masks at inference time."""

    grid_size_px: int = 64
    meters_per_px: float = 1.5
    n_angles: int = 120
    lr: float = 1e-4
    batch_size: int = 5
    epochs: int = 60
    seed: int = 0
    augment_rotation: bool = True
    twin_aware_loss: bool = False
    base_channels: int = 8

    def __post_init__(self):
        if self.grid_size_px % 16 != 0:
            raise ValueError("grid_size_px must be a multiple of 16 (4-level UNet)")
        if self.n_angles % 2 != 0 or self.n_angles < 8:
            raise ValueError("n_angles must be even and >= 8")

    @property
    def n_offsets(self) -> int:
        return self.grid_size_px

    @property
    def degrees_per_bin(self) -> float:
        return 360.0 / self.n_angles

    def as_dict(self) -> dict:
        return asdict(self)
