"""Feature-mask training for scan-to-submap heading estimation.

Two UNets (one per density distribution, weights not shared) produce
per-pixel masks that multiply the BEV occupancy images before a
differentiable clone of the sinogram heading estimator: exact-deposition
Radon transform, per-row DFT magnitudes, circular correlation over the
angle axis, softmax. Training minimizes the KL divergence between the
softmax heading distribution and a one-hot at the ground-truth bin.

The trainer talks to the estimator package only through its external
interfaces: PGM occupancy images, xyz_csv/kitti_bin cloud files, NPY float32
score vectors and masks, and the `radonyaw` CLI.
"""

from .config import TrainConfig
from .pipeline import HeadingDistribution, differentiable_pipeline
from .loss import kld_loss
from .radon_layer import RadonGeometry, correlation_scores, descriptor_rows
from .unet import MaskUNet

__all__ = [
    "HeadingDistribution",
    "MaskUNet",
    "RadonGeometry",
    "TrainConfig",
    "correlation_scores",
    "descriptor_rows",
    "differentiable_pipeline",
    "kld_loss",
]
