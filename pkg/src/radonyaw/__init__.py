"""Global yaw estimation between gravity-aligned point clouds.

The pipeline turns each cloud into a binary bird's-eye-view occupancy image,
takes its sinogram (discrete Radon transform), collapses every sinogram row to
the magnitude of its 1-D DFT (which is invariant to the row shifts that
in-plane translation causes), and solves the heading globally by circular
cross-correlation over the angle axis. The 180-degree twin that the magnitude
step introduces is resolved by phase-correlating the two candidate rotations
in image space.
"""

from .bev import BevImage, GridSpec, rasterize_bev, transform_bev
from .cloud import (
    PointCloud,
    PoseRecord,
    build_submap,
    load_pointcloud,
    load_pose_table,
    remove_ground,
    transform_cloud,
    write_pointcloud,
)
from .config import EstimatorConfig
from .evaluate import ErrorStats, PairManifest, angular_error_deg, evaluate_pairs
from .heading import (
    CorrelationResult,
    EmptySceneError,
    HeadingEstimate,
    InvariantDescriptor,
    circular_correlate,
    dft_magnitude_rows,
    disambiguate_halfturn,
    estimate_heading,
    refine_peak,
)
from .radon import RadonSpec, Sinogram, radon_transform, radon_transform_sampled, roll_rows
from .toycase import ToycaseGrid, default_toycase_grid, make_toycase_scene, run_toycase

__version__ = "0.1.0"

__all__ = [
    "BevImage",
    "CorrelationResult",
    "EmptySceneError",
    "ErrorStats",
    "EstimatorConfig",
    "GridSpec",
    "HeadingEstimate",
    "InvariantDescriptor",
    "PairManifest",
    "PointCloud",
    "PoseRecord",
    "RadonSpec",
    "Sinogram",
    "ToycaseGrid",
    "angular_error_deg",
    "build_submap",
    "circular_correlate",
    "default_toycase_grid",
    "dft_magnitude_rows",
    "disambiguate_halfturn",
    "estimate_heading",
    "evaluate_pairs",
    "load_pointcloud",
    "load_pose_table",
    "make_toycase_scene",
    "radon_transform",
    "radon_transform_sampled",
    "rasterize_bev",
    "refine_peak",
    "remove_ground",
    "roll_rows",
    "run_toycase",
    "transform_bev",
    "transform_cloud",
    "write_pointcloud",
]
