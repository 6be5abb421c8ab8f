import numpy as np
import pytest

import radonyaw as ry


@pytest.fixture(scope="session")
def toy_scene():
    return ry.make_toycase_scene(seed=0)


@pytest.fixture(scope="session")
def toy_bev(toy_scene):
    return ry.rasterize_bev(toy_scene, ry.GridSpec())


@pytest.fixture(scope="session")
def dense_bev():
    """High-occupancy scene (solid blocks): tighter interpolation bounds."""
    rng = np.random.default_rng(7)
    spec = ry.GridSpec()
    grid = np.zeros((spec.size_px, spec.size_px), dtype=np.uint8)
    c = spec.size_px // 2
    for _ in range(60):
        ang = rng.uniform(0, 2 * np.pi)
        r = 160 * np.sqrt(rng.uniform(0.02, 1.0))
        cx = int(c + r * np.cos(ang))
        cy = int(c + r * np.sin(ang))
        w, h = rng.integers(6, 40, size=2)
        grid[max(0, cx - w) : cx + w, max(0, cy - h) : cy + h] = 1
    ii = np.arange(spec.size_px) - spec.center_index
    rr = ii[:, None] ** 2 + ii[None, :] ** 2
    grid[rr >= (0.92 * c) ** 2] = 0
    return ry.BevImage(grid=grid, spec=spec)


@pytest.fixture()
def small_config():
    """Quick estimator setup: 100 px grid, 2-degree bins."""
    return ry.EstimatorConfig(
        grid=ry.GridSpec(size_px=100, meters_per_px=0.5),
        n_angles=180,
        n_offsets=100,
    )
