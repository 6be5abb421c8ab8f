import numpy as np
import pytest
import torch

from radonyaw_trainer.loss import kld_loss
from radonyaw_trainer.pipeline import HeadingDistribution, masked_correlation
from radonyaw_trainer.radon_layer import RadonGeometry, correlation_scores, descriptor_rows


def random_bev(rng, s=32, density=0.2):
    grid = (rng.random((s, s)) < density).astype(np.float64)
    ii = np.arange(s) - 0.5 * (s - 1)
    rr = ii[:, None] ** 2 + ii[None, :] ** 2
    grid[rr >= (0.45 * s) ** 2] = 0.0
    return grid


def test_sinogram_mass_is_exact():
    rng = np.random.default_rng(0)
    bev = random_bev(rng)
    geom = RadonGeometry(bev != 0, 48, 32, dtype=torch.float64)
    vals = torch.from_numpy(bev[bev != 0])
    sino = geom.sinogram(vals)
    row_masses = sino.sum(dim=1) * geom.pitch
    np.testing.assert_allclose(row_masses.numpy(), bev.sum(), rtol=1e-9)


def test_dense_matrix_oracle():
    # The layer must act as the fixed linear map W whose columns are the
    # per-pixel deposition patterns; build W densely and compare.
    rng = np.random.default_rng(1)
    s, n_ang = 16, 36
    bev = random_bev(rng, s=s, density=0.3)
    geom = RadonGeometry(bev != 0, n_ang, s, dtype=torch.float64)
    support = np.flatnonzero(bev.reshape(-1))
    w = np.zeros((n_ang * s, len(support)))
    for col in range(len(support)):
        unit = torch.zeros(len(support), dtype=torch.float64)
        unit[col] = 1.0
        w[:, col] = geom.sinogram(unit).numpy().reshape(-1)
    vals = rng.random(len(support))
    via_layer = geom.sinogram(torch.from_numpy(vals)).numpy().reshape(-1)
    via_matrix = w @ vals
    np.testing.assert_allclose(via_layer, via_matrix, rtol=1e-12, atol=1e-12)


def test_descriptor_shape_and_shift_invariance():
    rng = np.random.default_rng(2)
    rows = torch.from_numpy(rng.random((12, 20)))
    d = descriptor_rows(rows)
    assert d.shape == (12, 10)  # DC dropped, half spectrum
    rolled = torch.from_numpy(
        np.stack([np.roll(r, k + 1) for k, r in enumerate(rows.numpy())])
    )
    np.testing.assert_allclose(descriptor_rows(rolled).numpy(), d.numpy(), atol=1e-12)


def test_correlation_matches_numpy_rolls():
    rng = np.random.default_rng(3)
    dq = torch.from_numpy(rng.random((24, 7)))
    dp = torch.from_numpy(rng.random((24, 7)))
    fast = correlation_scores(dq, dp).numpy()
    slow = np.array(
        [(dq.numpy() * np.roll(dp.numpy(), s, axis=0)).sum() for s in range(24)]
    )
    np.testing.assert_allclose(fast, slow, rtol=1e-9)


def test_gradients_flow_and_zero_off_support():
    rng = np.random.default_rng(4)
    bev_q = random_bev(rng, s=16, density=0.25)
    bev_p = random_bev(rng, s=16, density=0.25)
    tq, tp = torch.from_numpy(bev_q), torch.from_numpy(bev_p)
    mask = torch.full((16, 16), 0.6, dtype=torch.float64, requires_grad=True)
    ones = torch.ones((16, 16), dtype=torch.float64)
    scores = masked_correlation(tq, tp, mask, ones, 36, normalize=True)
    dist = HeadingDistribution(p=torch.softmax(scores, dim=0), scores=scores)
    kld_loss(dist, 40.0).backward()
    grad = mask.grad.numpy()
    assert np.abs(grad[bev_q != 0]).max() > 0
    assert np.all(grad[bev_q == 0] == 0)


def test_gradcheck_against_central_differences():
    # 16x16 mask at 36 angles, step 1e-3, max relative error <= 1e-3.
    rng = np.random.default_rng(5)
    s, n_ang = 16, 36
    bev_q = random_bev(rng, s=s, density=0.3)
    bev_p = random_bev(rng, s=s, density=0.3)
    tq, tp = torch.from_numpy(bev_q), torch.from_numpy(bev_p)
    gq = RadonGeometry(bev_q != 0, n_ang, s, dtype=torch.float64)
    gp = RadonGeometry(bev_p != 0, n_ang, s, dtype=torch.float64)
    ones = torch.ones((s, s), dtype=torch.float64)

    def loss_of(m):
        scores = masked_correlation(tq, tp, m, ones, n_ang, gq, gp, normalize=True)
        return kld_loss(
            HeadingDistribution(p=torch.softmax(scores, dim=0), scores=scores), 40.0
        )

    mask = torch.full((s, s), 0.7, dtype=torch.float64, requires_grad=True)
    loss_of(mask).backward()
    g_an = mask.grad.numpy()
    h = 1e-3
    g_fd = np.zeros((s, s))
    base = mask.detach()
    with torch.no_grad():
        for i in range(s):
            for j in range(s):
                mp_ = base.clone()
                mp_[i, j] += h
                mm_ = base.clone()
                mm_[i, j] -= h
                g_fd[i, j] = (float(loss_of(mp_)) - float(loss_of(mm_))) / (2 * h)
    scale = np.abs(g_an).max()
    assert scale > 0
    denom = np.maximum(np.maximum(np.abs(g_an), np.abs(g_fd)), 1e-6 * scale)
    rel = np.abs(g_an - g_fd) / denom
    assert rel.max() <= 1e-3


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        correlation_scores(torch.ones(8, 3), torch.ones(8, 4))
    with pytest.raises(ValueError):
        masked_correlation(
            torch.ones(16, 16), torch.ones(16, 16), torch.ones(8, 8), torch.ones(16, 16), 36
        )
