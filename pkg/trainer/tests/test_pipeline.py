import numpy as np
import pytest
import torch

from radonyaw_trainer.config import TrainConfig
from radonyaw_trainer.data import PairDataset
from radonyaw_trainer.pipeline import differentiable_pipeline
from radonyaw_trainer.unet import MaskUNet


class OnesNet(torch.nn.Module):
    def forward(self, x):
        return torch.ones_like(x)


@pytest.fixture(scope="module")
def small_dataset():
    cfg = TrainConfig(grid_size_px=48, n_angles=60, epochs=1)
    return PairDataset(cfg, n_pairs=3), cfg


def test_identity_pair_peaks_at_zero_or_twin(small_dataset):
    ds, cfg = small_dataset
    scan, _, _, geom, _ = ds.sample(0)
    dist = differentiable_pipeline(scan, scan, OnesNet(), OnesNet(), cfg.n_angles, geom, geom)
    assert dist.argmax_bin in (0, cfg.n_angles // 2)


def test_distribution_sums_to_one(small_dataset):
    ds, cfg = small_dataset
    torch.manual_seed(1)
    net_q, net_p = MaskUNet(4), MaskUNet(4)
    for idx in range(len(ds)):
        scan, submap, _, gq, gp = ds.sample(idx)
        dist = differentiable_pipeline(scan, submap, net_q, net_p, cfg.n_angles, gq, gp)
        p = dist.p.detach()
        assert float(p.sum()) == pytest.approx(1.0, abs=1e-6)
        assert float(p.min()) >= 0.0


def test_unet_output_shape_and_range():
    torch.manual_seed(2)
    net = MaskUNet(4)
    x = torch.rand(64, 64)
    with torch.no_grad():
        mask = net(x)
    assert mask.shape == (64, 64)
    assert float(mask.min()) >= 0.0 and float(mask.max()) <= 1.0


def test_networks_do_not_share_weights():
    torch.manual_seed(3)
    a, b = MaskUNet(4), MaskUNet(4)
    pa = torch.cat([p.flatten() for p in a.parameters()])
    pb = torch.cat([p.flatten() for p in b.parameters()])
    assert not torch.equal(pa, pb)


def test_dataset_deterministic():
    cfg = TrainConfig(grid_size_px=48, n_angles=60, epochs=1, seed=9)
    d1 = PairDataset(cfg, n_pairs=2)
    d2 = PairDataset(cfg, n_pairs=2)
    for i in range(2):
        np.testing.assert_array_equal(
            d1.pairs[i].scan_bev.numpy(), d2.pairs[i].scan_bev.numpy()
        )
        assert d1.pairs[i].gt_yaw_deg == d2.pairs[i].gt_yaw_deg


def test_augmented_sample_adjusts_gt():
    cfg = TrainConfig(grid_size_px=48, n_angles=60, epochs=1, augment_rotation=True)
    ds = PairDataset(cfg, n_pairs=1)
    rng = np.random.default_rng(5)
    scan, submap, gt, _, _ = ds.sample(0, rng)
    base = ds.pairs[0]
    assert 0.0 <= gt < 360.0
    # The submap side is untouched by augmentation.
    np.testing.assert_array_equal(submap.numpy(), base.submap_bev.numpy())
