"""Training loop, evaluation with half-turn resolution, mask export."""

from __future__ import annotations

import os

import numpy as np
import torch

from .bev_io import read_bev
from .config import TrainConfig
from .data import PairDataset
from .loss import gt_bin, kld_loss
from .pipeline import differentiable_pipeline
from .radon_layer import RadonGeometry
from .unet import MaskUNet


def _rotate_nearest(arr: np.ndarray, alpha_deg: float) -> np.ndarray:
    """Nearest-neighbor content rotation about the array center."""
    s = arr.shape[0]
    c = 0.5 * (s - 1)
    a = np.deg2rad(alpha_deg)
    ii = np.arange(s) - c
    src_x = np.cos(a) * ii[:, None] + np.sin(a) * ii[None, :] + c
    src_y = -np.sin(a) * ii[:, None] + np.cos(a) * ii[None, :] + c
    xi = np.rint(src_x).astype(int)
    yi = np.rint(src_y).astype(int)
    ok = (xi >= 0) & (xi < s) & (yi >= 0) & (yi < s)
    out = np.zeros_like(arr)
    out[ok] = arr[xi[ok], yi[ok]]
    return out


def _phase_peak(a: np.ndarray, b: np.ndarray) -> float:
    fa = np.fft.rfft2(a)
    fb = np.fft.rfft2(b)
    cross = fa * np.conj(fb)
    mag = np.abs(cross)
    floor = mag.max() * 1e-12 + 1e-30
    return float(np.fft.irfft2(cross / np.maximum(mag, floor), s=a.shape).max())


def resolve_half_turn(
    scan: np.ndarray, submap: np.ndarray, angle_deg: float
) -> float:
    """Pick ``angle_deg`` or its half-turn twin by image-space phase correlation."""
    twin = (angle_deg + 180.0) % 360.0
    p0 = _phase_peak(scan, _rotate_nearest(submap, -angle_deg))
    p1 = _phase_peak(scan, _rotate_nearest(submap, -twin))
    return angle_deg if p0 >= p1 else twin


def angular_error_deg(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


@torch.no_grad()
def evaluate(
    net_q: MaskUNet,
    net_p: MaskUNet,
    dataset: PairDataset,
    tolerance_deg: float = 3.0,
) -> float:
    """Fraction of pairs whose resolved heading lands within the tolerance."""
    cfg = dataset.config
    hits = 0
    for idx in range(len(dataset)):
        scan, submap, gt, geom_q, geom_p = dataset.sample(idx)
        dist = differentiable_pipeline(scan, submap, net_q, net_p, cfg.n_angles, geom_q, geom_p)
        angle = dist.argmax_bin * cfg.degrees_per_bin
        mask_q = net_q(scan).numpy()
        mask_p = net_p(submap).numpy()
        resolved = resolve_half_turn(
            scan.numpy() * mask_q, submap.numpy() * mask_p, angle
        )
        if angular_error_deg(resolved, gt) <= tolerance_deg:
            hits += 1
    return hits / len(dataset)


def train(
    dataset: PairDataset,
    config: TrainConfig,
    out_dir: str | os.PathLike | None = None,
    log: bool = True,
) -> dict:
    """Adam training of the two mask networks; checkpoints saved per epoch.

    Returns {"net_q", "net_p", "history"}; aborts with a diagnostic when the
    loss turns non-finite.
    """
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed + 1)
    net_q = MaskUNet(config.base_channels)
    net_p = MaskUNet(config.base_channels)
    opt = torch.optim.Adam(
        list(net_q.parameters()) + list(net_p.parameters()), lr=config.lr
    )
    history = []
    order = np.arange(len(dataset))
    for epoch in range(config.epochs):
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            opt.zero_grad()
            loss = 0.0
            for idx in batch:
                scan, submap, gt, geom_q, geom_p = dataset.sample(
                    int(idx), rng if config.augment_rotation else None
                )
                try:
                    dist = differentiable_pipeline(
                        scan, submap, net_q, net_p, config.n_angles, geom_q, geom_p
                    )
                except ValueError as exc:  # invalid heading distribution
                    raise RuntimeError(
                        f"training diverged: {exc} (epoch {epoch}, pair {int(idx)})"
                    ) from exc
                loss = loss + kld_loss(dist, gt, config.twin_aware_loss)
            loss = loss / len(batch)
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"training diverged: non-finite loss at epoch {epoch}, "
                    f"batch starting {start}"
                )
            loss.backward()
            opt.step()
            epoch_loss += float(loss.detach()) * len(batch)
        epoch_loss /= len(order)
        history.append({"epoch": epoch, "loss": epoch_loss})
        if log:
            print(f"epoch {epoch:3d} loss {epoch_loss:.4f}")
        if out_dir is not None:
            save_checkpoint(os.path.join(out_dir, f"ckpt_{epoch:04d}.pt"), net_q, net_p, config)
    if out_dir is not None:
        save_checkpoint(os.path.join(out_dir, "final.pt"), net_q, net_p, config)
    return {"net_q": net_q, "net_p": net_p, "history": history}


def save_checkpoint(path, net_q: MaskUNet, net_p: MaskUNet, config: TrainConfig) -> None:
    os.makedirs(os.path.dirname(os.fspath(path)) or ".", exist_ok=True)
    torch.save(
        {"net_q": net_q.state_dict(), "net_p": net_p.state_dict(), "config": config.as_dict()},
        os.fspath(path),
    )


def load_checkpoint(path) -> tuple[MaskUNet, MaskUNet, TrainConfig]:
    blob = torch.load(os.fspath(path), weights_only=True)
    config = TrainConfig(**blob["config"])
    net_q = MaskUNet(config.base_channels)
    net_p = MaskUNet(config.base_channels)
    net_q.load_state_dict(blob["net_q"])
    net_p.load_state_dict(blob["net_p"])
    net_q.eval()
    net_p.eval()
    return net_q, net_p, config


@torch.no_grad()
def export_masks(
    checkpoint_path,
    manifest_rows: list[dict],
    out_dir,
) -> list[dict]:
    """Materialize NPY float32 masks for (query, reference) PGM pairs.

    Returns the manifest rows with mask_q/mask_p columns pointing at the
    exported files, ready for the estimator CLI.
    """
    net_q, net_p, _config = load_checkpoint(checkpoint_path)
    os.makedirs(out_dir, exist_ok=True)
    out_rows = []
    for i, row in enumerate(manifest_rows):
        bev_q = torch.from_numpy(read_bev(row["query"]))
        bev_p = torch.from_numpy(read_bev(row["reference"]))
        mq = net_q(bev_q).numpy().astype(np.float32)
        mp = net_p(bev_p).numpy().astype(np.float32)
        mq_path = os.path.join(out_dir, f"{i:04d}_mask_q.npy")
        mp_path = os.path.join(out_dir, f"{i:04d}_mask_p.npy")
        np.save(mq_path, mq)
        np.save(mp_path, mp)
        out = dict(row)
        out["mask_q"] = mq_path
        out["mask_p"] = mp_path
        out_rows.append(out)
    return out_rows
