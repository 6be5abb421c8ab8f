"""4-level UNet producing per-pixel masks in [0, 1]."""

from __future__ import annotations

import torch
from torch import nn


def _block(c_in: int, c_out: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(c_in, c_out, 3, padding=1),
        nn.ReLU(inplace=True),
        nn.Conv2d(c_out, c_out, 3, padding=1),
        nn.ReLU(inplace=True),
    )


class MaskUNet(nn.Module):
    """Single-channel encoder-decoder with skip connections and sigmoid output.

    Input and output share the spatial shape; the output is a per-pixel mask
    multiplied onto the BEV before the sinogram. The scan-side and
    submap-side networks use this same architecture with independent weights.
    """

    def __init__(self, base_channels: int = 8):
        super().__init__()
        b = base_channels
        self.enc1 = _block(1, b)
        self.enc2 = _block(b, 2 * b)
        self.enc3 = _block(2 * b, 4 * b)
        self.enc4 = _block(4 * b, 8 * b)
        self.pool = nn.MaxPool2d(2)
        self.up3 = nn.ConvTranspose2d(8 * b, 4 * b, 2, stride=2)
        self.dec3 = _block(8 * b, 4 * b)
        self.up2 = nn.ConvTranspose2d(4 * b, 2 * b, 2, stride=2)
        self.dec2 = _block(4 * b, 2 * b)
        self.up1 = nn.ConvTranspose2d(2 * b, b, 2, stride=2)
        self.dec1 = _block(2 * b, b)
        self.head = nn.Conv2d(b, 1, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() == 2:
            x = x.unsqueeze(0).unsqueeze(0)
            squeeze = True
        else:
            squeeze = False
        e1 = self.enc1(x)
        e2 = self.enc2(self.pool(e1))
        e3 = self.enc3(self.pool(e2))
        e4 = self.enc4(self.pool(e3))
        d3 = self.dec3(torch.cat([self.up3(e4), e3], dim=1))
        d2 = self.dec2(torch.cat([self.up2(d3), e2], dim=1))
        d1 = self.dec1(torch.cat([self.up1(d2), e1], dim=1))
        mask = torch.sigmoid(self.head(d1))
        return mask[0, 0] if squeeze else mask
