# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: perception.py (NESNE DEDEKTÖRÜ VE ARKA PLAN ÇIKARICI)
# Konum: oodp_desk/ml/perception.py
# Açıklama:
# Kareleri nesne maskelerine (ObjectDetector) ve zamanla değişmeyen arka plan
# görüntüsüne (BackgroundExtractor) ayrıştıran ağlar ile ilgili kayıplar.
#
# Tensör düzeni: B x C x H x W (PyTorch NCHW). Kareler [-1, 1] aralığındadır.

# === OBJECT DETECTOR ===
# - n_O ayrı CNN (aynı mimari, ağırlık paylaşımı yok); her biri tek kanal üretir
# - Katmanlar R(BN(Conv(64,5,2))), R(BN(Conv(64,3,2))), R(BN(Conv(64,3,1))),
#   R(BN(Conv(32,1,1))), R(BN(Conv(1,3,1)))
# - H/4 x W/4 çıktılar H x W boyutuna bilinear büyütülür, birleştirilir, piksel softmax
# - Kanal sırası: önce n_S statik, sonra n_D dinamik maske

# === BACKGROUND EXTRACTOR ===
# - Kodlayıcı: stride-2 Conv + ReLU aşamaları, ardından iki tam bağlı katman (128 gizli)
# - Kod çözücü: tam bağlı katman + stride-2 ters evrişim + ReLU, son katmanda tanh
# =======================================================================================

import torch
import torch.nn as nn
import torch.nn.functional as F

from config.settings import MODEL_CONFIG
from utils.errors import ShapeMismatchError


def _check_frames(frames):
    if frames.dim() != 4 or frames.shape[1] != 3:
        raise ShapeMismatchError(f"Kare tensörü B x 3 x H x W olmalı: {tuple(frames.shape)}")


def masks_from_logits(logits):
    """Piksel başına softmax: B x n_O x H x W logitlerden maske olasılıkları."""
    return torch.softmax(logits, dim=1)


class ObjectDetector(nn.Module):
    """Kareyi n_O = n_S + n_D nesne maskesine ayrıştırır."""

    def __init__(self, n_static=None, n_dynamic=None, layers=None, bn_momentum=None):
        super().__init__()
        self.n_static = MODEL_CONFIG["n_static"] if n_static is None else n_static
        self.n_dynamic = MODEL_CONFIG["n_dynamic"] if n_dynamic is None else n_dynamic
        layers = layers or MODEL_CONFIG["detector_layers"]
        momentum = MODEL_CONFIG["bn_momentum"] if bn_momentum is None else bn_momentum

        self.branches = nn.ModuleList(
            [self._make_branch(layers, momentum) for _ in range(self.n_objects)]
        )

    @property
    def n_objects(self):
        return self.n_static + self.n_dynamic

    @staticmethod
    def _make_branch(layers, momentum):
        blocks = []
        in_channels = 3
        for out_channels, kernel, stride in layers:
            blocks += [
                nn.Conv2d(in_channels, out_channels, kernel, stride=stride, padding=kernel // 2),
                nn.BatchNorm2d(out_channels, momentum=momentum),
                nn.ReLU(inplace=True),
            ]
            in_channels = out_channels
        return nn.Sequential(*blocks)

    def logits(self, frames):
        """F: B x n_O x H x W nesne skorları."""
        _check_frames(frames)
        size = frames.shape[-2:]
        maps = [
            F.interpolate(branch(frames), size=size, mode="bilinear", align_corners=False)
            for branch in self.branches
        ]
        return torch.cat(maps, dim=1)

    def forward(self, frames):
        return masks_from_logits(self.logits(frames))

    def split(self, masks):
        """Maskeleri (statik, dinamik) olarak ayırır."""
        return masks[:, :self.n_static], masks[:, self.n_static:]


def entropy_loss(masks):
    """
    Piksel başına entropi: Σ_c -p log p, HW ile normalize, batch ortalaması.

    0·log 0 = 0 kabul edilir (xlogy).
    """
    height, width = masks.shape[-2:]
    per_pixel = -torch.special.xlogy(masks, masks).sum(dim=1)
    return (per_pixel.sum(dim=(-2, -1)) / (height * width)).mean()


class BackgroundExtractor(nn.Module):
    """Kodlayıcı-kod çözücü arka plan çıkarıcı (tanh çıkış, [-1, 1])."""

    def __init__(self, frame_shape, channels=None, stages=None, hidden=None):
        super().__init__()
        channels = MODEL_CONFIG["bg_channels"] if channels is None else channels
        stages = MODEL_CONFIG["bg_stages"] if stages is None else stages
        hidden = MODEL_CONFIG["bg_hidden"] if hidden is None else hidden
        self.frame_shape = tuple(frame_shape)

        # Her aşamadaki uzamsal boyutlar (k=3, s=2, p=1)
        sizes = [self.frame_shape]
        for _ in range(stages):
            h, w = sizes[-1]
            sizes.append(((h - 1) // 2 + 1, (w - 1) // 2 + 1))
        self.sizes = sizes
        self.channels = channels

        encoder = []
        in_channels = 3
        for _ in range(stages):
            encoder += [nn.Conv2d(in_channels, channels, 3, stride=2, padding=1), nn.ReLU(inplace=True)]
            in_channels = channels
        self.encoder = nn.Sequential(*encoder)

        bottom_h, bottom_w = sizes[-1]
        flat = channels * bottom_h * bottom_w
        self.encoder_fc = nn.Sequential(
            nn.Linear(flat, hidden),
            nn.ReLU(inplace=True),
            nn.Linear(hidden, hidden),
        )
        self.decoder_fc = nn.Sequential(nn.Linear(hidden, flat), nn.ReLU(inplace=True))

        decoder = []
        for stage in range(stages, 0, -1):
            (in_h, in_w), (out_h, out_w) = sizes[stage], sizes[stage - 1]
            out_channels = 3 if stage == 1 else channels
            decoder.append(nn.ConvTranspose2d(
                channels, out_channels, 3, stride=2, padding=1,
                output_padding=(out_h - (2 * in_h - 1), out_w - (2 * in_w - 1)),
            ))
            decoder.append(nn.Tanh() if stage == 1 else nn.ReLU(inplace=True))
        self.decoder = nn.Sequential(*decoder)

    @property
    def final_deconv(self):
        return self.decoder[-2]

    def forward(self, frames):
        _check_frames(frames)
        if tuple(frames.shape[-2:]) != self.frame_shape:
            raise ShapeMismatchError(
                f"Arka plan çıkarıcı {self.frame_shape} için kuruldu, gelen {tuple(frames.shape[-2:])}"
            )
        code = self.encoder_fc(self.encoder(frames).flatten(1))
        bottom_h, bottom_w = self.sizes[-1]
        features = self.decoder_fc(code).view(-1, self.channels, bottom_h, bottom_w)
        return self.decoder(features)


def background_loss(bg_t, bg_t1):
    """||I_bg^(t+1) - I_bg^(t)||² / HW, batch ortalaması."""
    if bg_t.shape != bg_t1.shape:
        raise ShapeMismatchError(f"Arka plan boyutları uyumsuz: {tuple(bg_t.shape)} != {tuple(bg_t1.shape)}")
    height, width = bg_t.shape[-2:]
    return (((bg_t1 - bg_t) ** 2).sum(dim=(1, 2, 3)) / (height * width)).mean()
