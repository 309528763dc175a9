# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: dynamics.py (DİNAMİK AĞ - İLİŞKİSEL HAREKET TAHMİNİ)
# Konum: oodp_desk/ml/dynamics.py
# Açıklama:
# Dinamik nesnelerin maske ağırlıklı konumlarını hesaplar, her dinamik nesnenin
# çevresindeki w x w ufuk penceresinde diğer nesne maskelerini kırpar (tailor modülü),
# her (nesne, dinamik nesne) çifti için etki tensörünü öğrenir ve eylem koşullu hareket
# vektörünü üretir:
#
#   V_Dj = ( Σ_i E(O_i, D_j) + E_self(D_j) ) · a
#
# Kırpma merkezleri gradyandan koparılır: ağ "nereyi" değil "neyi" kırpacağını öğrenir.

# === SINIFLAR ===
# - PairEffectNet: Kırpılmış maske + meshgrid -> 2 x n_a etki tensörü
# - DynamicsNet: (n_O - 1) x n_D çift ağı + E_self tablosu

# === FONKSİYONLAR ===
# - object_position / object_position_safe: Maske beklenen konumu (ū, v̄)
# - crop_window: Ufuk penceresi kırpma (sıfır dolgulu bilinear)
# - motion_from_effects: Etki toplamı ve eylem seçimi
# - highway_loss: Koordinat uzayında erken geri besleme kaybı
# =======================================================================================

import torch
import torch.nn as nn

from config.settings import MODEL_CONFIG
from ml.bilinear import translate_sample
from utils.errors import DegenerateMaskError, InvalidWindowError, ShapeMismatchError


def _mask_moments(masks):
    height, width = masks.shape[-2:]
    rows = torch.arange(height, dtype=masks.dtype, device=masks.device)
    cols = torch.arange(width, dtype=masks.dtype, device=masks.device)
    mass = masks.sum(dim=(-2, -1))
    row_moment = (masks.sum(dim=-1) * rows).sum(dim=-1)
    col_moment = (masks.sum(dim=-2) * cols).sum(dim=-1)
    return mass, row_moment, col_moment


def object_position(masks, eps=None):
    """
    Maskenin beklenen konumu (ū, v̄), 0 tabanlı piksel koordinatları.

    Args:
        masks (Tensor): ... x H x W olasılık maskeleri
        eps (float, optional): En küçük geçerli maske kütlesi

    Returns:
        Tensor: ... x 2 (satır, sütun)

    Raises:
        DegenerateMaskError: Herhangi bir maskenin kütlesi eps veya altındaysa
    """
    eps = MODEL_CONFIG["position_eps"] if eps is None else eps
    mass, row_moment, col_moment = _mask_moments(masks)
    if bool((mass <= eps).any()):
        raise DegenerateMaskError(f"Maske kütlesi {float(mass.min()):.3g} <= {eps}")
    return torch.stack([row_moment / mass, col_moment / mass], dim=-1)


def object_position_safe(masks, eps=None):
    """
    object_position'ın hata fırlatmayan hali.

    Returns:
        tuple: (konumlar ... x 2, geçerlilik bayrağı ...). Dejenere maskelerin konumu
        pencere merkezini tanımlı tutmak için kare merkezidir.
    """
    eps = MODEL_CONFIG["position_eps"] if eps is None else eps
    height, width = masks.shape[-2:]
    mass, row_moment, col_moment = _mask_moments(masks)
    valid = mass > eps
    safe_mass = torch.where(valid, mass, torch.ones_like(mass))
    center = masks.new_tensor([(height - 1) / 2.0, (width - 1) / 2.0])
    positions = torch.stack([row_moment / safe_mass, col_moment / safe_mass], dim=-1)
    positions = torch.where(valid.unsqueeze(-1), positions, center.expand_as(positions))
    return positions, valid


def check_window(window, height, width):
    if window < 1 or window % 2 == 0 or window > min(height, width):
        raise InvalidWindowError(f"Ufuk penceresi w={window}, kare {height}x{width}")


def crop_window(masks, centers, window):
    """
    Merkez etrafında w x w pencere kırpar.

    Örnekleme ızgarası (u1 + ū - (w-1)/2, v1 + v̄ - (w-1)/2); kare dışı örnekler 0.
    Gradyan maske değerlerine akar, merkezlere akmaz.

    Args:
        masks (Tensor): B x H x W ya da B x C x H x W
        centers (Tensor): B x 2 (ū, v̄)
        window (int): Tek sayı w

    Returns:
        Tensor: B x w x w ya da B x C x w x w
    """
    height, width = masks.shape[-2:]
    check_window(window, height, width)

    squeeze = masks.dim() == 3
    images = masks.unsqueeze(1) if squeeze else masks
    offsets = centers.detach().to(masks.dtype) - (window - 1) / 2.0
    cropped = translate_sample(images, offsets, out_size=(window, window))
    return cropped.squeeze(1) if squeeze else cropped


def motion_from_effects(effects, e_self, actions):
    """
    V = (Σ_i E_i + E_self) · a

    Args:
        effects (list): B x 2 x n_a etki tensörleri (boş olabilir)
        e_self (Tensor): 2 x n_a ya da B x 2 x n_a doğal eğilim tablosu
        actions (Tensor): B x n_a tek-sıcak eylemler

    Returns:
        Tensor: B x 2 hareket vektörleri
    """
    total = e_self.expand(actions.shape[0], *e_self.shape[-2:])
    for effect in effects:
        total = total + effect
    return torch.einsum("bkn,bn->bk", total, actions.to(total.dtype))


def meshgrid_channels(window, dtype=torch.float32, device=None):
    """Pencereye yerel, [-1, 1] aralığında (x: sütun, y: satır) koordinat haritaları."""
    axis = torch.linspace(-1.0, 1.0, window, dtype=dtype, device=device)
    grid_y, grid_x = torch.meshgrid(axis, axis, indexing="ij")
    return torch.stack([grid_x, grid_y], dim=0)


class PairEffectNet(nn.Module):
    """Bir (nesne, dinamik nesne) çiftinin 2 x n_a etki tensörü."""

    def __init__(self, window=None, n_actions=None, channels=None, hidden=None, bn_momentum=None):
        super().__init__()
        self.window = MODEL_CONFIG["horizon_window"] if window is None else window
        self.n_actions = MODEL_CONFIG["n_actions"] if n_actions is None else n_actions
        channels = channels or MODEL_CONFIG["pair_channels"]
        hidden = MODEL_CONFIG["pair_hidden"] if hidden is None else hidden
        momentum = MODEL_CONFIG["bn_momentum"] if bn_momentum is None else bn_momentum

        blocks = []
        in_channels, size = 3, self.window
        for out_channels in channels:
            blocks += [
                nn.Conv2d(in_channels, out_channels, 3, stride=2, padding=1),
                nn.BatchNorm2d(out_channels, momentum=momentum),
                nn.ReLU(inplace=True),
            ]
            in_channels, size = out_channels, (size - 1) // 2 + 1
        self.features = nn.Sequential(*blocks)
        self.fc = nn.Sequential(nn.Linear(in_channels * size * size, hidden), nn.ReLU(inplace=True))
        self.head = nn.Linear(hidden, 2 * self.n_actions)

        self.register_buffer("grid", meshgrid_channels(self.window), persistent=False)

    def effect_from_input(self, inputs):
        """B x 3 x w x w girdiden B x 2 x n_a etki tensörü."""
        out = self.fc(self.features(inputs).flatten(1))
        return self.head(out).view(-1, 2, self.n_actions)

    def forward(self, cropped):
        if cropped.dim() != 3 or tuple(cropped.shape[-2:]) != (self.window, self.window):
            raise ShapeMismatchError(
                f"Kırpılmış maske B x {self.window} x {self.window} olmalı: {tuple(cropped.shape)}"
            )
        grid = self.grid.to(cropped.dtype).expand(cropped.shape[0], -1, -1, -1)
        return self.effect_from_input(torch.cat([cropped.unsqueeze(1), grid], dim=1))


class DynamicsNet(nn.Module):
    """Maskeler ve eylemden her dinamik nesne için hareket vektörü tahmin eder."""

    def __init__(self, n_static=None, n_dynamic=None, n_actions=None, window=None,
                 pair_channels=None, pair_hidden=None, bn_momentum=None):
        super().__init__()
        self.n_static = MODEL_CONFIG["n_static"] if n_static is None else n_static
        self.n_dynamic = MODEL_CONFIG["n_dynamic"] if n_dynamic is None else n_dynamic
        self.n_actions = MODEL_CONFIG["n_actions"] if n_actions is None else n_actions
        self.window = MODEL_CONFIG["horizon_window"] if window is None else window

        # pair_nets[j][k]: k. diğer nesnenin j. dinamik nesneye etkisi
        self.pair_nets = nn.ModuleList([
            nn.ModuleList([
                PairEffectNet(self.window, self.n_actions, pair_channels, pair_hidden, bn_momentum)
                for _ in range(self.n_objects - 1)
            ])
            for _ in range(self.n_dynamic)
        ])
        self.e_self = nn.Parameter(torch.zeros(self.n_dynamic, 2, self.n_actions))

    @property
    def n_objects(self):
        return self.n_static + self.n_dynamic

    def other_objects(self, j):
        """D_j dışındaki nesnelerin maske kanal indeksleri."""
        own = self.n_static + j
        return [c for c in range(self.n_objects) if c != own]

    def positions(self, masks):
        """Dinamik maskelerin konumları ve geçerlilik bayrakları."""
        return object_position_safe(masks[:, self.n_static:])

    def pair_effects(self, masks, centers, j):
        """D_j için her diğer nesnenin etki tensörü listesi."""
        effects = []
        for net, c in zip(self.pair_nets[j], self.other_objects(j)):
            effects.append(net(crop_window(masks[:, c], centers, self.window)))
        return effects

    def predict_motion(self, masks, actions, j):
        """
        Tek dinamik nesne için V_Dj. Dejenere maske DegenerateMaskError fırlatır.

        Args:
            masks (Tensor): B x n_O x H x W
            actions (Tensor): B x n_a tek-sıcak
            j (int): Dinamik nesne indeksi
        """
        centers = object_position(masks[:, self.n_static + j])
        return motion_from_effects(self.pair_effects(masks, centers, j), self.e_self[j], actions)

    def forward(self, masks, actions, centers=None):
        """
        Tüm dinamik nesneler için hareket.

        Args:
            masks (Tensor): B x n_O x H x W
            actions (Tensor): B x n_a
            centers (Tensor, optional): B x n_D x 2 sabit kırpma merkezleri

        Returns:
            dict: motions (B x n_D x 2), positions (B x n_D x 2), valid (B x n_D)
        """
        if masks.dim() != 4 or masks.shape[1] != self.n_objects:
            raise ShapeMismatchError(f"Maskeler B x {self.n_objects} x H x W olmalı: {tuple(masks.shape)}")
        if actions.shape != (masks.shape[0], self.n_actions):
            raise ShapeMismatchError(f"Eylemler B x {self.n_actions} olmalı: {tuple(actions.shape)}")

        positions, valid = self.positions(masks)
        crop_centers = positions if centers is None else centers

        motions = [
            motion_from_effects(self.pair_effects(masks, crop_centers[:, j], j), self.e_self[j], actions)
            for j in range(self.n_dynamic)
        ]
        return {"motions": torch.stack(motions, dim=1), "positions": positions, "valid": valid}


def highway_loss(positions_t, motions, positions_t1, valid=None):
    """
    Σ_j ||p_t + V - p_t+1||², batch ortalaması. Koordinat uzayında, HW normalizasyonu yok.

    Args:
        positions_t, motions, positions_t1 (Tensor): B x n_D x 2 (ya da n_D x 2)
        valid (Tensor, optional): B x n_D; geçersiz nesnelerin terimi atlanır
    """
    error = ((positions_t + motions - positions_t1) ** 2).sum(dim=-1)
    if valid is not None:
        error = error * valid.to(error.dtype)
    if error.dim() == 1:
        return error.sum()
    return error.sum(dim=-1).mean()
