# oodp_desk/ml/objective.py
# Toplam eğitim hedefi:
#
#   L_total = L_highway + Σ λ_k · L_k
#
# OODP-p: prediction, entropy, reconstruction, consistency, background (100, 0.1, 100, 1, 1)
# OODP+p: prediction, entropy, proposal (10, 1, 1); yardımcı kayıplar hiç okunmaz.

from dataclasses import dataclass
from typing import Any, Optional

import torch

from config.schemas import normalize_variant
from config.settings import LOSS_WEIGHTS
from utils.errors import LossInvariantError, ShapeMismatchError

COMPONENTS = ("highway", "prediction", "entropy", "reconstruction", "consistency", "background", "proposal")


@dataclass
class LossBundle:
    """Bir adımın kayıp bileşenleri (skaler tensör ya da float)."""

    highway: Any = 0.0
    prediction: Any = 0.0
    entropy: Any = 0.0
    reconstruction: Optional[Any] = None
    consistency: Optional[Any] = None
    background: Optional[Any] = None
    proposal: Optional[Any] = None
    variant: str = "-p"


def proposal_loss(dynamic_masks, proposal):
    """
    Ağırlıklı piksel l2: (Σ_j M_Dj - M_proposal)², pozitif pikseller #negatif/#pozitif
    ağırlıklı (pozitif yoksa 0), HW ile normalize, batch ortalaması.

    Args:
        dynamic_masks (Tensor): B x n_D x H x W
        proposal (Tensor): B x H x W {0, 1}
    """
    coverage = dynamic_masks.sum(dim=1)
    if coverage.shape != proposal.shape:
        raise ShapeMismatchError(f"Öneri maskesi boyutu uyumsuz: {tuple(proposal.shape)} != {tuple(coverage.shape)}")

    proposal = proposal.to(coverage.dtype)
    height, width = coverage.shape[-2:]
    positive = (proposal > 0.5).to(coverage.dtype)
    n_pos = positive.sum(dim=(-2, -1))
    n_neg = height * width - n_pos
    pos_weight = torch.where(n_pos > 0, n_neg / n_pos.clamp(min=1), torch.zeros_like(n_pos))

    weights = positive * pos_weight.view(-1, 1, 1) + (1 - positive)
    per_sample = (weights * (coverage - proposal) ** 2).sum(dim=(-2, -1)) / (height * width)
    return per_sample.mean()


def total_loss(bundle, weights=None):
    """
    Varyanta göre ağırlıklı toplam kayıp.

    Args:
        bundle (LossBundle): Kayıp bileşenleri
        weights (dict, optional): Bileşen ağırlıkları, varsayılan LOSS_WEIGHTS[variant]

    Returns:
        Tensor | float: Toplam kayıp

    Raises:
        LossInvariantError: Okunan bir bileşen negatif ya da eksikse
    """
    variant = normalize_variant(bundle.variant)
    weights = weights or LOSS_WEIGHTS[variant]

    total = _checked(bundle, "highway")
    for name, weight in weights.items():
        total = total + weight * _checked(bundle, name)
    return total


def _checked(bundle, name):
    value = getattr(bundle, name)
    if value is None:
        raise LossInvariantError(f"'{name}' kaybı {bundle.variant} varyantı için gerekli")
    scalar = float(value.detach()) if torch.is_tensor(value) else float(value)
    if scalar < 0:
        raise LossInvariantError(f"'{name}' kaybı negatif: {scalar}")
    return value


def components_dict(bundle):
    """CSV loglaması için float bileşen sözlüğü (eksik bileşenler boş)."""
    row = {}
    for name in COMPONENTS:
        value = getattr(bundle, name)
        if value is None:
            row[name] = None
        else:
            row[name] = float(value.detach()) if torch.is_tensor(value) else float(value)
    return row
