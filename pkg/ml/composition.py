# oodp_desk/ml/composition.py
# Dinamik nesne piksellerinin tahmin edilen hareketle ötelenmesi ve iki akışın
# birleştirilmesi:
#
#   Î = Σ_j STN(M_Dj · I, V_Dj) + (1 - Σ_j STN(M_Dj, V_Dj)) · I_bg
#
# Örnekleme ters yönlüdür: çıktı (u, v) kaynaktan (u - V_u, v - V_v) okunur.

import torch

from ml.bilinear import translate_sample
from utils.errors import ShapeMismatchError


def spatial_transform(images, motions):
    """
    Görüntüleri V kadar öteler (sıfır dolgulu bilinear). Gradyan görüntüye ve V'ye akar.

    Args:
        images (Tensor): B x C x H x W
        motions (Tensor): B x 2 (satır, sütun) hareket, piksel

    Returns:
        Tensor: B x C x H x W
    """
    return translate_sample(images, -motions)


def _check_streams(frames, dynamic_masks, motions):
    if dynamic_masks.dim() != 4 or dynamic_masks.shape[0] != frames.shape[0]:
        raise ShapeMismatchError(f"Dinamik maskeler B x n_D x H x W olmalı: {tuple(dynamic_masks.shape)}")
    if motions.dim() != 3 or motions.shape[1] != dynamic_masks.shape[1] or motions.shape[2] != 2:
        raise ShapeMismatchError(
            f"Hareket sayısı maske sayısıyla uyuşmuyor: {tuple(motions.shape)} / {dynamic_masks.shape[1]} maske"
        )
    if dynamic_masks.shape[-2:] != frames.shape[-2:]:
        raise ShapeMismatchError(f"Maske ve kare boyutu uyumsuz: {tuple(dynamic_masks.shape)}")


def compose_prediction(frames, dynamic_masks, motions, backgrounds):
    """
    Sonraki kare tahmini.

    Args:
        frames (Tensor): B x 3 x H x W mevcut kare
        dynamic_masks (Tensor): B x n_D x H x W
        motions (Tensor): B x n_D x 2
        backgrounds (Tensor): B x 3 x H x W

    Returns:
        Tensor: B x 3 x H x W tahmin edilen kare
    """
    _check_streams(frames, dynamic_masks, motions)

    moved_pixels = torch.zeros_like(frames)
    moved_coverage = torch.zeros_like(frames[:, :1])
    for j in range(dynamic_masks.shape[1]):
        mask = dynamic_masks[:, j:j + 1]
        moved_pixels = moved_pixels + spatial_transform(mask * frames, motions[:, j])
        moved_coverage = moved_coverage + spatial_transform(mask, motions[:, j])

    return moved_pixels + (1 - moved_coverage) * backgrounds


def reconstruct_current(frames, dynamic_masks, backgrounds):
    """Σ_j M_Dj · I + (1 - Σ_j M_Dj) · I_bg"""
    coverage = dynamic_masks.sum(dim=1, keepdim=True)
    return coverage * frames + (1 - coverage) * backgrounds


def _sum_sq_hw(diff):
    height, width = diff.shape[-2:]
    return ((diff ** 2).flatten(1).sum(dim=1) / (height * width)).mean()


def prediction_loss(predicted, target):
    """||Î - I_t+1||² / HW"""
    if predicted.shape != target.shape:
        raise ShapeMismatchError(f"Tahmin ve hedef boyutu uyumsuz: {tuple(predicted.shape)} != {tuple(target.shape)}")
    return _sum_sq_hw(predicted - target)


def reconstruction_loss(frames, dynamic_masks, backgrounds):
    """Mevcut karenin maskeler ve arka plandan yeniden kurulma hatası / HW."""
    return _sum_sq_hw(reconstruct_current(frames, dynamic_masks, backgrounds) - frames)


def consistency_loss(masks_t, masks_t1, motions):
    """
    Σ_j ||M_Dj^(t+1) - STN(M_Dj^(t), V_Dj)||² / HW

    Args:
        masks_t, masks_t1 (Tensor): B x n_D x H x W dinamik maskeler
        motions (Tensor): B x n_D x 2
    """
    if masks_t.shape != masks_t1.shape:
        raise ShapeMismatchError(f"Maske boyutları uyumsuz: {tuple(masks_t.shape)} != {tuple(masks_t1.shape)}")
    moved = torch.cat(
        [spatial_transform(masks_t[:, j:j + 1], motions[:, j]) for j in range(masks_t.shape[1])], dim=1
    )
    return _sum_sq_hw(masks_t1 - moved)
