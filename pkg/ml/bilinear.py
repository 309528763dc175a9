# oodp_desk/ml/bilinear.py
# Öteleme (translation) için ortak bilinear örnekleyici.
#
# Çıktı pikseli (i, j), kaynak görüntüden (i + o_u, j + o_v) konumunda bilinear olarak
# örneklenir. Kare dışındaki örnekler 0 katkı verir (sıfır dolgu).
#
# Ofset tam kısım + kesir olarak ayrıştırılır: tam sayı ofsette kesir 0 olduğundan
# sonuç kaynak piksellerin birebir kopyasıdır (birim dönüşüm ve tam sayı kırpmalar kesin).
# Gradyan hem görüntüye hem ofsete (kesir kısım üzerinden) akar.

import torch


def _gather(images, rows, cols):
    """
    Toplu (batch) tam sayı indeks okuması, aralık dışı indeksler için 0.

    Args:
        images (Tensor): B x C x H x W
        rows (LongTensor): B x h
        cols (LongTensor): B x w

    Returns:
        Tensor: B x C x h x w
    """
    batch, _, height, width = images.shape
    valid_rows = (rows >= 0) & (rows < height)
    valid_cols = (cols >= 0) & (cols < width)
    safe_rows = rows.clamp(0, height - 1)
    safe_cols = cols.clamp(0, width - 1)

    index_b = torch.arange(batch, device=images.device)[:, None, None]
    # Gelişmiş indeksleme sonucu B x h x w x C
    values = images[index_b, :, safe_rows[:, :, None], safe_cols[:, None, :]]
    values = values.permute(0, 3, 1, 2)

    valid = (valid_rows[:, :, None] & valid_cols[:, None, :]).unsqueeze(1)
    return torch.where(valid, values, torch.zeros((), dtype=values.dtype, device=values.device))


def translate_sample(images, offsets, out_size=None):
    """
    Görüntüleri ofset kadar kaydırılmış düzenli ızgarada bilinear örnekler.

    Args:
        images (Tensor): B x C x H x W kaynak görüntüler
        offsets (Tensor): B x 2 (satır, sütun) örnekleme ofseti, piksel
        out_size (tuple, optional): (h, w) çıktı boyutu, varsayılan (H, W)

    Returns:
        Tensor: B x C x h x w örneklenmiş görüntüler
    """
    if images.dim() != 4:
        raise ValueError(f"images B x C x H x W olmalı: {tuple(images.shape)}")
    if offsets.shape != (images.shape[0], 2):
        raise ValueError(f"offsets B x 2 olmalı: {tuple(offsets.shape)}")

    out_h, out_w = out_size if out_size is not None else images.shape[-2:]
    offsets = offsets.to(images.dtype)

    base = torch.floor(offsets.detach())
    frac = offsets - base
    base = base.long()

    rows = torch.arange(out_h, device=images.device)[None, :] + base[:, 0:1]
    cols = torch.arange(out_w, device=images.device)[None, :] + base[:, 1:2]

    frac_u = frac[:, 0].view(-1, 1, 1, 1)
    frac_v = frac[:, 1].view(-1, 1, 1, 1)

    top_left = _gather(images, rows, cols)
    top_right = _gather(images, rows, cols + 1)
    bottom_left = _gather(images, rows + 1, cols)
    bottom_right = _gather(images, rows + 1, cols + 1)

    top = top_left * (1 - frac_v) + top_right * frac_v
    bottom = bottom_left * (1 - frac_v) + bottom_right * frac_v
    return top * (1 - frac_u) + bottom * frac_u
