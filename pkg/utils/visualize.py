# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: visualize.py (MASKE, ARKA PLAN VE TAHMİN GÖRSELLEŞTİRME)
# Konum: oodp_desk/utils/visualize.py
# Açıklama:
# Eğitilmiş modelin çıktılarını PNG olarak dışa aktarır:
#   frame_XXX_object_C.png    -> giriş karesi x ikili nesne maskesi (eşik 0.5)
#   frame_XXX_background.png  -> arka plan çıkarıcı çıktısı
#   frame_XXX_prediction.png  -> tahmin edilen sonraki kare
#   frame_XXX_proposal.png    -> öneri maskesi kaplaması (sonraki kare verilmişse)
#   metadata.json             -> eşik, nesne sayısı, dosya listesi
#
# Ayrıca eğitim logundan kayıp eğrisi çizer (matplotlib, ekransız Agg arka ucu).
# =======================================================================================

import json
import logging
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import torch  # noqa: E402
from PIL import Image  # noqa: E402

from config.settings import EVAL_CONFIG  # noqa: E402
from core.physics import one_hot  # noqa: E402
from core.renderer import frame_to_model, model_to_frame  # noqa: E402
from data.collector import compute_proposal_mask  # noqa: E402

PROPOSAL_COLOR = np.array((255, 0, 0), dtype=np.float32)


def _save_png(array, path):
    Image.fromarray(np.ascontiguousarray(array)).save(path)
    return path


def binarize_masks(masks, threshold=None):
    """n_O x H x W olasılıkları eşikle ikiler (mask >= eşik)."""
    threshold = EVAL_CONFIG["mask_threshold"] if threshold is None else threshold
    return np.asarray(masks) >= threshold


def masked_images(frame, masks, threshold=None):
    """Her nesne için kare x ikili maske; maske dışı pikseller siyah."""
    binary = binarize_masks(masks, threshold)
    return [np.where(b[..., None], frame, 0).astype(np.uint8) for b in binary]


def proposal_overlay(frame, proposal, alpha=0.5):
    tinted = frame.astype(np.float32)
    hit = proposal.astype(bool)
    tinted[hit] = (1 - alpha) * tinted[hit] + alpha * PROPOSAL_COLOR
    return np.clip(tinted, 0, 255).astype(np.uint8)


@torch.no_grad()
def visualize(model, frames, actions, out_dir, next_frames=None, threshold=None, device="cpu"):
    """
    Kareler için maske, arka plan, tahmin ve öneri PNG'lerini yazar.

    Args:
        model (OODPModel): Eğitilmiş model
        frames (list): H x W x 3 uint8 kareler
        actions (list): Eylem indeksleri
        out_dir (str): Çıktı klasörü
        next_frames (list, optional): Öneri kaplaması için sonraki kareler
        threshold (float, optional): İkileştirme eşiği (varsayılan 0.5)

    Returns:
        dict: metadata (dosya listesi dahil)
    """
    threshold = EVAL_CONFIG["mask_threshold"] if threshold is None else threshold
    os.makedirs(out_dir, exist_ok=True)

    was_training = model.training
    model.eval()
    batch = torch.from_numpy(np.stack([frame_to_model(f).transpose(2, 0, 1) for f in frames])).to(device)
    codes = torch.from_numpy(np.stack([one_hot(a, model.dynamics.n_actions) for a in actions])).to(device)
    try:
        out = model.predict(batch, codes)
    finally:
        model.train(was_training)

    masks = out["masks"].cpu().numpy()
    backgrounds = model_to_frame(out["background"].cpu().numpy().transpose(0, 2, 3, 1))
    predictions = model_to_frame(out["prediction"].cpu().numpy().transpose(0, 2, 3, 1))

    files = []
    for i, frame in enumerate(frames):
        prefix = os.path.join(out_dir, f"frame_{i:03d}")
        for c, image in enumerate(masked_images(frame, masks[i], threshold)):
            files.append(_save_png(image, f"{prefix}_object_{c}.png"))
        files.append(_save_png(backgrounds[i], f"{prefix}_background.png"))
        files.append(_save_png(predictions[i], f"{prefix}_prediction.png"))
        if next_frames is not None:
            proposal = compute_proposal_mask(frame, next_frames[i])
            files.append(_save_png(proposal_overlay(frame, proposal), f"{prefix}_proposal.png"))

    metadata = {
        "threshold": threshold,
        "binarization": "mask >= threshold",
        "n_objects": int(masks.shape[1]),
        "n_static": int(model.n_static),
        "n_dynamic": int(model.n_dynamic),
        "n_frames": len(frames),
        "motions": out["motions"].cpu().numpy().tolist(),
        "files": [os.path.basename(f) for f in files],
    }
    with open(os.path.join(out_dir, "metadata.json"), "w", encoding="utf-8") as f:
        json.dump(metadata, f, indent=2)

    logging.info(f"Görselleştirme yazıldı: {out_dir} ({len(files)} PNG)")
    return metadata


def plot_training_curve(history, out_path):
    """
    Eğitim logundan kayıp eğrilerini çizer.

    Args:
        history (DataFrame | str): training_log.csv içeriği ya da yolu
        out_path (str): PNG yolu
    """
    if isinstance(history, str):
        history = pd.read_csv(history)

    plt.figure(figsize=(12, 5))

    plt.subplot(1, 2, 1)
    plt.plot(history["step"], history["total"], label="total")
    plt.title("Toplam kayıp")
    plt.xlabel("Adım")
    plt.ylabel("Kayıp")
    plt.yscale("log")
    plt.legend()

    plt.subplot(1, 2, 2)
    for column in ("highway", "prediction", "entropy", "reconstruction", "consistency", "background", "proposal"):
        if column in history and history[column].notna().any():
            plt.plot(history["step"], history[column], label=column)
    plt.title("Kayıp bileşenleri")
    plt.xlabel("Adım")
    plt.yscale("symlog", linthresh=1e-4)
    plt.legend()

    plt.tight_layout()
    plt.savefig(out_path)
    plt.close()
    logging.info(f"Eğitim grafiği kaydedildi: {out_path}")
    return out_path
