# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: model.py (OODP AĞI VE CHECKPOINT ARŞİVİ)
# Konum: oodp_desk/ml/model.py
# Açıklama:
# Object Detector, Dynamics Net ve Background Extractor bileşenlerini tek bir ağda
# birleştirir. Bir geçişin (kare_t, eylem, kare_t+1) iki karesi de algı katmanından geçer;
# t ve t+1 maskeleri highway ve tutarlılık kayıpları için gereklidir.
#
# Checkpoint dosyası sürümlüdür: format_version uyuşmazsa CheckpointError.
# =======================================================================================

import logging
import os

import torch
import torch.nn as nn

from config.schemas import TrainConfig, normalize_variant
from config.settings import MODEL_CONFIG
from ml.composition import compose_prediction, consistency_loss, prediction_loss, reconstruction_loss
from ml.dynamics import DynamicsNet, highway_loss
from ml.objective import LossBundle, proposal_loss
from ml.perception import BackgroundExtractor, ObjectDetector, background_loss, entropy_loss
from utils.errors import CheckpointError


class OODPModel(nn.Module):
    """Nesne yönelimli dinamik tahmin ağı."""

    def __init__(self, frame_shape, n_static=None, n_dynamic=None, n_actions=None, window=None,
                 pair_channels=None, pair_hidden=None, bg_channels=None, bg_hidden=None):
        super().__init__()
        self.frame_shape = tuple(frame_shape)
        self.detector = ObjectDetector(n_static, n_dynamic)
        self.dynamics = DynamicsNet(
            self.detector.n_static, self.detector.n_dynamic, n_actions, window,
            pair_channels=pair_channels, pair_hidden=pair_hidden,
        )
        self.background = BackgroundExtractor(self.frame_shape, channels=bg_channels, hidden=bg_hidden)

    @classmethod
    def from_config(cls, config, frame_shape):
        return cls(frame_shape, **config.model_kwargs())

    @property
    def n_static(self):
        return self.detector.n_static

    @property
    def n_dynamic(self):
        return self.detector.n_dynamic

    def predict(self, frames, actions, crop_centers=None):
        """
        Tek karelik çıkarım: maskeler, hareketler, arka plan ve tahmin edilen kare.

        Returns:
            dict: masks, motions, positions, valid, background, prediction
        """
        masks = self.detector(frames)
        dynamic = self.dynamics(masks, actions, centers=crop_centers)
        background = self.background(frames)
        prediction = compose_prediction(frames, self.detector.split(masks)[1], dynamic["motions"], background)
        return {"masks": masks, "background": background, "prediction": prediction, **dynamic}

    def forward(self, frames_t, actions, frames_t1, variant="-p", proposal=None, crop_centers=None):
        """
        Eğitim geçişi: iki kareyi de işler ve kayıp bileşenlerini hesaplar.

        Args:
            frames_t, frames_t1 (Tensor): B x 3 x H x W
            actions (Tensor): B x n_a tek-sıcak
            variant (str): "-p" ya da "+p"
            proposal (Tensor, optional): B x H x W öneri maskesi ("+p" için gerekli)
            crop_centers (Tensor, optional): B x n_D x 2 sabit kırpma merkezleri

        Returns:
            tuple: (çıktı sözlüğü, LossBundle)
        """
        variant = normalize_variant(variant)
        out = self.predict(frames_t, actions, crop_centers=crop_centers)
        masks_t1 = self.detector(frames_t1)

        positions_t, valid_t = out["positions"], out["valid"]
        positions_t1, valid_t1 = self.dynamics.positions(masks_t1)
        valid = valid_t & valid_t1

        dynamic_t = self.detector.split(out["masks"])[1]
        dynamic_t1 = self.detector.split(masks_t1)[1]

        bundle = LossBundle(
            highway=highway_loss(positions_t, out["motions"], positions_t1, valid),
            prediction=prediction_loss(out["prediction"], frames_t1),
            entropy=entropy_loss(out["masks"]),
            variant=variant,
        )
        if variant == "+p":
            if proposal is None:
                raise ValueError("'+p' varyantı öneri maskesi gerektirir")
            bundle.proposal = proposal_loss(dynamic_t, proposal)
        else:
            background_t1 = self.background(frames_t1)
            bundle.reconstruction = reconstruction_loss(frames_t, dynamic_t, out["background"])
            bundle.consistency = consistency_loss(dynamic_t, dynamic_t1, out["motions"])
            bundle.background = background_loss(out["background"], background_t1)

        out.update({"masks_t1": masks_t1, "positions_t1": positions_t1, "valid": valid})
        return out, bundle


def save_checkpoint(path, model, config, step, optimizer=None, extra=None):
    """Modeli sürümlü checkpoint arşivine yazar."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    payload = {
        "format_version": MODEL_CONFIG["checkpoint_format_version"],
        "step": step,
        "frame_shape": list(model.frame_shape),
        "config": config.model_dump(),
        "model_state_dict": model.state_dict(),
        "optimizer_state_dict": optimizer.state_dict() if optimizer is not None else None,
    }
    if extra:
        payload.update(extra)
    torch.save(payload, path)
    logging.info(f"Checkpoint kaydedildi: {path} (adım {step})")


def load_checkpoint(path, device="cpu"):
    """
    Checkpoint'i okur ve modeli kurar.

    Returns:
        tuple: (OODPModel eval modunda, TrainConfig, ham checkpoint sözlüğü)

    Raises:
        CheckpointError: Dosya yok, sürüm uyuşmuyor ya da ağırlıklar eşleşmiyor
    """
    if not os.path.exists(path):
        raise CheckpointError(f"Checkpoint bulunamadı: {path}")

    try:
        payload = torch.load(path, map_location=device, weights_only=False)
    except Exception as e:
        raise CheckpointError(f"Checkpoint okunamadı ({path}): {e}") from e

    version = payload.get("format_version")
    if version != MODEL_CONFIG["checkpoint_format_version"]:
        raise CheckpointError(
            f"Checkpoint sürümü {version}, beklenen {MODEL_CONFIG['checkpoint_format_version']}"
        )

    config = TrainConfig(**payload["config"])
    model = OODPModel.from_config(config, payload["frame_shape"])
    try:
        model.load_state_dict(payload["model_state_dict"])
    except RuntimeError as e:
        raise CheckpointError(f"Checkpoint ağırlıkları modelle uyuşmuyor: {e}") from e

    model.to(device).eval()
    logging.info(f"Checkpoint yüklendi: {path} (adım {payload.get('step')})")
    return model, config, payload
