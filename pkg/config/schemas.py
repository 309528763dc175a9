# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: schemas.py (EĞİTİM YAPILANDIRMASI VE DEĞERLENDİRME RAPORU ŞEMALARI)
# Konum: oodp_desk/config/schemas.py
# Açıklama:
# Eğitim yapılandırması (TrainConfig) ve değerlendirme raporu (EvalReport) için
# pydantic modelleri. TrainConfig düz "anahtar = değer" metin dosyasından okunabilir:
#
#   # yorum satırı
#   variant = -p
#   batch_size = 16
#   pair_channels = 16, 32, 64, 128
#
# Bilinmeyen anahtarlar hatadır.
# =======================================================================================

import logging
import math
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from config.settings import LOSS_WEIGHTS, MODEL_CONFIG, N_ACTIONS, TRAIN_CONFIG
from utils.errors import ConfigError

VARIANT_ALIASES = {
    "-p": "-p", "minus-p": "-p", "oodp-p": "-p", "without-proposal": "-p",
    "+p": "+p", "plus-p": "+p", "oodp+p": "+p", "with-proposal": "+p",
}


def normalize_variant(variant):
    """'OODP+p', 'with-proposal' gibi adları '+p' / '-p' biçimine çevirir."""
    key = str(variant).strip().lower()
    if key not in VARIANT_ALIASES:
        raise ConfigError(f"Bilinmeyen varyant: {variant}")
    return VARIANT_ALIASES[key]


class TrainConfig(BaseModel):
    """Eğitim yapılandırması (varsayılanlar settings.py'den)."""

    model_config = ConfigDict(extra="forbid")

    # Model
    n_static: int = Field(MODEL_CONFIG["n_static"], ge=1)
    n_dynamic: int = Field(MODEL_CONFIG["n_dynamic"], ge=1)
    n_actions: int = Field(N_ACTIONS, ge=1)
    window: int = Field(MODEL_CONFIG["horizon_window"], ge=1)
    pair_channels: Tuple[int, ...] = MODEL_CONFIG["pair_channels"]
    pair_hidden: int = Field(MODEL_CONFIG["pair_hidden"], ge=1)
    bg_channels: int = Field(MODEL_CONFIG["bg_channels"], ge=1)
    bg_hidden: int = Field(MODEL_CONFIG["bg_hidden"], ge=1)

    # Kayıp
    variant: str = TRAIN_CONFIG["variant"]
    lambda_prediction: Optional[float] = None
    lambda_entropy: Optional[float] = None
    lambda_reconstruction: Optional[float] = None
    lambda_consistency: Optional[float] = None
    lambda_background: Optional[float] = None
    lambda_proposal: Optional[float] = None

    # Optimizasyon
    learning_rate: float = Field(TRAIN_CONFIG["learning_rate"], ge=0.0)
    batch_size: int = Field(TRAIN_CONFIG["batch_size"], ge=1)
    max_steps: int = Field(TRAIN_CONFIG["max_steps"], ge=0)
    seed: int = TRAIN_CONFIG["seed"]
    checkpoint_every: int = Field(TRAIN_CONFIG["checkpoint_every"], ge=1)
    log_every: int = Field(TRAIN_CONFIG["log_every"], ge=1)
    validation_fraction: float = Field(TRAIN_CONFIG["validation_fraction"], ge=0.0, lt=1.0)

    # Yollar
    train_data: Optional[str] = None
    out_dir: Optional[str] = None
    device: str = "cpu"

    @field_validator("variant", mode="before")
    @classmethod
    def _variant(cls, value):
        return normalize_variant(value)

    @field_validator("window")
    @classmethod
    def _odd_window(cls, value):
        if value % 2 == 0:
            raise ValueError(f"w tek sayı olmalı: {value}")
        return value

    @property
    def n_objects(self):
        return self.n_static + self.n_dynamic

    def loss_weights(self):
        """Varyantın varsayılan ağırlıkları, lambda_* alanlarıyla ezilmiş hali."""
        weights = dict(LOSS_WEIGHTS[self.variant])
        for name in weights:
            override = getattr(self, f"lambda_{name}")
            if override is not None:
                weights[name] = override
        return weights

    def model_kwargs(self):
        return {
            "n_static": self.n_static,
            "n_dynamic": self.n_dynamic,
            "n_actions": self.n_actions,
            "window": self.window,
            "pair_channels": self.pair_channels,
            "pair_hidden": self.pair_hidden,
            "bg_channels": self.bg_channels,
            "bg_hidden": self.bg_hidden,
        }


def parse_flat_config(text):
    """'anahtar = değer' satırlarını sözlüğe çevirir; virgüllü değerler liste olur."""
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"Satır {number}: 'anahtar = değer' bekleniyordu: {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in values:
            raise ConfigError(f"Satır {number}: '{key}' tekrar tanımlanmış")
        values[key] = [part.strip() for part in value.split(",") if part.strip()] if "," in value else value
    return values


def load_train_config(path=None, **overrides):
    """
    TrainConfig'i dosyadan (varsa) ve anahtar kelime argümanlarından oluşturur.

    Raises:
        ConfigError: Bilinmeyen anahtar ya da doğrulama hatası
    """
    values = {}
    if path:
        with open(path, "r", encoding="utf-8") as f:
            values = parse_flat_config(f.read())
    values.update({k: v for k, v in overrides.items() if v is not None})

    try:
        config = TrainConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"Eğitim yapılandırması geçersiz: {e}") from e

    logging.debug(f"Eğitim yapılandırması: {config.model_dump()}")
    return config


def dump_train_config(config, path):
    """TrainConfig'i aynı düz formatta yazar (None alanlar atlanır)."""
    lines = ["# OODP eğitim yapılandırması"]
    for key, value in config.model_dump().items():
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            value = ", ".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


class SplitMetrics(BaseModel):
    """Tek bir ortam grubundaki (eğitim ya da görülmemiş) ölçümler."""

    accuracy: Dict[int, float]
    rmse: float = Field(ge=0.0)
    count: int = Field(ge=0)
    degenerate: int = Field(0, ge=0)
    baseline_accuracy: Dict[int, float] = {}
    baseline_rmse: Optional[float] = None

    @field_validator("accuracy", "baseline_accuracy")
    @classmethod
    def _unit_interval(cls, value):
        for n, acc in value.items():
            if not (0.0 <= acc <= 1.0) or math.isnan(acc):
                raise ValueError(f"{n}-hata doğruluğu [0, 1] dışında: {acc}")
        return value


class EvalReport(BaseModel):
    """Bir k-to-m paketi için değerlendirme raporu."""

    k: int
    m: int
    variant: str = "-p"
    predictor: str = "model"
    train: Optional[SplitMetrics] = None
    unseen: Optional[SplitMetrics] = None

    def accuracy_row(self, n_values):
        row = {"k": self.k, "m": self.m, "variant": self.variant, "predictor": self.predictor}
        for split in ("train", "unseen"):
            metrics = getattr(self, split)
            for n in n_values:
                row[f"{split}_{n}_error"] = metrics.accuracy.get(n) if metrics else None
                row[f"{split}_{n}_error_zero_motion"] = metrics.baseline_accuracy.get(n) if metrics else None
            row[f"{split}_count"] = metrics.count if metrics else None
            row[f"{split}_degenerate"] = metrics.degenerate if metrics else None
        return row

    def rmse_row(self):
        row = {"k": self.k, "m": self.m, "variant": self.variant, "predictor": self.predictor}
        for split in ("train", "unseen"):
            metrics = getattr(self, split)
            row[f"{split}_rmse"] = metrics.rmse if metrics else None
            row[f"{split}_rmse_zero_motion"] = metrics.baseline_rmse if metrics else None
        return row
