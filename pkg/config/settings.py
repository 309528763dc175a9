# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: settings.py (OODP DESK YAPILANDIRMA AYARLARI)
# Konum: oodp_desk/config/settings.py
# Açıklama:
# Nesne yönelimli dinamik tahmin sisteminde (OODP) kullanılan tüm yapılandırma
# ayarlarını içeren dosyadır. Simülatör, veri hattı, model mimarisi, kayıp ağırlıkları,
# eğitim ve değerlendirme varsayılanları burada tutulur.
#
# .env dosyası veya ortam değişkenleri ile bazı ayarlar ezilebilir:
#   OODP_DEVICE, OODP_LOG_LEVEL, OODP_DATA_ROOT, OODP_LOG_DIR

# === BÖLÜMLER ===
# - ENV_CONFIG: Izgara dünyası (platform + Mars) fizik ve çizim ayarları
# - DATA_CONFIG: Rastgele politika ile veri toplama, öneri maskesi, veri seti formatı
# - MODEL_CONFIG: Object Detector, Background Extractor ve Dynamics Net mimarisi
# - LOSS_WEIGHTS: OODP+p / OODP-p kayıp ağırlıkları
# - TRAIN_CONFIG / EVAL_CONFIG: Eğitim döngüsü ve k-to-m değerlendirme protokolü
# - LOGGING_CONFIG / ERROR_CODES: Loglama ve hata kodları
# =======================================================================================

import os

import torch
from dotenv import load_dotenv

# .env dosyasındaki değişkenleri yükle
load_dotenv()

# Uygulama ayarları
APP_NAME = "OODP Desk - Nesne Yönelimli Dinamik Tahmin Sistemi"
APP_VERSION = "1.0.0"
APP_DESCRIPTION = "Eylem koşullu nesne hareketi tahmini ve ortam düzenleri arası genelleme deneyleri"

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_ROOT = os.getenv("OODP_DATA_ROOT", os.path.join(PROJECT_ROOT, "runs"))
LOG_DIR = os.getenv("OODP_LOG_DIR", os.path.join(PROJECT_ROOT, "logs"))
DEVICE = os.getenv("OODP_DEVICE", "cuda" if torch.cuda.is_available() else "cpu")

# Eylem kodları: up, down, left, right, noop
ACTION_NAMES = ("up", "down", "left", "right", "noop")
N_ACTIONS = len(ACTION_NAMES)

# Izgara dünyası ayarları (80x80 kare = 10x10 karo x 8 piksel)
ENV_CONFIG = {
    "tile_px": 8,                     # Karo kenarı (piksel)
    "grid_h": 10,                     # Karo satırı
    "grid_w": 10,                     # Karo sütunu
    "move_step": 2,                   # s: eylem başına yer değiştirme (piksel)
    "gravity_step": 3,                # g: adım başına düşme (piksel)
    "floor_gap": 3,                   # Platform katları arası karo sayısı
    "floor_fill": (0.6, 0.9),         # Kat satırında duvar oranı aralığı
    "wall_density": (0.0, 0.08),      # Rastgele ek duvar yoğunluğu aralığı
    "ladder_density": (0.1, 0.3),     # Kat hücresinin merdivene dönüşme olasılığı
    "min_reachable_cells": 4,         # Ajanın ulaşabilmesi gereken en az karo sayısı
    "max_retries": 2000,              # Reddetme örneklemesi deneme sınırı
    # Mars varyantı
    "mars_max_angle_deg": 5.0,        # Bu açı ve üzeri eğimler geçilemez
    "mars_relief": (0.02, 0.12),      # Yükselti haritası genliği (karo birimi)
    "mars_rock_density": (0.05, 0.35),
    "mars_noise_cells": 3,            # Değer gürültüsü kafes aralığı (karo)
}

# Veri hattı ayarları
DATA_CONFIG = {
    "proposal_threshold": 0.1,        # τ: [-1,1] piksel biriminde fark eşiği
    "dilation_radius": 2,             # d: kare yapılandırma elemanı yarıçapı
    "dataset_format_version": 1,
    "manifest_name": "manifest.json",
    "records_name": "records.bin",
}

# Model mimarisi ayarları
MODEL_CONFIG = {
    "n_static": 3,                    # n_S: duvar, merdiven, boş alan
    "n_dynamic": 1,                   # n_D: ajan
    "n_actions": N_ACTIONS,
    "horizon_window": 33,             # w: ufuk penceresi
    "detector_layers": ((64, 5, 2), (64, 3, 2), (64, 3, 1), (32, 1, 1), (1, 3, 1)),
    "pair_channels": (16, 32, 64, 128),
    "pair_hidden": 128,
    "bg_channels": 64,                # Çok ortamlı eğitimde 128/256 önerilir
    "bg_stages": 4,
    "bg_hidden": 128,
    "bn_momentum": 0.1,               # PyTorch tanımı: 0.9 hareketli ortalama
    "position_eps": 1e-6,
    "checkpoint_format_version": 1,
}

# Kayıp ağırlıkları (OODP-p: yardımcı kayıplar, OODP+p: öneri kaybı)
LOSS_WEIGHTS = {
    "-p": {"prediction": 100.0, "entropy": 0.1, "reconstruction": 100.0,
           "consistency": 1.0, "background": 1.0},
    "+p": {"prediction": 10.0, "entropy": 1.0, "proposal": 1.0},
}

# Eğitim ayarları (masaüstü ölçeği)
TRAIN_CONFIG = {
    "variant": "-p",
    "learning_rate": 1e-4,
    "batch_size": 16,
    "max_steps": 50_000,
    "checkpoint_every": 5_000,
    "log_every": 100,
    "validation_fraction": 0.1,
    "seed": 0,
    "steps_per_env": 5_000,           # Ortam başına toplanan geçiş sayısı
}

# Değerlendirme ayarları
EVAL_CONFIG = {
    "n_values": (0, 1, 2),
    "n_transitions": 2_000,
    "agent_index": 0,                 # Ajanın dinamik maske indeksi
    "mask_threshold": 0.5,            # Görselleştirme ikilileştirme eşiği
    "k_list": (1, 2, 3, 4, 5),
    "m": 10,
    "redundant_static_counts": (3, 5),
    "redundancy_tolerance": 0.05,     # n_S satırları arası kabul edilen |0-hata farkı|
}

# Loglama Ayarları
LOGGING_CONFIG = {
    "level": os.getenv("OODP_LOG_LEVEL", "INFO"),
    "format": "%(asctime)s [%(levelname)s] %(message)s",
    "date_format": "%Y-%m-%d %H:%M:%S",
    "file_logging": True,
    "console_logging": True,
    "max_log_size": 10485760,         # 10MB
    "backup_count": 5,
}

# Hata kodları ve mesajları
ERROR_CODES = {
    "LAYOUT_GENERATION_FAILED": {"code": 2001, "message": "Ortam düzeni üretilemedi",
                                 "solution": "Yoğunluk aralıklarını genişletin veya deneme sınırını artırın"},
    "INVALID_LAYOUT": {"code": 2002, "message": "Geçersiz ortam düzeni",
                       "solution": "Düzen dosyasını kontrol edin"},
    "DATASET_BALANCE": {"code": 3001, "message": "Veri dengelenemedi",
                        "solution": "Daha uzun rollout toplayın"},
    "DATASET_VERSION": {"code": 3002, "message": "Veri seti sürümü uyumsuz",
                        "solution": "Veri setini yeniden üretin"},
    "DATASET_TRUNCATED": {"code": 3003, "message": "Veri seti dosyası eksik",
                          "solution": "Veri setini yeniden yazın"},
    "DATASET_CHECKSUM": {"code": 3004, "message": "Veri seti sağlama toplamı hatalı",
                         "solution": "Bozuk veri setini yeniden üretin"},
    "SHAPE_MISMATCH": {"code": 4001, "message": "Tensör boyutları uyumsuz",
                       "solution": "Girdi boyutlarını kontrol edin"},
    "DEGENERATE_MASK": {"code": 4002, "message": "Dejenere nesne maskesi",
                        "solution": "Maske kütlesi sıfıra yakın"},
    "INVALID_WINDOW": {"code": 4003, "message": "Geçersiz ufuk penceresi",
                       "solution": "w tek sayı ve kare boyutundan küçük olmalı"},
    "LOSS_INVARIANT": {"code": 5001, "message": "Kayıp bileşeni negatif",
                       "solution": "Kayıp hesaplamasını kontrol edin"},
    "TRAINING_DIVERGED": {"code": 5002, "message": "Eğitim ıraksadı",
                          "solution": "Öğrenme oranını düşürün"},
    "CHECKPOINT": {"code": 5003, "message": "Checkpoint yüklenemedi",
                   "solution": "Checkpoint sürümünü kontrol edin"},
    "CONFIG": {"code": 6001, "message": "Yapılandırma hatası",
               "solution": "Yapılandırma dosyasını kontrol edin"},
}


# Konfigürasyon doğrulama
def validate_config():
    """Konfigürasyon ayarlarını doğrular."""
    errors = []

    if ENV_CONFIG["tile_px"] <= 0:
        errors.append("tile_px pozitif olmalı")

    if ENV_CONFIG["grid_h"] < 3 or ENV_CONFIG["grid_w"] < 3:
        errors.append("Izgara en az 3x3 karo olmalı")

    if MODEL_CONFIG["horizon_window"] % 2 == 0:
        errors.append("horizon_window tek sayı olmalı")

    frame_side = min(ENV_CONFIG["grid_h"], ENV_CONFIG["grid_w"]) * ENV_CONFIG["tile_px"]
    if MODEL_CONFIG["horizon_window"] > frame_side:
        errors.append("horizon_window kare boyutundan büyük olamaz")

    if TRAIN_CONFIG["batch_size"] < 1:
        errors.append("batch_size en az 1 olmalı")

    if TRAIN_CONFIG["variant"] not in LOSS_WEIGHTS:
        errors.append(f"Bilinmeyen varyant: {TRAIN_CONFIG['variant']}")

    if not 0.0 < DATA_CONFIG["proposal_threshold"] < 2.0:
        errors.append("proposal_threshold (0, 2) aralığında olmalı")

    return errors


# Konfigürasyon export fonksiyonu
def export_config():
    """Mevcut konfigürasyonu dictionary olarak döndürür."""
    return {
        "app": {
            "name": APP_NAME,
            "version": APP_VERSION,
            "description": APP_DESCRIPTION,
        },
        "device": DEVICE,
        "env": ENV_CONFIG,
        "data": DATA_CONFIG,
        "model": MODEL_CONFIG,
        "loss_weights": LOSS_WEIGHTS,
        "train": TRAIN_CONFIG,
        "eval": EVAL_CONFIG,
    }
