# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: storage.py (GEÇİŞ VERİ SETİ DİSK FORMATI)
# Konum: oodp_desk/data/storage.py
# Açıklama:
# Toplanan geçiş kayıtlarını (TransitionRecord) sürümlü, sağlama toplamlı bir ikili
# formatta diske yazar ve geri okur. Bir veri seti bir klasördür:
#
#   <klasör>/manifest.json   -> format sürümü, boyutlar, kayıt sayısı, tohumlar, sha256
#   <klasör>/records.bin     -> sabit boyutlu kayıtların ardışık dizisi (little-endian)

# === KAYIT DÜZENİ (records.bin) ===
# frame_t    : uint8  [H, W, 3]
# frame_t1   : uint8  [H, W, 3]
# action     : uint8
# gt_pos_t   : int16  [2]   (satır, sütun)
# gt_pos_t1  : int16  [2]
# env_id     : int16
# Başlık ya da dolgu (padding) yoktur; kayıt boyutu manifest içinde de saklanır.

# === HATA YÖNETİMİ ===
# Okuma sırasında kontroller şu sırayla yapılır:
# 1. Sürüm uyumsuzluğu      -> DatasetVersionError
# 2. Eksik/kesik dosya      -> DatasetTruncatedError
# 3. Sağlama toplamı hatası -> DatasetChecksumError
# =======================================================================================

import hashlib
import json
import logging
import os

import numpy as np

from config.settings import DATA_CONFIG, N_ACTIONS
from data.collector import TransitionRecord
from utils.errors import DatasetChecksumError, DatasetTruncatedError, DatasetVersionError


def record_dtype(height, width):
    """Verilen kare boyutu için kayıt dtype'ı (hizalamasız, little-endian)."""
    return np.dtype([
        ("frame_t", "u1", (height, width, 3)),
        ("frame_t1", "u1", (height, width, 3)),
        ("action", "u1"),
        ("gt_pos_t", "<i2", (2,)),
        ("gt_pos_t1", "<i2", (2,)),
        ("env_id", "<i2"),
    ])


def _sha256(path, chunk_size=1 << 20):
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()


class DatasetStore:
    """Tek bir veri seti klasörünün okuma/yazma işlemlerini yönetir."""

    def __init__(self, root):
        self.root = root
        self.manifest_path = os.path.join(root, DATA_CONFIG["manifest_name"])
        self.records_path = os.path.join(root, DATA_CONFIG["records_name"])

    def write(self, records, frame_shape=None, seeds=None, extra=None):
        """
        Kayıtları diske yazar.

        Args:
            records (list): TransitionRecord listesi
            frame_shape (tuple, optional): (H, W); kayıt listesi boşsa zorunlu
            seeds (dict, optional): Toplama/dengeleme tohumları
            extra (dict, optional): Manifeste eklenecek ek bilgiler

        Returns:
            dict: Yazılan manifest
        """
        if frame_shape is None:
            if not records:
                raise ValueError("Boş veri seti için frame_shape verilmeli")
            frame_shape = records[0].frame_t.shape[:2]
        height, width = int(frame_shape[0]), int(frame_shape[1])

        dtype = record_dtype(height, width)
        table = np.zeros(len(records), dtype=dtype)
        for i, record in enumerate(records):
            if record.frame_t.shape != (height, width, 3) or record.frame_t1.shape != (height, width, 3):
                raise ValueError(f"Kayıt {i} kare boyutu uyumsuz: {record.frame_t.shape}")
            table[i]["frame_t"] = record.frame_t
            table[i]["frame_t1"] = record.frame_t1
            table[i]["action"] = record.action
            table[i]["gt_pos_t"] = record.gt_pos_t
            table[i]["gt_pos_t1"] = record.gt_pos_t1
            table[i]["env_id"] = record.env_id

        os.makedirs(self.root, exist_ok=True)
        table.tofile(self.records_path)

        manifest = {
            "format_version": DATA_CONFIG["dataset_format_version"],
            "height": height,
            "width": width,
            "n_actions": N_ACTIONS,
            "count": len(records),
            "record_size": dtype.itemsize,
            "env_ids": sorted({int(r.env_id) for r in records}),
            "seeds": seeds or {},
            "sha256": _sha256(self.records_path),
        }
        if extra:
            manifest.update(extra)

        with open(self.manifest_path, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2)

        logging.info(f"Veri seti yazıldı: {self.root} ({len(records)} kayıt, {dtype.itemsize} bayt/kayıt)")
        return manifest

    def read_manifest(self):
        if not os.path.exists(self.manifest_path):
            raise DatasetTruncatedError(f"Manifest bulunamadı: {self.manifest_path}")
        with open(self.manifest_path, "r", encoding="utf-8") as f:
            manifest = json.load(f)

        version = manifest.get("format_version")
        expected = DATA_CONFIG["dataset_format_version"]
        if version != expected:
            raise DatasetVersionError(f"Veri seti sürümü {version}, beklenen {expected}")
        return manifest

    def read(self):
        """
        Veri setini okur ve doğrular.

        Returns:
            tuple: (TransitionRecord listesi, manifest)
        """
        manifest = self.read_manifest()
        dtype = record_dtype(manifest["height"], manifest["width"])
        expected_size = manifest["count"] * dtype.itemsize

        if not os.path.exists(self.records_path):
            raise DatasetTruncatedError(f"Kayıt dosyası bulunamadı: {self.records_path}")
        actual_size = os.path.getsize(self.records_path)
        if actual_size != expected_size:
            raise DatasetTruncatedError(
                f"Kayıt dosyası boyutu {actual_size} bayt, beklenen {expected_size} bayt"
            )

        if _sha256(self.records_path) != manifest["sha256"]:
            raise DatasetChecksumError(f"sha256 uyuşmuyor: {self.records_path}")

        table = np.fromfile(self.records_path, dtype=dtype, count=manifest["count"])
        records = [
            TransitionRecord(
                frame_t=row["frame_t"].copy(),
                action=int(row["action"]),
                frame_t1=row["frame_t1"].copy(),
                gt_pos_t=(int(row["gt_pos_t"][0]), int(row["gt_pos_t"][1])),
                gt_pos_t1=(int(row["gt_pos_t1"][0]), int(row["gt_pos_t1"][1])),
                env_id=int(row["env_id"]),
            )
            for row in table
        ]

        logging.info(f"Veri seti okundu: {self.root} ({len(records)} kayıt)")
        return records, manifest


def write_dataset(records, out_dir, frame_shape=None, seeds=None, extra=None):
    """DatasetStore(out_dir).write kısayolu."""
    return DatasetStore(out_dir).write(records, frame_shape=frame_shape, seeds=seeds, extra=extra)


def read_dataset(path):
    """DatasetStore(path).read kısayolu; (kayıtlar, manifest) döndürür."""
    return DatasetStore(path).read()
