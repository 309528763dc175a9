# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: collector.py (RASTGELE POLİTİKA İLE GEÇİŞ TOPLAMA)
# Konum: oodp_desk/data/collector.py
# Açıklama:
# Ajanın rastgele politika ile ortamları keşfetmesinden geçiş kayıtları
# (TransitionRecord) toplar, değişen / değişmeyen geçişleri dengeler ve kare farkından
# kaba öneri (proposal) dinamik bölge maskesi hesaplar.

# === TEMEL FONKSİYONLAR ===
# - collect: Tek bir düzende n adımlık bağlantılı rollout
# - collect_many: Birden fazla düzende toplama (düzen sırası deterministik)
# - balance: Değişen/değişmeyen sınıflarını çoğunluğu alt örnekleyerek eşitler
# - compute_proposal_mask: |I_t - I_t+1| > τ ve kare yapılandırma elemanı ile genişletme
# - TransitionDataset: Eğitim için PyTorch Dataset sarmalayıcısı
# =======================================================================================

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import cv2
import numpy as np
import torch
from torch.utils.data import Dataset

from config.settings import DATA_CONFIG, N_ACTIONS
from core.physics import one_hot, spawn_state, step_any
from core.renderer import frame_to_model, render
from utils.errors import DatasetBalanceError


@dataclass(eq=False)
class TransitionRecord:
    """(kare_t, eylem, kare_t+1, gerçek ajan pozisyonları, ortam id) veri atomu."""

    frame_t: np.ndarray
    action: int
    frame_t1: np.ndarray
    gt_pos_t: tuple
    gt_pos_t1: tuple
    env_id: int

    @property
    def changed(self):
        return tuple(self.gt_pos_t) != tuple(self.gt_pos_t1)

    @property
    def motion(self):
        """Gerçek hareket etiketi Δp = p_t+1 - p_t (tam sayı, satır/sütun)."""
        return np.subtract(self.gt_pos_t1, self.gt_pos_t).astype(np.int64)

    def __eq__(self, other):
        if not isinstance(other, TransitionRecord):
            return NotImplemented
        return (
            self.action == other.action
            and self.env_id == other.env_id
            and tuple(self.gt_pos_t) == tuple(other.gt_pos_t)
            and tuple(self.gt_pos_t1) == tuple(other.gt_pos_t1)
            and np.array_equal(self.frame_t, other.frame_t)
            and np.array_equal(self.frame_t1, other.frame_t1)
        )

    def key(self):
        """Çoklu küme karşılaştırmaları için hashlenebilir anahtar."""
        return (self.action, self.env_id, tuple(self.gt_pos_t), tuple(self.gt_pos_t1),
                self.frame_t.tobytes(), self.frame_t1.tobytes())


def collect(layout, n_steps, seed):
    """
    Düzende rastgele politika ile tek bağlantılı rollout toplar.

    Args:
        layout (EnvLayout): Ortam düzeni
        n_steps (int): Adım sayısı (>= 1)
        seed (int): Eylem örnekleme tohumu

    Returns:
        list: TransitionRecord listesi
    """
    if n_steps < 1:
        raise ValueError(f"n_steps en az 1 olmalı: {n_steps}")

    rng = np.random.default_rng(seed)
    actions = rng.integers(0, N_ACTIONS, size=n_steps)

    state = spawn_state(layout)
    frame = render(layout, state)
    records = []

    for action in actions:
        next_state = step_any(layout, state, int(action))
        next_frame = render(layout, next_state)
        records.append(TransitionRecord(
            frame_t=frame,
            action=int(action),
            frame_t1=next_frame,
            gt_pos_t=tuple(state.position),
            gt_pos_t1=tuple(next_state.position),
            env_id=layout.env_id,
        ))
        state, frame = next_state, next_frame

    changed = sum(r.changed for r in records)
    logging.debug(f"env {layout.env_id}: {n_steps} adım toplandı ({changed} değişen geçiş)")
    return records


def collect_many(layouts, n_steps, seed, workers=1):
    """
    Birden fazla düzende toplama. Rollout'lar eşzamanlı çalışabilir; birleştirme sırası
    her zaman düzen sırasıdır.
    """
    seeds = np.random.SeedSequence(seed).generate_state(len(layouts))
    jobs = list(zip(layouts, seeds))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda job: collect(job[0], n_steps, int(job[1])), jobs))
    else:
        chunks = [collect(layout, n_steps, int(s)) for layout, s in jobs]

    records = [r for chunk in chunks for r in chunk]
    logging.info(f"{len(layouts)} ortamdan toplam {len(records)} geçiş toplandı")
    return records


def balance(records, seed=0):
    """
    Değişen ve değişmeyen geçiş sayılarını eşitler (çoğunluk sınıfı alt örneklenir).

    Args:
        records (list): TransitionRecord listesi
        seed (int): Alt örnekleme ve karıştırma tohumu

    Returns:
        list: Dengelenmiş ve deterministik olarak karıştırılmış kayıtlar

    Raises:
        DatasetBalanceError: Sınıflardan biri boşsa (eksik sınıfın adıyla)
    """
    changed = [r for r in records if r.changed]
    changeless = [r for r in records if not r.changed]

    if not changed:
        raise DatasetBalanceError("changed")
    if not changeless:
        raise DatasetBalanceError("changeless")

    rng = np.random.default_rng(seed)
    n = min(len(changed), len(changeless))
    picked_changed = rng.choice(len(changed), size=n, replace=False)
    picked_changeless = rng.choice(len(changeless), size=n, replace=False)

    selected = [changed[i] for i in picked_changed] + [changeless[i] for i in picked_changeless]
    order = rng.permutation(len(selected))

    logging.info(f"Dengeleme: {len(changed)} değişen + {len(changeless)} değişmeyen -> {n} + {n}")
    return [selected[i] for i in order]


def compute_proposal_mask(frame_t, frame_t1, threshold=None, radius=None):
    """
    Kare farkından kaba dinamik bölge öneri maskesi.

    Args:
        frame_t, frame_t1 (np.ndarray): H x W x 3 kareler (uint8 ya da [-1,1] float)
        threshold (float, optional): τ, [-1,1] piksel biriminde
        radius (int, optional): d, kare yapılandırma elemanı yarıçapı

    Returns:
        np.ndarray: H x W uint8 {0, 1} maske
    """
    threshold = DATA_CONFIG["proposal_threshold"] if threshold is None else threshold
    radius = DATA_CONFIG["dilation_radius"] if radius is None else radius

    a = frame_to_model(frame_t) if np.asarray(frame_t).dtype == np.uint8 else np.asarray(frame_t, np.float32)
    b = frame_to_model(frame_t1) if np.asarray(frame_t1).dtype == np.uint8 else np.asarray(frame_t1, np.float32)
    if a.shape != b.shape:
        raise ValueError(f"Kare boyutları uyumsuz: {a.shape} != {b.shape}")

    changed = (np.abs(a - b).max(axis=2) > threshold).astype(np.uint8)
    if radius <= 0:
        return changed

    kernel = np.ones((2 * radius + 1, 2 * radius + 1), dtype=np.uint8)
    return cv2.dilate(changed, kernel, borderType=cv2.BORDER_CONSTANT, borderValue=0)


class TransitionDataset(Dataset):
    """Geçiş kayıtlarını model tensörlerine çeviren veri kümesi."""

    def __init__(self, records, with_proposal=True):
        self.records = records
        self.with_proposal = with_proposal

    def __len__(self):
        return len(self.records)

    def __getitem__(self, idx):
        record = self.records[idx]
        item = {
            "frame_t": torch.from_numpy(frame_to_model(record.frame_t).transpose(2, 0, 1).copy()),
            "frame_t1": torch.from_numpy(frame_to_model(record.frame_t1).transpose(2, 0, 1).copy()),
            "action": torch.from_numpy(one_hot(record.action)),
            "motion": torch.from_numpy(record.motion.astype(np.float32)),
            "env_id": torch.tensor(record.env_id, dtype=torch.long),
        }
        if self.with_proposal:
            mask = compute_proposal_mask(record.frame_t, record.frame_t1)
            item["proposal"] = torch.from_numpy(mask.astype(np.float32))
        return item
