# oodp_desk/utils/mask_report.py
# Öğrenilen maskelerin yorumlanabilirlik raporu: her gerçek hücre sınıfı
# (boş / duvar / merdiven / ajan) için en iyi eşleşen maskenin IoU değeri.
# Gerçek bölütleme simülatörün ayrıcalıklı hücre haritasından (class_map) gelir.

import logging

import numpy as np
import pandas as pd
import torch

from core.layouts import CELL_NAMES
from core.physics import spawn_state
from core.renderer import CLASS_AGENT, class_map, frame_to_model, render

CLASS_NAMES = {**CELL_NAMES, CLASS_AGENT: "agent"}


class MaskCoverageReport:
    """Kareler boyunca maske / sınıf kesişim ve birleşimlerini biriktirir."""

    def __init__(self, n_static, n_dynamic, classes=None):
        self.n_static = n_static
        self.n_dynamic = n_dynamic
        self.classes = tuple(classes or CLASS_NAMES)
        n_objects = n_static + n_dynamic
        self.intersection = np.zeros((n_objects, len(self.classes)), dtype=np.int64)
        self.union = np.zeros((n_objects, len(self.classes)), dtype=np.int64)
        self.support = np.zeros(len(self.classes), dtype=np.int64)

    def add(self, masks, classes):
        """
        Args:
            masks (array): n_O x H x W olasılıklar
            classes (array): H x W sınıf kodları
        """
        # Piksel başına argmax bölütlemesi
        owner = np.asarray(masks).argmax(axis=0)
        for c in range(self.intersection.shape[0]):
            predicted = owner == c
            for k, cls in enumerate(self.classes):
                truth = classes == cls
                if c == 0:
                    self.support[k] += int(np.sum(truth))
                self.intersection[c, k] += int(np.sum(predicted & truth))
                self.union[c, k] += int(np.sum(predicted | truth))

    def iou(self):
        return np.where(self.union > 0, self.intersection / np.maximum(self.union, 1), 0.0)

    def results(self):
        """Her sınıf için en iyi maske ve IoU (statik sınıflar statik maskelerle eşlenir)."""
        iou = self.iou()
        rows = []
        for k, cls in enumerate(self.classes):
            if self.support[k] == 0:
                continue
            candidates = range(self.n_static, iou.shape[0]) if cls == CLASS_AGENT else range(self.n_static)
            candidates = list(candidates)
            best = max(candidates, key=lambda c: iou[c, k])
            rows.append({"class": CLASS_NAMES.get(cls, str(cls)), "best_mask": best, "iou": float(iou[best, k])})
        return pd.DataFrame(rows)


@torch.no_grad()
def mask_coverage_report(model, layouts, device="cpu"):
    """
    Düzenlerin başlangıç karelerinde maske-sınıf IoU raporu.

    Returns:
        DataFrame: class, best_mask, iou
    """
    report = MaskCoverageReport(model.n_static, model.n_dynamic)
    was_training = model.training
    model.eval()
    try:
        for layout in layouts:
            state = spawn_state(layout)
            frame = frame_to_model(render(layout, state)).transpose(2, 0, 1)
            masks = model.detector(torch.from_numpy(frame[None].copy()).to(device))[0].cpu().numpy()
            report.add(masks, class_map(layout, state))
    finally:
        model.train(was_training)

    table = report.results()
    logging.info("Maske yorumlanabilirlik raporu:\n" + table.to_string(index=False))
    return table
