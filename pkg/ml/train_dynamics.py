# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: train_dynamics.py (OODP EĞİTİM DÖNGÜSÜ)
# Konum: oodp_desk/ml/train_dynamics.py
# Açıklama:
# Dengelenmiş geçiş kayıtları üzerinde OODP ağını Adam ile eğitir. Adım tabanlı
# döngü: her adımda bir mini-batch, kayıp bileşenleri CSV loguna yazılır, belirli
# aralıklarla checkpoint alınır ve doğrulama diliminde 1-hata doğruluğu ölçülür.
#
# Çıktılar (out_dir):
#   last.pt            -> son checkpoint
#   best.pt            -> en yüksek doğrulama doğruluğu
#   training_log.csv   -> step, her kayıp bileşeni, total
#   training_curve.png -> kayıp eğrisi
#   train_config.txt   -> kullanılan yapılandırma (düz format)
#   settings.json      -> config/settings.py anlık görüntüsü
#
# Tek iş parçacıklı çalıştırmada tohum verildiğinde deterministiktir.
# =======================================================================================

import argparse
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
import torch
import torch.optim as optim
from sklearn.model_selection import train_test_split
from torch.utils.data import DataLoader

from config.schemas import dump_train_config, load_train_config
from config.settings import export_config
from data.collector import TransitionDataset
from data.storage import read_dataset
from ml.evaluate import evaluate_records
from ml.model import OODPModel, save_checkpoint
from ml.objective import components_dict, total_loss
from utils.errors import TrainingDivergedError
from utils.visualize import plot_training_curve


@dataclass
class TrainResult:
    """Eğitim çıktılarının özeti."""

    model: OODPModel
    last_checkpoint: str
    best_checkpoint: Optional[str]
    log_path: str
    curve_path: Optional[str]
    steps: int
    best_accuracy: Optional[float]
    history: pd.DataFrame = field(repr=False, default=None)


def seed_everything(seed):
    np.random.seed(seed)
    torch.manual_seed(seed)


def split_validation(records, fraction, seed):
    """Eğitim kayıtlarından doğrulama dilimi ayırır (değişen/değişmeyen oranı korunur)."""
    if fraction <= 0 or len(records) < 10:
        return records, []

    labels = [int(r.changed) for r in records]
    stratify = labels if min(labels.count(0), labels.count(1)) >= 2 else None
    train_idx, val_idx = train_test_split(
        np.arange(len(records)), test_size=fraction, random_state=seed, stratify=stratify
    )
    return [records[i] for i in sorted(train_idx)], [records[i] for i in sorted(val_idx)]


def make_loader(records, config, with_proposal):
    generator = torch.Generator()
    generator.manual_seed(config.seed)
    return DataLoader(
        TransitionDataset(records, with_proposal=with_proposal),
        batch_size=config.batch_size,
        shuffle=True,
        num_workers=0,
        generator=generator,
        # Tek örnekli son batch BN katmanlarında hata verir
        drop_last=len(records) > config.batch_size,
    )


def train_step(model, optimizer, batch, config, device="cpu"):
    """
    Tek optimizasyon adımı.

    Returns:
        tuple: (LossBundle, toplam kayıp float)

    Raises:
        TrainingDivergedError: Toplam kayıp sonlu değilse
    """
    frames_t = batch["frame_t"].to(device)
    frames_t1 = batch["frame_t1"].to(device)
    actions = batch["action"].to(device)
    proposal = batch["proposal"].to(device) if "proposal" in batch else None

    _, bundle = model(frames_t, actions, frames_t1, variant=config.variant, proposal=proposal)
    loss = total_loss(bundle, config.loss_weights())

    value = float(loss.detach())
    if not math.isfinite(value):
        raise TrainingDivergedError(f"Toplam kayıp sonlu değil: {value}")

    optimizer.zero_grad()
    loss.backward()
    optimizer.step()
    return bundle, value


def train(config, records, out_dir=None, frame_shape=None):
    """
    OODP ağını eğitir.

    Args:
        config (TrainConfig): Eğitim yapılandırması
        records (list): Dengelenmiş TransitionRecord listesi
        out_dir (str, optional): Çıktı klasörü, varsayılan config.out_dir
        frame_shape (tuple, optional): (H, W), varsayılan ilk kaydın boyutu

    Returns:
        TrainResult
    """
    if not records:
        raise ValueError("Eğitim veri seti boş")

    out_dir = out_dir or config.out_dir or "runs/train"
    os.makedirs(out_dir, exist_ok=True)
    device = torch.device(config.device)
    frame_shape = tuple(frame_shape or records[0].frame_t.shape[:2])

    changed = sum(r.changed for r in records)
    if changed * 2 != len(records):
        logging.warning(f"Veri seti dengeli değil: {changed} değişen / {len(records)} kayıt")

    seed_everything(config.seed)
    train_records, val_records = split_validation(records, config.validation_fraction, config.seed)
    logging.info(f"Eğitim: {len(train_records)} kayıt, doğrulama: {len(val_records)} kayıt, "
                 f"varyant {config.variant}, cihaz {device}")

    model = OODPModel.from_config(config, frame_shape).to(device)
    optimizer = optim.Adam(model.parameters(), lr=config.learning_rate, betas=(0.9, 0.999))
    loader = make_loader(train_records, config, with_proposal=config.variant == "+p")
    dump_train_config(config, os.path.join(out_dir, "train_config.txt"))
    with open(os.path.join(out_dir, "settings.json"), "w", encoding="utf-8") as f:
        json.dump(export_config(), f, indent=2, default=str)

    last_path = os.path.join(out_dir, "last.pt")
    best_path = os.path.join(out_dir, "best.pt") if val_records else None
    best_accuracy = None
    rows = []
    step = 0
    start_time = time.time()

    def checkpoint():
        nonlocal best_accuracy
        save_checkpoint(last_path, model, config, step, optimizer)
        if not val_records:
            return
        metrics = evaluate_records(val_records, "model", model, n_values=(1,), device=device)
        accuracy = metrics.accuracy[1]
        logging.info(f"Adım {step}: doğrulama 1-hata doğruluğu {accuracy:.4f}")
        if best_accuracy is None or accuracy > best_accuracy:
            best_accuracy = accuracy
            save_checkpoint(best_path, model, config, step, optimizer, extra={"val_accuracy": accuracy})

    model.train()
    while step < config.max_steps:
        for batch in loader:
            bundle, value = train_step(model, optimizer, batch, config, device)
            step += 1
            rows.append({"step": step, **components_dict(bundle), "total": value})

            if step == 1 or step % config.log_every == 0:
                logging.info(f"Adım {step}/{config.max_steps} - toplam kayıp {value:.5f} "
                             f"(tahmin {rows[-1]['prediction']:.5f}, highway {rows[-1]['highway']:.5f})")
            if step % config.checkpoint_every == 0:
                checkpoint()
            if step >= config.max_steps:
                break

    if step == 0 or step % config.checkpoint_every != 0:
        checkpoint()

    history = pd.DataFrame(rows, columns=["step", "highway", "prediction", "entropy", "reconstruction",
                                          "consistency", "background", "proposal", "total"])
    log_path = os.path.join(out_dir, "training_log.csv")
    history.to_csv(log_path, index=False)

    curve_path = None
    if len(history):
        curve_path = plot_training_curve(history, os.path.join(out_dir, "training_curve.png"))

    total_time = time.time() - start_time
    logging.info(f"Eğitim tamamlandı: {step} adım, {total_time / 60:.2f} dakika")

    return TrainResult(
        model=model,
        last_checkpoint=last_path,
        best_checkpoint=best_path,
        log_path=log_path,
        curve_path=curve_path,
        steps=step,
        best_accuracy=best_accuracy,
        history=history,
    )


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="OODP dinamik modeli eğitimi")
    parser.add_argument("--data", required=True, help="collect ile yazılmış veri seti klasörü")
    parser.add_argument("--config", default=None, help="Düz anahtar=değer yapılandırma dosyası")
    parser.add_argument("--variant", default=None, help="+p veya -p")
    parser.add_argument("--out", default="runs/train", help="Çıktı klasörü")
    args = parser.parse_args()

    from utils.logger import setup_logger

    setup_logger()
    train_records, _ = read_dataset(args.data)
    train(load_train_config(args.config, variant=args.variant), train_records, args.out)
