# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: evaluate.py (n-HATA DOĞRULUĞU VE HAREKET RMSE DEĞERLENDİRMESİ)
# Konum: oodp_desk/ml/evaluate.py
# Açıklama:
# Eğitilmiş modeli (ve karşılaştırma tahmincilerini) eğitim ve görülmemiş ortam
# düzenlerinde değerlendirir.
#
# - Hareket hatası e = round(V) - (p_t+1 - p_t)
# - n-hata isabeti: max(|e_u|, |e_v|) <= n
# - RMSE: yuvarlanmamış V ile gerçek hareket arasında sqrt(ortalama ||V - Δp||²)
# - Dejenere ajan maskesi: ıskalama sayılır, ayrıca raporlanır; RMSE dışında tutulur

# === TAHMİNCİLER ===
# - model: Checkpoint'ten yüklenen OODP ağı
# - zero_motion: Her zaman V = 0 (alt sınır)
# - oracle: V = gerçek hareket (metriklerin üst sınırı, testler için)
# =======================================================================================

import logging
import math

import numpy as np
import torch

from config.schemas import EvalReport, SplitMetrics
from config.settings import EVAL_CONFIG
from data.collector import TransitionDataset, collect_many
from ml.model import load_checkpoint
from utils.errors import DatasetBalanceError

PREDICTORS = ("model", "zero_motion", "oracle")


def motion_errors(predicted, truth):
    """round(V) - Δp, N x 2 tam sayı hatalar."""
    return np.rint(np.asarray(predicted, dtype=np.float64)) - np.asarray(truth, dtype=np.float64)


def n_error_accuracy(predicted, truth, n_values=None, valid=None):
    """
    n-hata doğruluğu.

    Args:
        predicted (array): N x 2 tahmin edilen hareket
        truth (array): N x 2 gerçek hareket
        n_values (tuple, optional): n değerleri
        valid (array, optional): N geçerlilik bayrağı; geçersizler ıskalama sayılır

    Returns:
        dict: n -> [0, 1] doğruluk
    """
    n_values = EVAL_CONFIG["n_values"] if n_values is None else n_values
    truth = np.asarray(truth, dtype=np.float64).reshape(-1, 2)
    if len(truth) == 0:
        return {int(n): 0.0 for n in n_values}

    err = np.abs(motion_errors(np.asarray(predicted).reshape(-1, 2), truth)).max(axis=1)
    ok = np.ones(len(truth), dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    return {int(n): float(np.mean((err <= n) & ok)) for n in n_values}


def motion_rmse(predicted, truth, valid=None):
    """sqrt(ortalama ||V - Δp||²), sadece geçerli örnekler üzerinde."""
    diff = np.asarray(predicted, dtype=np.float64).reshape(-1, 2) - np.asarray(truth, dtype=np.float64).reshape(-1, 2)
    if valid is not None:
        diff = diff[np.asarray(valid, dtype=bool)]
    if len(diff) == 0:
        return 0.0
    return float(math.sqrt(np.mean((diff ** 2).sum(axis=1))))


def ground_truth_motions(records):
    return np.array([r.motion for r in records], dtype=np.float64).reshape(-1, 2)


@torch.no_grad()
def predict_motions(model, records, agent_index=None, batch_size=64, device="cpu"):
    """
    Kayıtlar için ajan hareket tahminleri.

    Model değerlendirme modunda çalıştırılır ve önceki modu geri yüklenir; parametreler
    ve BN istatistikleri değişmez.

    Returns:
        tuple: (N x 2 hareketler, N geçerlilik bayrağı)
    """
    agent_index = EVAL_CONFIG["agent_index"] if agent_index is None else agent_index
    was_training = model.training
    model.eval()

    dataset = TransitionDataset(records, with_proposal=False)
    motions, valid = [], []
    try:
        for start in range(0, len(dataset), batch_size):
            items = [dataset[i] for i in range(start, min(start + batch_size, len(dataset)))]
            frames = torch.stack([item["frame_t"] for item in items]).to(device)
            actions = torch.stack([item["action"] for item in items]).to(device)
            out = model.predict(frames, actions)
            motions.append(out["motions"][:, agent_index].double().cpu().numpy())
            valid.append(out["valid"][:, agent_index].cpu().numpy())
    finally:
        model.train(was_training)

    if not motions:
        return np.zeros((0, 2)), np.zeros(0, dtype=bool)
    return np.concatenate(motions), np.concatenate(valid)


def sample_eval_records(layouts, n_transitions, seed):
    """
    Değerlendirme geçişleri: her düzende rastgele politika, değişen/değişmeyen dengeli.

    Dengeleme mümkün değilse (tek sınıf) ham kayıtlar kullanılır ve uyarı loglanır.
    """
    steps = max(1, math.ceil(2 * n_transitions / max(len(layouts), 1)))
    records = collect_many(layouts, steps, seed)

    changed = [r for r in records if r.changed]
    changeless = [r for r in records if not r.changed]
    if not changed or not changeless:
        missing = "changed" if not changed else "changeless"
        logging.warning(f"Değerlendirme kümesi dengelenemedi: {DatasetBalanceError(missing)}")
        return records[:n_transitions]

    rng = np.random.default_rng(seed)
    half = min(n_transitions // 2, len(changed), len(changeless))
    picked = ([changed[i] for i in sorted(rng.choice(len(changed), half, replace=False))]
              + [changeless[i] for i in sorted(rng.choice(len(changeless), half, replace=False))])
    return [picked[i] for i in rng.permutation(len(picked))]


def evaluate_records(records, predictor="model", model=None, n_values=None, device="cpu"):
    """
    Hazır kayıt listesi üzerinde değerlendirme (sıfır-hareket taban çizgisi dahil).

    Returns:
        SplitMetrics
    """
    if predictor not in PREDICTORS:
        raise ValueError(f"Bilinmeyen tahminci: {predictor}")
    n_values = EVAL_CONFIG["n_values"] if n_values is None else n_values
    truth = ground_truth_motions(records)

    if predictor == "model":
        if model is None:
            raise ValueError("'model' tahmincisi için model gerekli")
        predicted, valid = predict_motions(model, records, device=device)
    elif predictor == "oracle":
        predicted, valid = truth.copy(), np.ones(len(truth), dtype=bool)
    else:
        predicted, valid = np.zeros_like(truth), np.ones(len(truth), dtype=bool)

    zero = np.zeros_like(truth)
    return SplitMetrics(
        accuracy=n_error_accuracy(predicted, truth, n_values, valid),
        rmse=motion_rmse(predicted, truth, valid),
        count=len(records),
        degenerate=int((~valid).sum()),
        baseline_accuracy=n_error_accuracy(zero, truth, n_values),
        baseline_rmse=motion_rmse(zero, truth),
    )


def evaluate(checkpoint, layouts, n_transitions=None, seed=0, predictor="model", n_values=None, device="cpu"):
    """
    Checkpoint'i (yol ya da model) düzen listesinde değerlendirir.

    Returns:
        SplitMetrics
    """
    n_transitions = EVAL_CONFIG["n_transitions"] if n_transitions is None else n_transitions
    model = None
    if predictor == "model":
        model = load_checkpoint(checkpoint, device)[0] if isinstance(checkpoint, str) else checkpoint

    records = sample_eval_records(layouts, n_transitions, seed)
    metrics = evaluate_records(records, predictor, model, n_values, device)
    logging.info(
        f"Değerlendirme ({predictor}, {len(layouts)} ortam, {metrics.count} geçiş): "
        f"doğruluk={metrics.accuracy}, RMSE={metrics.rmse:.3f}, dejenere={metrics.degenerate}"
    )
    return metrics


def evaluate_suite(checkpoint, train_layouts, test_layouts, n_transitions=None, seed=0,
                   predictor="model", variant="-p", device="cpu"):
    """Eğitim ve görülmemiş ortamlar için k-to-m raporu."""
    model = checkpoint
    if predictor == "model" and isinstance(checkpoint, str):
        model = load_checkpoint(checkpoint, device)[0]

    return EvalReport(
        k=len(train_layouts),
        m=len(test_layouts),
        variant=variant,
        predictor=predictor,
        train=evaluate(model, train_layouts, n_transitions, seed, predictor, device=device) if train_layouts else None,
        unseen=evaluate(model, test_layouts, n_transitions, seed + 1, predictor, device=device) if test_layouts else None,
    )
