# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: experiments.py (k-to-m GENELLEME VE FAZLA MASKE DENEYLERİ)
# Konum: oodp_desk/ml/experiments.py
# Açıklama:
# Tek bir ortam paketi (k_max eğitim + m test düzeni) üretilir; her k için ilk k eğitim
# düzeninden veri toplanır, model eğitilir ve eğitim / görülmemiş ortamlarda
# değerlendirilir. Sonuçlar n-hata doğruluğu ve RMSE tablosu olarak CSV
# dosyalarına yazılır.
#
# Fazla maske deneyi: gerçek statik sınıf sayısı 3 iken n_S = 3 ve n_S = 5 ile eğitilen
# modellerin görülmemiş ortam 0-hata doğrulukları ve maske-sınıf IoU raporları.

# === ÇIKTILAR (out_dir) ===
#   envs/                 -> ortam paketi (gen-envs formatı)
#   k_<k>/                -> her k için eğitim çıktıları
#   accuracy.csv, rmse.csv
#   reports.json          -> EvalReport listesi
#   redundancy.csv, mask_iou_nS<n>.csv
# =======================================================================================

import json
import logging
import os

import pandas as pd

from config.settings import DATA_ROOT, EVAL_CONFIG, TRAIN_CONFIG
from core.generator import generate_env_suite, save_suite
from data.collector import balance, collect_many
from data.storage import write_dataset
from ml.evaluate import evaluate_suite
from ml.model import load_checkpoint
from ml.train_dynamics import train
from utils.mask_report import mask_coverage_report


class GeneralizationSuite:
    """k listesi ve m için eğit-değerlendir döngüsü."""

    def __init__(self, config, k_list=None, m=None, seed=0, steps_per_env=None, n_transitions=None,
                 out_dir=None, spec=None, test_palette=None):
        self.config = config
        self.k_list = sorted(k_list or EVAL_CONFIG["k_list"])
        self.m = EVAL_CONFIG["m"] if m is None else m
        self.seed = seed
        self.steps_per_env = TRAIN_CONFIG["steps_per_env"] if steps_per_env is None else steps_per_env
        self.n_transitions = EVAL_CONFIG["n_transitions"] if n_transitions is None else n_transitions
        self.out_dir = out_dir or os.path.join(DATA_ROOT, "suite")
        self.spec = spec
        self.test_palette = test_palette
        self.reports = []

    def environments(self):
        train_layouts, test_layouts = generate_env_suite(
            max(self.k_list), self.m, self.seed, self.spec, test_palette=self.test_palette
        )
        save_suite(train_layouts, test_layouts, os.path.join(self.out_dir, "envs"), self.seed, self.spec)
        return train_layouts, test_layouts

    def training_records(self, layouts):
        records = collect_many(layouts, self.steps_per_env, self.seed)
        return balance(records, self.seed)

    def run(self):
        os.makedirs(self.out_dir, exist_ok=True)
        train_layouts, test_layouts = self.environments()

        for k in self.k_list:
            logging.info(f"=== {k}-to-{self.m} genelleme ===")
            run_dir = os.path.join(self.out_dir, f"k_{k}")
            records = self.training_records(train_layouts[:k])
            write_dataset(records, os.path.join(run_dir, "dataset"),
                          seeds={"collect": self.seed, "balance": self.seed})

            result = train(self.config, records, run_dir)
            checkpoint = result.best_checkpoint or result.last_checkpoint
            report = evaluate_suite(checkpoint, train_layouts[:k], test_layouts, self.n_transitions,
                                    self.seed, variant=self.config.variant, device=self.config.device)
            self.reports.append(report)

        return self.reports

    def tables(self):
        n_values = EVAL_CONFIG["n_values"]
        accuracy_table = pd.DataFrame([r.accuracy_row(n_values) for r in self.reports])
        rmse_table = pd.DataFrame([r.rmse_row() for r in self.reports])
        return accuracy_table, rmse_table

    def save_results(self, out_dir=None):
        out_dir = out_dir or self.out_dir
        os.makedirs(out_dir, exist_ok=True)
        accuracy_table, rmse_table = self.tables()
        accuracy_table.to_csv(os.path.join(out_dir, "accuracy.csv"), index=False)
        rmse_table.to_csv(os.path.join(out_dir, "rmse.csv"), index=False)
        with open(os.path.join(out_dir, "reports.json"), "w", encoding="utf-8") as f:
            json.dump([r.model_dump() for r in self.reports], f, indent=2)
        logging.info(f"Genelleme tabloları yazıldı: {out_dir}")
        return accuracy_table, rmse_table


def run_generalization_suite(config, k_list=None, m=None, seed=0, out_dir=None, **kwargs):
    """
    Her k için bir model eğitir, eğitim ve görülmemiş ortamlarda değerlendirir.

    Returns:
        tuple: (doğruluk DataFrame, RMSE DataFrame)
    """
    suite = GeneralizationSuite(config, k_list, m, seed, out_dir=out_dir, **kwargs)
    suite.run()
    return suite.save_results()


def redundancy_study(config, records, train_layouts, test_layouts, static_counts=None,
                     n_transitions=None, seed=0, out_dir=None, tolerance=None):
    """
    Aynı veriyle farklı statik maske sayılarında eğitip görülmemiş ortam doğruluğunu karşılaştırır.

    Her n_S için doğrulamada en iyi checkpoint değerlendirilir.

    Returns:
        DataFrame: n_static, unseen_0_error, unseen_1_error, unseen_2_error, degenerate,
        min_static_iou, difference_0_error, within_tolerance
    """
    static_counts = static_counts or EVAL_CONFIG["redundant_static_counts"]
    out_dir = out_dir or os.path.join(DATA_ROOT, "redundancy")
    os.makedirs(out_dir, exist_ok=True)

    rows = []
    for n_static in static_counts:
        run_dir = os.path.join(out_dir, f"nS_{n_static}")
        run_config = config.model_copy(update={"n_static": n_static})
        result = train(run_config, records, run_dir)
        model, _, _ = load_checkpoint(result.best_checkpoint or result.last_checkpoint, run_config.device)

        report = evaluate_suite(model, train_layouts, test_layouts, n_transitions, seed,
                                variant=run_config.variant, device=run_config.device)
        iou = mask_coverage_report(model, test_layouts, device=run_config.device)
        iou.to_csv(os.path.join(out_dir, f"mask_iou_nS{n_static}.csv"), index=False)

        static_iou = iou[iou["class"] != "agent"]["iou"]
        rows.append({
            "n_static": n_static,
            **{f"unseen_{n}_error": report.unseen.accuracy[n] for n in report.unseen.accuracy},
            "degenerate": report.unseen.degenerate,
            "min_static_iou": float(static_iou.min()) if len(static_iou) else None,
        })

    table = redundancy_table(rows, tolerance)
    table.to_csv(os.path.join(out_dir, "redundancy.csv"), index=False)
    logging.info("Fazla maske deneyi:\n" + table.to_string(index=False))
    return table


def redundancy_table(rows, tolerance=None):
    """
    n_S satırlarını tabloya çevirir; 0-hata doğruluğunun ilk satıra farkını tolerans ile karşılaştırır.

    Tolerans aşılırsa uyarı loglanır, tablo yine döner.
    """
    tolerance = EVAL_CONFIG["redundancy_tolerance"] if tolerance is None else tolerance
    table = pd.DataFrame(rows)
    table["difference_0_error"] = table["unseen_0_error"] - table["unseen_0_error"].iloc[0]
    table["within_tolerance"] = table["difference_0_error"].abs() <= tolerance

    for row in table[~table["within_tolerance"]].itertuples():
        logging.warning(
            f"⚠️ n_S={row.n_static}: 0-hata farkı {row.difference_0_error:+.3f}, "
            f"tolerans ±{tolerance:.3f} aşıldı"
        )
    return table
