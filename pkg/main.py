# -*- coding: utf-8 -*-
# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: main.py
# Konum: oodp_desk/main.py
# Açıklama:
# OODP Desk komut satırı giriş noktası. Ortam üretimi, veri toplama, eğitim,
# değerlendirme, k-to-m genelleme paketi, fazla maske deneyi ve görselleştirme
# alt komutlarını içerir.
#
# Kullanım:
#   python main.py gen-envs --k 2 --m 10 --seed 7 --out runs/envs
#   python main.py collect --envs runs/envs --steps 5000 --seed 0 --out runs/data
#   python main.py train --data runs/data --config train.cfg --variant minus-p --out runs/train
#   python main.py eval --checkpoint runs/train/best.pt --suite runs/envs
#   python main.py suite --k-list 1,2,3,4,5 --m 10 --out runs/suite
#   python main.py redundancy --data runs/data --suite runs/envs --out runs/redundancy
#   python main.py viz --checkpoint runs/train/best.pt --suite runs/envs --out runs/viz
# =======================================================================================

import argparse                    # Komut satırı argümanları
import logging                     # Loglama işlemleri
import os                          # Dosya/dizin işlemleri
import platform                    # Platform bilgisi
import sys                         # Sistem işlemleri (çıkış kodu)
import time                        # Süre ölçümü

import numpy as np
import pandas as pd

from config.schemas import load_train_config, normalize_variant
from config.settings import APP_DESCRIPTION, APP_NAME, APP_VERSION, DATA_ROOT, DEVICE, EVAL_CONFIG, validate_config
from utils.errors import ConfigError, OODPError
from utils.logger import setup_logger


def print_startup_banner():
    """Başlangıç banner'ını yazdırır."""
    banner = f"""
{'=' * 80}
🚀 {APP_NAME} v{APP_VERSION}
{APP_DESCRIPTION}
{'=' * 80}
💻 Platform: {platform.system()} {platform.architecture()[0]}
🐍 Python: {sys.version.split()[0]}
{'=' * 80}
"""
    print(banner)


def check_system():
    """Python sürümü, RAM, hesaplama cihazı ve yapılandırma kontrolü."""
    if sys.version_info < (3, 9):
        logging.error(f"❌ Python 3.9+ gerekli, mevcut: {sys.version.split()[0]}")
        return False

    try:
        import psutil
        memory_gb = psutil.virtual_memory().total / (1024 ** 3)
        if memory_gb < 4.0:
            logging.warning(f"⚠️ Düşük RAM: {memory_gb:.1f} GB (önerilen: 8GB+)")
        else:
            logging.info(f"💾 Toplam RAM: {memory_gb:.1f} GB")
    except ImportError:
        logging.warning("⚠️ psutil bulunamadı, bellek kontrolü atlandı")

    import torch
    logging.info(f"🔧 PyTorch {torch.__version__}, cihaz: {DEVICE}")

    errors = validate_config()
    if errors:
        logging.error("❌ Konfigürasyon hataları:")
        for error in errors:
            logging.error(f"   - {error}")
        return False
    return True


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Virgülle ayrılmış tam sayılar bekleniyordu: {text}") from e


def _variant(text):
    # argparse "-p" değerini seçenek sanır: "--variant=-p" ya da "--variant minus-p"
    try:
        return normalize_variant(text)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _layout_spec(args):
    from core.layouts import LayoutSpec

    values = {"variant": args.env_variant, "palette": args.palette}
    if args.grid_h is not None:
        values["grid_h"] = args.grid_h
    if args.grid_w is not None:
        values["grid_w"] = args.grid_w
    return LayoutSpec(**values)


def _train_config(args):
    overrides = {"variant": getattr(args, "variant", None), "device": DEVICE}
    if getattr(args, "max_steps", None) is not None:
        overrides["max_steps"] = args.max_steps
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return load_train_config(getattr(args, "config", None), **overrides)


# ===== ALT KOMUTLAR =====

def cmd_gen_envs(args):
    from core.generator import describe_layout, generate_env_suite, save_suite

    spec = _layout_spec(args)
    train_layouts, test_layouts = generate_env_suite(args.k, args.m, args.seed, spec, args.test_palette)
    save_suite(train_layouts, test_layouts, args.out, args.seed, spec)
    for layout in train_layouts + test_layouts:
        logging.info(f"   {describe_layout(layout)}")
    return 0


def cmd_collect(args):
    from core.generator import load_suite
    from data.collector import balance, collect_many
    from data.storage import write_dataset

    train_layouts, test_layouts = load_suite(args.envs)
    layouts = train_layouts if args.split == "train" else test_layouts
    records = collect_many(layouts, args.steps, args.seed, workers=args.workers)
    if not args.no_balance:
        records = balance(records, args.seed)
    write_dataset(records, args.out, frame_shape=layouts[0].frame_shape,
                  seeds={"collect": args.seed, "balance": None if args.no_balance else args.seed},
                  extra={"split": args.split, "steps_per_env": args.steps})
    return 0


def cmd_train(args):
    from data.storage import read_dataset
    from ml.train_dynamics import train

    config = _train_config(args)
    records, manifest = read_dataset(args.data)
    result = train(config, records, args.out, frame_shape=(manifest["height"], manifest["width"]))
    logging.info(f"✅ Eğitim bitti: {result.steps} adım, en iyi doğrulama doğruluğu {result.best_accuracy}")
    return 0


def cmd_eval(args):
    from core.generator import load_suite
    from ml.evaluate import evaluate_suite

    train_layouts, test_layouts = load_suite(args.suite)
    variant = "-p"
    if args.predictor == "model":
        from ml.model import load_checkpoint
        model, config, _ = load_checkpoint(args.checkpoint, DEVICE)
        variant = config.variant
    else:
        model = None

    report = evaluate_suite(model, train_layouts, test_layouts, args.n_transitions, args.seed,
                            predictor=args.predictor, variant=variant, device=DEVICE)
    accuracy_table = pd.DataFrame([report.accuracy_row(EVAL_CONFIG["n_values"])])
    rmse_table = pd.DataFrame([report.rmse_row()])
    print(accuracy_table.to_string(index=False))
    print(rmse_table.to_string(index=False))

    if args.out:
        os.makedirs(args.out, exist_ok=True)
        accuracy_table.to_csv(os.path.join(args.out, "accuracy.csv"), index=False)
        rmse_table.to_csv(os.path.join(args.out, "rmse.csv"), index=False)
    return 0


def cmd_suite(args):
    from ml.experiments import run_generalization_suite

    config = _train_config(args)
    spec = _layout_spec(args)
    accuracy_table, rmse_table = run_generalization_suite(
        config, args.k_list, args.m, args.seed, args.out,
        steps_per_env=args.steps_per_env, n_transitions=args.n_transitions,
        spec=spec, test_palette=args.test_palette,
    )
    print(accuracy_table.to_string(index=False))
    print(rmse_table.to_string(index=False))
    return 0


def cmd_redundancy(args):
    from core.generator import load_suite
    from data.storage import read_dataset
    from ml.experiments import redundancy_study

    config = _train_config(args)
    records, _ = read_dataset(args.data)
    train_layouts, test_layouts = load_suite(args.suite)
    table = redundancy_study(config, records, train_layouts, test_layouts, args.static_counts,
                             args.n_transitions, args.seed, args.out)
    print(table.to_string(index=False))
    return 0


def cmd_viz(args):
    from core.generator import load_suite
    from data.collector import collect_many
    from ml.model import load_checkpoint
    from utils.visualize import visualize

    model, _, _ = load_checkpoint(args.checkpoint, DEVICE)
    train_layouts, test_layouts = load_suite(args.suite)
    layouts = test_layouts if args.split == "test" else train_layouts

    records = collect_many(layouts, max(1, args.n_frames), args.seed)
    rng = np.random.default_rng(args.seed)
    picked = [records[i] for i in sorted(rng.choice(len(records), min(args.n_frames, len(records)), replace=False))]
    visualize(model, [r.frame_t for r in picked], [r.action for r in picked], args.out,
              next_frames=[r.frame_t1 for r in picked], device=DEVICE)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="oodp", description=APP_NAME)
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    def layout_args(p):
        p.add_argument("--grid-h", type=int, default=None)
        p.add_argument("--grid-w", type=int, default=None)
        p.add_argument("--variant-env", dest="env_variant", choices=("platform", "mars"), default="platform")
        p.add_argument("--palette", type=int, default=0)
        p.add_argument("--test-palette", type=int, default=None, help="Test düzenleri için farklı sprite paleti")

    def train_args(p):
        p.add_argument("--config", default=None, help="Düz anahtar=değer eğitim yapılandırması")
        p.add_argument("--variant", type=_variant, default=None,
                       help="plus-p / minus-p (ya da --variant=+p, --variant=-p)")
        p.add_argument("--max-steps", type=int, default=None)

    p = sub.add_parser("gen-envs", help="k eğitim + m test ortam düzeni üret")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-h", type=int, default=None)
    p.add_argument("--grid-w", type=int, default=None)
    p.add_argument("--variant", dest="env_variant", choices=("platform", "mars"), default="platform")
    p.add_argument("--palette", type=int, default=0)
    p.add_argument("--test-palette", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_envs)

    p = sub.add_parser("collect", help="Rastgele politika ile geçiş topla")
    p.add_argument("--envs", required=True)
    p.add_argument("--steps", type=int, required=True, help="Ortam başına adım")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", choices=("train", "test"), default="train")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-balance", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("train", help="OODP modelini eğit")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=os.path.join(DATA_ROOT, "train"))
    train_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="Checkpoint'i eğitim/görülmemiş ortamlarda değerlendir")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--suite", required=True)
    p.add_argument("--n-transitions", type=int, default=EVAL_CONFIG["n_transitions"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--predictor", choices=("model", "zero_motion", "oracle"), default="model")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("suite", help="k-to-m genelleme paketi (doğruluk ve RMSE tabloları)")
    p.add_argument("--k-list", type=_int_list, default=list(EVAL_CONFIG["k_list"]))
    p.add_argument("--m", type=int, default=EVAL_CONFIG["m"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps-per-env", type=int, default=None)
    p.add_argument("--n-transitions", type=int, default=None)
    p.add_argument("--out", default=os.path.join(DATA_ROOT, "suite"))
    train_args(p)
    layout_args(p)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("redundancy", help="Fazla statik maske deneyi")
    p.add_argument("--data", required=True)
    p.add_argument("--suite", required=True)
    p.add_argument("--static-counts", type=_int_list, default=list(EVAL_CONFIG["redundant_static_counts"]))
    p.add_argument("--n-transitions", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=os.path.join(DATA_ROOT, "redundancy"))
    train_args(p)
    p.set_defaults(func=cmd_redundancy)

    p = sub.add_parser("viz", help="Maske / arka plan / tahmin PNG'leri")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--suite", required=True)
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--n-frames", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=os.path.join(DATA_ROOT, "viz"))
    p.set_defaults(func=cmd_viz)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    setup_logger(args.log_level)
    print_startup_banner()

    if not check_system():
        return 1

    if args.command == "eval" and args.predictor == "model" and not args.checkpoint:
        logging.error("❌ 'model' tahmincisi için --checkpoint gerekli")
        return 2

    start_time = time.time()
    try:
        code = args.func(args)
    except ConfigError as e:
        logging.error(f"❌ [{e.code}] {e} - Çözüm: {e.solution}")
        return 2
    except OODPError as e:
        logging.error(f"❌ [{e.code}] {e} - Çözüm: {e.solution}")
        return 1
    except KeyboardInterrupt:
        logging.info("⚠️ Kullanıcı iptal etti")
        return 130

    logging.info(f"✅ '{args.command}' tamamlandı ({time.time() - start_time:.1f}s)")
    return code


if __name__ == "__main__":
    sys.exit(main())
