# oodp_desk/utils/logger.py
import logging
import os
import sys
from datetime import datetime
from logging.handlers import RotatingFileHandler

from config.settings import LOG_DIR, LOGGING_CONFIG


def setup_logger(level=None, log_dir=None):
    """
    Loglama sistemini yapılandırır.

    Özellikler:
    - Konsolda ve dosyada loglama
    - Tarih/saat formatı
    - Log dosyası boyuta göre rotasyon (LOGGING_CONFIG)

    Args:
        level (str, optional): Log seviyesi, varsayılan LOGGING_CONFIG["level"]
        log_dir (str, optional): Log klasörü, varsayılan LOG_DIR

    Returns:
        logging.Logger: Yapılandırılmış root logger
    """
    level = getattr(logging, (level or LOGGING_CONFIG["level"]).upper(), logging.INFO)
    formatter = logging.Formatter(LOGGING_CONFIG["format"], LOGGING_CONFIG["date_format"])

    # Root logger'ı yapılandır
    logger = logging.getLogger()
    logger.setLevel(level)

    # Tüm handler'ları temizle
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)

    if LOGGING_CONFIG["console_logging"]:
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    # Dosya çıktısı
    if LOGGING_CONFIG["file_logging"]:
        try:
            logs_dir = log_dir or LOG_DIR
            os.makedirs(logs_dir, exist_ok=True)

            current_time = datetime.now().strftime("%Y%m%d_%H%M%S")
            log_file = os.path.join(logs_dir, f"oodp_{current_time}.log")

            file_handler = RotatingFileHandler(
                log_file,
                maxBytes=LOGGING_CONFIG["max_log_size"],
                backupCount=LOGGING_CONFIG["backup_count"],
                encoding="utf-8",
            )
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        except OSError as e:
            print(f"Log dosyası oluşturulurken hata: {e}")

    logging.info(f"Logger başlatıldı - Seviye: {logging.getLevelName(level)}")

    return logger
