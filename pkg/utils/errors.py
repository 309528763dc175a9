# File: oodp_desk/utils/errors.py
# Açıklama: Uygulama genelindeki hata sınıfları. Her hata, config/settings.py içindeki
# ERROR_CODES tablosundan bir sayısal kod taşır; CLI bu kodu loglayıp çıkış yapar.

from config.settings import ERROR_CODES


class OODPError(Exception):
    """Tüm OODP hatalarının temel sınıfı."""

    error_key = "CONFIG"

    def __init__(self, message=None):
        info = ERROR_CODES.get(self.error_key, {})
        self.code = info.get("code", 0)
        self.solution = info.get("solution", "")
        super().__init__(message or info.get("message", self.__class__.__name__))


class LayoutGenerationError(OODPError):
    error_key = "LAYOUT_GENERATION_FAILED"


class InvalidLayoutError(OODPError):
    error_key = "INVALID_LAYOUT"


class DatasetBalanceError(OODPError):
    error_key = "DATASET_BALANCE"

    def __init__(self, missing_class):
        self.missing_class = missing_class
        super().__init__(f"Dengeleme için '{missing_class}' sınıfında kayıt yok")


class DatasetVersionError(OODPError):
    error_key = "DATASET_VERSION"


class DatasetTruncatedError(OODPError):
    error_key = "DATASET_TRUNCATED"


class DatasetChecksumError(OODPError):
    error_key = "DATASET_CHECKSUM"


class ShapeMismatchError(OODPError, ValueError):
    error_key = "SHAPE_MISMATCH"


class DegenerateMaskError(OODPError):
    error_key = "DEGENERATE_MASK"


class InvalidWindowError(OODPError, ValueError):
    error_key = "INVALID_WINDOW"


class LossInvariantError(OODPError):
    error_key = "LOSS_INVARIANT"


class TrainingDivergedError(OODPError):
    error_key = "TRAINING_DIVERGED"


class CheckpointError(OODPError):
    error_key = "CHECKPOINT"


class ConfigError(OODPError, ValueError):
    error_key = "CONFIG"
