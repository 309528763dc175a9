# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: layouts.py (ORTAM DÜZENİ VERİ YAPILARI VE DOSYA FORMATI)
# Konum: oodp_desk/core/layouts.py
# Açıklama:
# Izgara dünyası ortam düzenlerini (EnvLayout) ve düzen üretim parametrelerini
# (LayoutSpec) tanımlar. Düzenler metin tabanlı bir manifest dosyasına yazılır/okunur.
#
# İki varyant desteklenir:
# 1. platform: Monster Kong benzeri duvar / merdiven / boş alan ızgarası
# 2. mars: kayalık (eğim >= 5 derece) / düz zemin ızgarası ve karo başına eğim açısı

# === DOSYA FORMATI ===
# variant = platform          (anahtar = değer satırları)
# tile_px = 8
# ...
# grid:                       (karakter ızgarası: '#' duvar, 'H' merdiven, '.' boş, '^' kaya)
# ##########
# elevation:                  (sadece mars: karo başına eğim açısı, derece)
# =======================================================================================

import logging
import os
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from config.settings import ENV_CONFIG
from utils.errors import InvalidLayoutError

# Hücre türleri - platform varyantı
FREE = 0
WALL = 1
LADDER = 2

# Hücre türleri - Mars varyantı (geçilemez hücre WALL ile aynı kodu kullanır)
FLAT = 0
ROCK = 1

PLATFORM = "platform"
MARS = "mars"
VARIANTS = (PLATFORM, MARS)

CELL_NAMES = {FREE: "free", WALL: "wall", LADDER: "ladder"}

_CHARS = {
    PLATFORM: {FREE: ".", WALL: "#", LADDER: "H"},
    MARS: {FLAT: ".", ROCK: "^"},
}


class LayoutSpec(BaseModel):
    """Düzen üretim parametreleri (varsayılanlar ENV_CONFIG'den)."""

    variant: str = Field(PLATFORM, description="platform veya mars")
    grid_h: int = Field(ENV_CONFIG["grid_h"], ge=3)
    grid_w: int = Field(ENV_CONFIG["grid_w"], ge=3)
    tile_px: int = Field(ENV_CONFIG["tile_px"], ge=1)
    move_step: int = Field(ENV_CONFIG["move_step"], ge=1)
    gravity_step: int = Field(ENV_CONFIG["gravity_step"], ge=0)
    floor_gap: int = Field(ENV_CONFIG["floor_gap"], ge=2)
    floor_fill: Tuple[float, float] = ENV_CONFIG["floor_fill"]
    wall_density: Tuple[float, float] = ENV_CONFIG["wall_density"]
    ladder_density: Tuple[float, float] = ENV_CONFIG["ladder_density"]
    rock_density: Tuple[float, float] = ENV_CONFIG["mars_rock_density"]
    relief: Tuple[float, float] = ENV_CONFIG["mars_relief"]
    max_angle_deg: float = ENV_CONFIG["mars_max_angle_deg"]
    noise_cells: int = Field(ENV_CONFIG["mars_noise_cells"], ge=1)
    min_reachable_cells: int = Field(ENV_CONFIG["min_reachable_cells"], ge=1)
    max_retries: int = Field(ENV_CONFIG["max_retries"], ge=1)
    palette: int = 0


@dataclass(eq=False)
class EnvLayout:
    """
    Tek bir ortam düzeni.

    grid: karo türleri (int8, grid_h x grid_w)
    spawn: ajanın başlangıç pozisyonu (sol üst köşe, piksel)
    elevation: sadece Mars varyantında karo başına eğim açısı (derece)
    """

    grid: np.ndarray
    tile_px: int = ENV_CONFIG["tile_px"]
    palette: int = 0
    seed: int = 0
    variant: str = PLATFORM
    spawn: Tuple[int, int] = (0, 0)
    move_step: int = ENV_CONFIG["move_step"]
    gravity_step: int = ENV_CONFIG["gravity_step"]
    env_id: int = 0
    elevation: Optional[np.ndarray] = None
    _static_cache: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    @property
    def frame_shape(self):
        """(H, W) piksel boyutu."""
        return self.grid.shape[0] * self.tile_px, self.grid.shape[1] * self.tile_px

    @property
    def sprite_px(self):
        return self.tile_px

    def grid_key(self):
        """Düzenlerin ikili karşılaştırması için ızgara içeriği anahtarı."""
        return self.variant.encode() + self.grid.astype(np.int8).tobytes()


def validate_layout(layout):
    """
    Düzen değişmezlerini kontrol eder; ihlalde InvalidLayoutError fırlatır.

    - Kenar hücreler duvar (Mars: kaya)
    - Başlangıç pozisyonu kare içinde ve duvarla çakışmıyor
    """
    if layout.variant not in VARIANTS:
        raise InvalidLayoutError(f"Bilinmeyen varyant: {layout.variant}")

    grid = layout.grid
    if grid.ndim != 2 or min(grid.shape) < 3:
        raise InvalidLayoutError(f"Geçersiz ızgara boyutu: {grid.shape}")

    border = np.concatenate([grid[0, :], grid[-1, :], grid[:, 0], grid[:, -1]])
    if not np.all(border == WALL):
        raise InvalidLayoutError("Kenar hücreleri duvar olmalı")

    h, w = layout.frame_shape
    u, v = layout.spawn
    t = layout.sprite_px
    if u < 0 or v < 0 or u + t > h or v + t > w:
        raise InvalidLayoutError(f"Başlangıç pozisyonu kare dışında: {layout.spawn}")
    cells = grid[u // layout.tile_px:(u + t - 1) // layout.tile_px + 1,
                 v // layout.tile_px:(v + t - 1) // layout.tile_px + 1]
    if np.any(cells == WALL):
        raise InvalidLayoutError(f"Başlangıç pozisyonu duvarla çakışıyor: {layout.spawn}")

    if layout.variant == MARS and layout.elevation is None:
        raise InvalidLayoutError("Mars düzeni yükselti bilgisi içermeli")


def grid_to_text(layout):
    """Izgarayı karakter satırlarına çevirir."""
    chars = _CHARS[layout.variant]
    return ["".join(chars[int(c)] for c in row) for row in layout.grid]


def save_layout(layout, path):
    """
    Düzeni metin manifest dosyasına yazar.

    Args:
        layout (EnvLayout): Kaydedilecek düzen
        path (str): Hedef dosya yolu
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)

    lines = [
        "# OODP ortam düzeni",
        f"variant = {layout.variant}",
        f"tile_px = {layout.tile_px}",
        f"seed = {layout.seed}",
        f"palette = {layout.palette}",
        f"env_id = {layout.env_id}",
        f"spawn = {layout.spawn[0]},{layout.spawn[1]}",
        f"move_step = {layout.move_step}",
        f"gravity_step = {layout.gravity_step}",
        "grid:",
        *grid_to_text(layout),
    ]
    if layout.elevation is not None:
        lines.append("elevation:")
        lines.extend(" ".join(f"{a:.4f}" for a in row) for row in layout.elevation)

    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")

    logging.debug(f"Düzen kaydedildi: {path}")


def load_layout(path):
    """
    Metin manifest dosyasından düzen okur.

    Returns:
        EnvLayout: Doğrulanmış düzen
    """
    with open(path, "r", encoding="utf-8") as f:
        raw = [line.rstrip("\n") for line in f]

    fields = {}
    grid_rows, elevation_rows = [], []
    section = None
    for line in raw:
        if not line.strip() or (line.startswith("#") and section is None):
            continue
        if line == "grid:":
            section = "grid"
            continue
        if line == "elevation:":
            section = "elevation"
            continue
        if section == "grid":
            grid_rows.append(line)
        elif section == "elevation":
            elevation_rows.append([float(x) for x in line.split()])
        else:
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()

    try:
        variant = fields["variant"]
        lookup = {ch: kind for kind, ch in _CHARS[variant].items()}
        grid = np.array([[lookup[ch] for ch in row] for row in grid_rows], dtype=np.int8)
        spawn_u, spawn_v = (int(x) for x in fields["spawn"].split(","))
        layout = EnvLayout(
            grid=grid,
            tile_px=int(fields["tile_px"]),
            palette=int(fields.get("palette", 0)),
            seed=int(fields["seed"]),
            variant=variant,
            spawn=(spawn_u, spawn_v),
            move_step=int(fields.get("move_step", ENV_CONFIG["move_step"])),
            gravity_step=int(fields.get("gravity_step", ENV_CONFIG["gravity_step"])),
            env_id=int(fields.get("env_id", 0)),
            elevation=np.array(elevation_rows, dtype=np.float32) if elevation_rows else None,
        )
    except (KeyError, ValueError) as e:
        raise InvalidLayoutError(f"Düzen dosyası okunamadı ({path}): {e}") from e

    validate_layout(layout)
    return layout
