# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: generator.py (ORTAM DÜZENİ ÜRETİCİ - k EĞİTİM / m TEST)
# Konum: oodp_desk/core/generator.py
# Açıklama:
# k eğitim ve m test ortam düzenini reddetme örneklemesi ile üretir. Tüm düzenler
# ızgara içeriği bakımından ikişer ikişer farklıdır ve tohum (seed) değerinin
# deterministik fonksiyonudur.
#
# Platform: kenar duvarlar + belirli aralıklarla kat satırları + katları bağlayan merdivenler
# Mars: değer gürültüsü yükselti haritası, eğim >= 5 derece olan karolar kaya
#
# Her aday düzen için ajanın hareket grafiği üzerinde erişilebilirlik kontrolü yapılır.
# =======================================================================================

import json
import logging
import os

import cv2
import numpy as np

from core.layouts import (FREE, LADDER, MARS, PLATFORM, ROCK, WALL, EnvLayout, LayoutSpec,
                          load_layout, save_layout, validate_layout)
from core.physics import agent_mode, is_supported, reachable_cells
from utils.errors import InvalidLayoutError, LayoutGenerationError


def _bordered(h, w, fill):
    grid = np.full((h, w), fill, dtype=np.int8)
    grid[0, :] = grid[-1, :] = WALL
    grid[:, 0] = grid[:, -1] = WALL
    return grid


def _sample_platform_grid(rng, spec):
    h, w = spec.grid_h, spec.grid_w
    grid = _bordered(h, w, FREE)

    # Kat satırları (alt kenardan yukarı doğru floor_gap aralıkla)
    floors = list(range(h - 1 - spec.floor_gap, 1, -spec.floor_gap))
    for row in floors:
        fill = rng.uniform(*spec.floor_fill)
        grid[row, 1:-1][rng.random(w - 2) < fill] = WALL

    # Yürüme satırlarında (her katın hemen üstü) tek karoluk engeller
    wall_density = rng.uniform(*spec.wall_density)
    for row in [h - 2] + [f - 1 for f in floors]:
        grid[row, 1:-1][rng.random(w - 2) < wall_density] = WALL

    # Merdivenler: kat satırından alttaki yürüme satırına kadar
    ladder_density = rng.uniform(*spec.ladder_density)
    for row in floors:
        columns = [c for c in range(1, w - 1) if rng.random() < ladder_density]
        if not columns:
            columns = [int(rng.integers(1, w - 1))]
        for c in columns:
            grid[row:row + spec.floor_gap, c] = LADDER

    return grid


def _platform_spawn(rng, grid, spec):
    # Altında duvar olan boş, merdivensiz hücreler
    candidates = [
        (r, c)
        for r in range(1, spec.grid_h - 1)
        for c in range(1, spec.grid_w - 1)
        if grid[r, c] == FREE and grid[r + 1, c] == WALL
    ]
    if not candidates:
        return None
    r, c = candidates[int(rng.integers(len(candidates)))]
    return r * spec.tile_px, c * spec.tile_px


def _sample_mars(rng, spec):
    h, w = spec.grid_h, spec.grid_w
    lattice = spec.noise_cells
    coarse = rng.random((h // lattice + 2, w // lattice + 2)).astype(np.float32)
    # Değer gürültüsü: kaba kafes + bikübik büyütme
    heights = cv2.resize(coarse, (w, h), interpolation=cv2.INTER_CUBIC)
    heights *= rng.uniform(*spec.relief) * max(h, w)

    gy, gx = np.gradient(heights)
    angles = np.degrees(np.arctan(np.hypot(gx, gy))).astype(np.float32)

    grid = np.where(angles >= spec.max_angle_deg, ROCK, FREE).astype(np.int8)
    grid[0, :] = grid[-1, :] = ROCK
    grid[:, 0] = grid[:, -1] = ROCK
    return grid, angles


def _mars_spawn(rng, grid, spec):
    candidates = np.argwhere(grid == FREE)
    if len(candidates) == 0:
        return None
    r, c = candidates[int(rng.integers(len(candidates)))]
    return int(r) * spec.tile_px, int(c) * spec.tile_px


def sample_layout(rng, spec, seed=0, env_id=0):
    """
    Tek bir aday düzen üretir; değişmezleri sağlamazsa None döndürür.

    Args:
        rng (np.random.Generator): Rastgele sayı üreteci
        spec (LayoutSpec): Üretim parametreleri
    """
    elevation = None
    if spec.variant == MARS:
        grid, elevation = _sample_mars(rng, spec)
        rock_fraction = float(np.mean(grid[1:-1, 1:-1] == ROCK))
        if not spec.rock_density[0] <= rock_fraction <= spec.rock_density[1]:
            return None
        spawn = _mars_spawn(rng, grid, spec)
    else:
        grid = _sample_platform_grid(rng, spec)
        spawn = _platform_spawn(rng, grid, spec)

    if spawn is None:
        return None

    layout = EnvLayout(
        grid=grid,
        tile_px=spec.tile_px,
        palette=spec.palette,
        seed=seed,
        variant=spec.variant,
        spawn=spawn,
        move_step=spec.move_step,
        gravity_step=spec.gravity_step,
        env_id=env_id,
        elevation=elevation,
    )

    try:
        validate_layout(layout)
    except InvalidLayoutError:
        return None

    if spec.variant == PLATFORM and not is_supported(layout, *spawn):
        return None

    if len(reachable_cells(layout)) < spec.min_reachable_cells:
        return None

    return layout


def generate_env_suite(k, m, seed, spec=None, test_palette=None):
    """
    k eğitim ve m test ortam düzeni üretir.

    Args:
        k (int): Eğitim ortamı sayısı (>= 1)
        m (int): Test ortamı sayısı (>= 1)
        seed (int): Tohum değeri
        spec (LayoutSpec, optional): Izgara boyutu ve yoğunluk aralıkları
        test_palette (int, optional): Test düzenleri için farklı sprite paleti

    Returns:
        tuple: (eğitim düzenleri listesi, test düzenleri listesi)

    Raises:
        LayoutGenerationError: Deneme sınırı içinde yeterli düzen bulunamazsa
    """
    if k < 1 or m < 1:
        raise ValueError(f"k ve m en az 1 olmalı (k={k}, m={m})")

    spec = spec or LayoutSpec()
    rng = np.random.default_rng(seed)
    layouts, keys = [], set()
    attempts = 0

    while len(layouts) < k + m:
        if attempts >= spec.max_retries:
            raise LayoutGenerationError(
                f"{spec.max_retries} denemede {k + m} farklı düzen üretilemedi "
                f"(üretilen: {len(layouts)}, varyant: {spec.variant})"
            )
        attempts += 1

        layout_seed = int(rng.integers(2**31 - 1))
        env_id = len(layouts)
        layout = sample_layout(np.random.default_rng(layout_seed), spec, seed=layout_seed, env_id=env_id)
        if layout is None or layout.grid_key() in keys:
            continue

        keys.add(layout.grid_key())
        layouts.append(layout)

    train, test = layouts[:k], layouts[k:]
    if test_palette is not None:
        for layout in test:
            layout.palette = test_palette

    logging.info(f"Ortam paketi üretildi: {k} eğitim + {m} test düzeni ({attempts} deneme, seed={seed})")
    return train, test


def save_suite(train, test, out_dir, seed=None, spec=None):
    """Düzenleri train/ ve test/ klasörlerine, paket bilgisini suite.json dosyasına yazar."""
    for split, layouts in (("train", train), ("test", test)):
        for layout in layouts:
            save_layout(layout, os.path.join(out_dir, split, f"env_{layout.env_id:03d}.txt"))

    manifest = {
        "k": len(train),
        "m": len(test),
        "seed": seed,
        "train_ids": [layout.env_id for layout in train],
        "test_ids": [layout.env_id for layout in test],
        "spec": spec.model_dump() if spec is not None else None,
    }
    with open(os.path.join(out_dir, "suite.json"), "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)

    logging.info(f"Ortam paketi kaydedildi: {out_dir}")


def load_suite(suite_dir):
    """save_suite ile yazılmış paketi okur; (train, test) döndürür."""
    with open(os.path.join(suite_dir, "suite.json"), "r", encoding="utf-8") as f:
        manifest = json.load(f)

    train = [load_layout(os.path.join(suite_dir, "train", f"env_{i:03d}.txt")) for i in manifest["train_ids"]]
    test = [load_layout(os.path.join(suite_dir, "test", f"env_{i:03d}.txt")) for i in manifest["test_ids"]]
    return train, test


def describe_layout(layout):
    """Log için kısa düzen özeti."""
    u, v = layout.spawn
    return (f"env {layout.env_id} ({layout.variant}, {layout.grid.shape[0]}x{layout.grid.shape[1]}, "
            f"başlangıç=({u},{v}), mod={agent_mode(layout, u, v).value})")
