# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: renderer.py (SPRITE TABANLI KARE ÇİZİCİ)
# Konum: oodp_desk/core/renderer.py
# Açıklama:
# Ortam düzenini ve ajan durumunu H x W x 3 uint8 kareye çizer. Çizim tamamen
# deterministiktir: aynı (düzen, durum) her zaman aynı pikselleri üretir.
#
# Katmanlar: arka plan dokusu -> duvar/merdiven sprite'ları -> ajan sprite'ı
# Ajan sprite'ı opaktır ve renkleri hiçbir paletin arka plan/duvar/merdiven
# renkleriyle çakışmaz; bu sayede iki kare farkı tam olarak sprite izlerinde oluşur.
#
# Paletler sprite görünüm pertürbasyonu için kullanılır (görünüm dayanıklılığı testleri).
# =======================================================================================

import numpy as np

from core.layouts import FREE, LADDER, MARS, WALL

# Paletler: (arka plan A, arka plan B, duvar, harç, merdiven)
PALETTES = (
    {"bg": ((18, 20, 38), (22, 24, 46)), "wall": (150, 70, 40), "mortar": (96, 44, 26),
     "ladder": (200, 170, 90)},
    {"bg": ((30, 34, 30), (36, 40, 36)), "wall": (110, 110, 130), "mortar": (70, 70, 86),
     "ladder": (90, 180, 200)},
    {"bg": ((44, 20, 44), (52, 24, 52)), "wall": (60, 130, 60), "mortar": (36, 84, 36),
     "ladder": (210, 210, 210)},
)

# Ajan renkleri hiçbir paletin karo renkleriyle çakışmaz
AGENT_BODY = (236, 52, 60)
AGENT_FACE = (255, 222, 0)

# Mars zemin renkleri
MARS_FLAT = np.array((176, 98, 58), dtype=np.float32)
MARS_ROCK = np.array((92, 50, 36), dtype=np.float32)
ROVER_BODY = (238, 238, 245)
ROVER_WHEEL = (8, 8, 8)

# Sınıf haritası kodları (maske yorumlanabilirlik raporu için)
CLASS_FREE = FREE
CLASS_WALL = WALL
CLASS_LADDER = LADDER
CLASS_AGENT = 3


def _palette(layout):
    return PALETTES[layout.palette % len(PALETTES)]


def _wall_sprite(t, palette):
    sprite = np.empty((t, t, 3), dtype=np.uint8)
    sprite[:] = palette["wall"]
    half = max(t // 2, 1)
    sprite[0, :] = palette["mortar"]
    sprite[half, :] = palette["mortar"]
    sprite[:half, 0] = palette["mortar"]
    sprite[half:, half] = palette["mortar"]
    return sprite


def _ladder_alpha(t):
    # Kenar rayları + üç pikselde bir basamak
    alpha = np.zeros((t, t), dtype=bool)
    alpha[:, min(1, t - 1)] = True
    alpha[:, max(t - 2, 0)] = True
    alpha[::3, :] = True
    return alpha


def _agent_sprite(t, body, face):
    sprite = np.empty((t, t, 3), dtype=np.uint8)
    sprite[:] = body
    # Göz bandı
    band = slice(max(t // 4, 0), max(t // 4, 0) + max(t // 4, 1))
    sprite[band, max(t // 4, 0):t - max(t // 4, 0)] = face
    return sprite


def _platform_background(layout):
    h, w = layout.frame_shape
    palette = _palette(layout)
    rows, cols = np.mgrid[0:h, 0:w]
    checker = ((rows // 2 + cols // 2) % 2).astype(bool)
    frame = np.empty((h, w, 3), dtype=np.uint8)
    frame[~checker] = palette["bg"][0]
    frame[checker] = palette["bg"][1]
    return frame


def _platform_static(layout):
    frame = _platform_background(layout)
    t = layout.tile_px
    palette = _palette(layout)
    wall = _wall_sprite(t, palette)
    ladder = _ladder_alpha(t)

    for r, c in np.argwhere(layout.grid == WALL):
        frame[r * t:(r + 1) * t, c * t:(c + 1) * t] = wall
    for r, c in np.argwhere(layout.grid == LADDER):
        tile = frame[r * t:(r + 1) * t, c * t:(c + 1) * t]
        tile[ladder] = palette["ladder"]
    return frame


def _mars_static(layout):
    # Prosedürel doku: karo eğimine göre renk + deterministik piksel gürültüsü
    h, w = layout.frame_shape
    t = layout.tile_px
    rng = np.random.default_rng(layout.seed)
    angles = np.repeat(np.repeat(layout.elevation, t, axis=0), t, axis=1)
    shade = np.clip(angles / 10.0, 0.0, 1.0)[..., None]
    frame = MARS_FLAT * (1.0 - 0.35 * shade)
    rocks = np.repeat(np.repeat(layout.grid == WALL, t, axis=0), t, axis=1)
    frame[rocks] = MARS_ROCK
    frame += rng.integers(-6, 7, size=(h, w, 1))
    # Rover renkleri (çok açık / çok koyu) zeminde oluşmaz
    return np.clip(frame, 30, 215).astype(np.uint8)


def static_layer(layout):
    """Düzenin ajan içermeyen katmanı (düzen nesnesinde önbelleklenir)."""
    if layout._static_cache is None or layout._static_cache[0] != layout.palette:
        frame = _mars_static(layout) if layout.variant == MARS else _platform_static(layout)
        frame.setflags(write=False)
        layout._static_cache = (layout.palette, frame)
    return layout._static_cache[1]


def agent_sprite(layout):
    t = layout.sprite_px
    if layout.variant == MARS:
        sprite = _agent_sprite(t, ROVER_BODY, ROVER_WHEEL)
        sprite[-1, :] = ROVER_WHEEL
        return sprite
    return _agent_sprite(t, AGENT_BODY, AGENT_FACE)


def render(layout, state):
    """
    Düzen ve ajan durumundan kare üretir.

    Args:
        layout (EnvLayout): Ortam düzeni
        state (AgentState): Ajan durumu

    Returns:
        np.ndarray: H x W x 3 uint8 kare
    """
    frame = static_layer(layout).copy()
    u, v = state.position
    t = layout.sprite_px
    frame[u:u + t, v:v + t] = agent_sprite(layout)
    return frame


def class_map(layout, state=None):
    """
    Piksel başına hücre türü haritası (free/wall/ladder, ajan pikselleri CLASS_AGENT).

    Simülatörün ayrıcalıklı bilgisidir; öğrenilen maskelerin IoU raporunda kullanılır.
    """
    t = layout.tile_px
    classes = np.repeat(np.repeat(layout.grid.astype(np.int8), t, axis=0), t, axis=1)
    if state is not None:
        u, v = state.position
        s = layout.sprite_px
        classes[u:u + s, v:v + s] = CLASS_AGENT
    return classes


def frame_to_model(frames):
    """uint8 kareleri [-1, 1] aralığına ölçekler (float32)."""
    return np.asarray(frames, dtype=np.float32) / 127.5 - 1.0


def model_to_frame(frames):
    """[-1, 1] aralığındaki kareleri uint8'e geri çevirir."""
    return np.clip(np.rint((np.asarray(frames) + 1.0) * 127.5), 0, 255).astype(np.uint8)
