# =======================================================================================
# === PROGRAM AÇIKLAMASI ===
# Dosya Adı: physics.py (DETERMİNİSTİK IZGARA DÜNYASI FİZİK MOTORU)
# Konum: oodp_desk/core/physics.py
# Açıklama:
# Ajan durumunu (AgentState) ve eylem kodlarını (Action) tanımlar; platform ve Mars
# varyantları için bir adımlık geçiş fonksiyonlarını içerir. Tüm fonksiyonlar açık
# durumun saf fonksiyonlarıdır, paylaşılan değişken durum yoktur.

# === PLATFORM KURALLARI ===
# - up: ajan merdivenle çakışıyorsa s piksel yukarı
# - down: ajan merdivende ya da merdivenin tepesindeyse s piksel aşağı
# - left/right: duvara çarpana kadar en fazla s piksel
# - Desteksiz ve merdivende olmayan ajan g piksel düşer (desteğe ulaşınca durur)
# - noop: sadece yerçekimi

# === MARS KURALLARI ===
# - Hedef hücrelerden biri kaya (eğim >= 5 derece) ise pozisyon değişmez
# - Aksi halde s piksel hareket, yerçekimi yok
# =======================================================================================

from collections import deque
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from config.settings import N_ACTIONS
from core.layouts import LADDER, MARS, WALL


class Action(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    NOOP = 4


def one_hot(action, n_actions=N_ACTIONS):
    """Eylem indeksini tek-sıcak (one-hot) vektöre çevirir."""
    code = np.zeros(n_actions, dtype=np.float32)
    code[int(action)] = 1.0
    return code


class Mode(str, Enum):
    ON_LADDER = "on_ladder"
    AIRBORNE = "airborne"
    GROUNDED = "grounded"


@dataclass(frozen=True)
class AgentState:
    """Ajan sprite'ının sol üst köşesi (u: satır, v: sütun) ve dikey mod."""

    position: tuple
    mode: Mode = Mode.GROUNDED


def _cells(layout, u, v):
    t = layout.tile_px
    s = layout.sprite_px
    return layout.grid[u // t:(u + s - 1) // t + 1, v // t:(v + s - 1) // t + 1]


def blocked(layout, u, v):
    """Sprite (u, v) konumunda kare dışına taşıyor ya da duvar/kaya ile çakışıyor mu?"""
    h, w = layout.frame_shape
    s = layout.sprite_px
    if u < 0 or v < 0 or u + s > h or v + s > w:
        return True
    return bool(np.any(_cells(layout, u, v) == WALL))


def overlaps(layout, u, v, kind):
    h, w = layout.frame_shape
    s = layout.sprite_px
    if u < 0 or v < 0 or u + s > h or v + s > w:
        return False
    return bool(np.any(_cells(layout, u, v) == kind))


def is_supported(layout, u, v):
    """Ajan duvarın ya da merdivenin üstünde duruyor veya merdivene tutunuyor mu?"""
    return (
        blocked(layout, u + 1, v)
        or overlaps(layout, u, v, LADDER)
        or overlaps(layout, u + 1, v, LADDER)
    )


def agent_mode(layout, u, v):
    if overlaps(layout, u, v, LADDER):
        return Mode.ON_LADDER
    if is_supported(layout, u, v):
        return Mode.GROUNDED
    return Mode.AIRBORNE


def _slide(layout, u, v, du, dv, n):
    # Piksel piksel ilerle, ilk çakışmada dur
    for _ in range(n):
        if blocked(layout, u + du, v + dv):
            break
        u, v = u + du, v + dv
    return u, v


def _fall(layout, u, v, g):
    for _ in range(g):
        if is_supported(layout, u, v):
            break
        u += 1
    return u


def step(layout, state, action):
    """
    Platform varyantında bir adımlık deterministik geçiş.

    Args:
        layout (EnvLayout): Ortam düzeni
        state (AgentState): Geçerli ajan durumu
        action (int | Action): Eylem indeksi

    Returns:
        AgentState: Sonraki durum
    """
    u, v = state.position
    s = layout.move_step
    action = Action(int(action))
    moved_vertically = False

    if action in (Action.LEFT, Action.RIGHT):
        dv = -1 if action == Action.LEFT else 1
        u, v = _slide(layout, u, v, 0, dv, s)
    elif action == Action.UP and overlaps(layout, u, v, LADDER):
        nu, v = _slide(layout, u, v, -1, 0, s)
        moved_vertically = nu != u
        u = nu
    elif action == Action.DOWN and (overlaps(layout, u, v, LADDER) or overlaps(layout, u + 1, v, LADDER)):
        nu, v = _slide(layout, u, v, 1, 0, s)
        moved_vertically = nu != u
        u = nu

    # Tek adımda tek dikey hareket: eylem ya da yerçekimi
    if not moved_vertically:
        u = _fall(layout, u, v, layout.gravity_step)

    return AgentState(position=(u, v), mode=agent_mode(layout, u, v))


_MARS_MOVES = {
    Action.UP: (-1, 0),
    Action.DOWN: (1, 0),
    Action.LEFT: (0, -1),
    Action.RIGHT: (0, 1),
    Action.NOOP: (0, 0),
}


def step_mars(layout, state, action):
    """Mars varyantında geçiş: kayalık hedefe hareket reddedilir, yerçekimi yok."""
    u, v = state.position
    du, dv = _MARS_MOVES[Action(int(action))]
    s = layout.move_step
    nu, nv = u + du * s, v + dv * s
    if blocked(layout, nu, nv):
        return AgentState(position=(u, v), mode=Mode.GROUNDED)
    return AgentState(position=(nu, nv), mode=Mode.GROUNDED)


def step_any(layout, state, action):
    """Düzenin varyantına göre doğru geçiş fonksiyonunu çağırır."""
    if layout.variant == MARS:
        return step_mars(layout, state, action)
    return step(layout, state, action)


def spawn_state(layout):
    u, v = layout.spawn
    mode = Mode.GROUNDED if layout.variant == MARS else agent_mode(layout, u, v)
    return AgentState(position=(u, v), mode=mode)


def reachable_positions(layout):
    """
    Başlangıçtan ajanın hareket grafiği üzerinde ulaşılabilen tüm pozisyonlar (BFS).

    Args:
        layout (EnvLayout): Ortam düzeni

    Returns:
        set: (u, v) piksel pozisyonları
    """
    start = spawn_state(layout).position
    seen = {start}
    queue = deque([start])
    while queue:
        position = queue.popleft()
        for action in Action:
            nxt = step_any(layout, AgentState(position=position), action).position
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def reachable_cells(layout):
    """Ulaşılabilir pozisyonların sol üst köşelerinin düştüğü farklı karo sayısı."""
    t = layout.tile_px
    return {(u // t, v // t) for u, v in reachable_positions(layout)}
