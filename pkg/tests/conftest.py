# oodp_desk/tests/conftest.py
# Ortak test yardımcıları: küçük el yapımı düzenler, küçük eğitim yapılandırması,
# tohumlanmış üreteç.

import os
import sys

import numpy as np
import pytest
import torch

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from config.schemas import TrainConfig  # noqa: E402
from core.layouts import FREE, LADDER, MARS, PLATFORM, ROCK, WALL, EnvLayout  # noqa: E402

_CELLS = {".": FREE, "#": WALL, "H": LADDER, "^": ROCK}


def make_layout(rows, spawn=(8, 8), variant=PLATFORM, tile_px=8, env_id=0, elevation=None):
    """Karakter satırlarından düzen ('#' duvar, 'H' merdiven, '.' boş, '^' kaya)."""
    grid = np.array([[_CELLS[ch] for ch in row] for row in rows], dtype=np.int8)
    if variant == MARS and elevation is None:
        elevation = np.where(grid == ROCK, 10.0, 1.0).astype(np.float32)
    return EnvLayout(grid=grid, tile_px=tile_px, variant=variant, spawn=spawn, env_id=env_id,
                     elevation=elevation)


ROOM = [
    "######",
    "#....#",
    "#....#",
    "#....#",
    "#....#",
    "######",
]

LADDER_ROOM = [
    "######",
    "#.H..#",
    "#.H..#",
    "#.H..#",
    "#.H..#",
    "######",
]

SWEEP_ROOM = [
    "######",
    "#..H.#",
    "##.H##",
    "#..H.#",
    "#.#..#",
    "######",
]


@pytest.fixture
def room():
    """Boş 6x6 oda, ajan zeminde (48x48 kare)."""
    return make_layout(ROOM, spawn=(32, 8))


@pytest.fixture
def ladder_room():
    return make_layout(LADDER_ROOM, spawn=(32, 8))


@pytest.fixture
def sweep_room():
    return make_layout(SWEEP_ROOM, spawn=(8, 8))


@pytest.fixture
def mars_room():
    rows = [
        "^^^^^",
        "^..^^",
        "^...^",
        "^...^",
        "^^^^^",
    ]
    return make_layout(rows, spawn=(8, 8), variant=MARS)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config(tmp_path):
    """Birkaç adımda biten küçük model yapılandırması."""
    return TrainConfig(
        window=9,
        pair_channels=(4, 8),
        pair_hidden=16,
        bg_channels=8,
        bg_hidden=16,
        batch_size=4,
        max_steps=2,
        checkpoint_every=1,
        log_every=1,
        validation_fraction=0.2,
        out_dir=str(tmp_path / "train"),
    )


@pytest.fixture(autouse=True)
def _torch_seed():
    torch.manual_seed(0)
