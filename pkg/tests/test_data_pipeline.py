# oodp_desk/tests/test_data_pipeline.py
# Veri toplama, dengeleme, öneri maskesi ve veri seti disk formatı.

import json
import math
from collections import Counter

import cv2
import numpy as np
import pytest
import torch

from config.settings import N_ACTIONS
from core.physics import AgentState
from core.renderer import render
from data.collector import (TransitionDataset, TransitionRecord, balance, collect, collect_many,
                            compute_proposal_mask)
from data.storage import DatasetStore, read_dataset, record_dtype, write_dataset
from tests.conftest import ROOM, make_layout
from utils.errors import DatasetBalanceError, DatasetChecksumError, DatasetTruncatedError, DatasetVersionError


def _record(i, changed):
    frame = np.full((2, 2, 3), i % 256, dtype=np.uint8)
    start = (i, 0)
    end = (i, 1) if changed else start
    return TransitionRecord(frame_t=frame, action=i % N_ACTIONS, frame_t1=frame.copy(),
                            gt_pos_t=start, gt_pos_t1=end, env_id=0)


def _keys(records):
    return Counter(r.key() for r in records)


# ===== collect =====

def test_collect_is_deterministic(ladder_room):
    assert collect(ladder_room, 100, seed=3) == collect(ladder_room, 100, seed=3)


def test_collect_rejects_empty_rollout(room):
    with pytest.raises(ValueError):
        collect(room, 0, seed=0)


def test_collect_forms_connected_rollout(ladder_room):
    records = collect(ladder_room, 60, seed=1)
    assert records[0].gt_pos_t == ladder_room.spawn
    for prev, nxt in zip(records, records[1:]):
        assert prev.gt_pos_t1 == nxt.gt_pos_t
        assert np.array_equal(prev.frame_t1, nxt.frame_t)


def test_record_frames_match_rerender(ladder_room):
    for record in collect(ladder_room, 40, seed=2):
        assert np.array_equal(record.frame_t, render(ladder_room, AgentState(position=record.gt_pos_t)))
        assert np.array_equal(record.frame_t1, render(ladder_room, AgentState(position=record.gt_pos_t1)))


def test_record_motion_is_bounded_integer(ladder_room):
    bound = max(ladder_room.move_step, ladder_room.gravity_step)
    for record in collect(ladder_room, 200, seed=4):
        assert record.motion.dtype.kind == "i"
        assert np.all(np.abs(record.motion) <= bound)


def test_action_histogram_is_uniform(room):
    n = 10_000
    counts = np.bincount([r.action for r in collect(room, n, seed=5)], minlength=N_ACTIONS)
    p = 1.0 / N_ACTIONS
    stderr = math.sqrt(p * (1 - p) / n)
    assert np.all(np.abs(counts / n - p) <= 5 * stderr)


def test_collect_many_merges_in_layout_order(room, ladder_room):
    ladder_room.env_id = 1
    serial = collect_many([room, ladder_room], 30, seed=8, workers=1)
    threaded = collect_many([room, ladder_room], 30, seed=8, workers=2)
    assert serial == threaded
    assert [r.env_id for r in serial] == [0] * 30 + [1] * 30


# ===== balance =====

def test_balance_downsamples_majority():
    records = [_record(i, True) for i in range(80)] + [_record(100 + i, False) for i in range(20)]
    out = balance(records, seed=0)
    assert sum(r.changed for r in out) == 20
    assert sum(not r.changed for r in out) == 20


def test_balance_output_is_sub_multiset():
    records = [_record(i, i % 3 != 0) for i in range(60)]
    out = balance(records, seed=2)
    assert not (_keys(out) - _keys(records))


def test_balance_keeps_balanced_input():
    records = [_record(i, i % 2 == 0) for i in range(40)]
    assert _keys(balance(records, seed=1)) == _keys(records)


def test_balance_is_deterministic():
    records = [_record(i, i % 4 != 0) for i in range(50)]
    assert balance(records, seed=9) == balance(records, seed=9)


@pytest.mark.parametrize("changed, missing", [(False, "changed"), (True, "changeless")])
def test_balance_reports_missing_class(changed, missing):
    records = [_record(i, changed) for i in range(10)]
    with pytest.raises(DatasetBalanceError) as info:
        balance(records)
    assert info.value.missing_class == missing


# ===== compute_proposal_mask =====

def test_identical_frames_give_empty_proposal(room):
    frame = render(room, AgentState(position=(32, 8)))
    assert not compute_proposal_mask(frame, frame.copy()).any()


def test_proposal_covers_moved_sprite(room):
    a = render(room, AgentState(position=(16, 16)))
    b = render(room, AgentState(position=(18, 16)))
    union = np.zeros(a.shape[:2], dtype=np.uint8)
    union[16:26, 16:24] = 1
    radius = 2
    dilated = cv2.dilate(union, np.ones((2 * radius + 1, 2 * radius + 1), np.uint8))

    mask = compute_proposal_mask(a, b, radius=radius)
    assert mask.dtype == np.uint8 and set(np.unique(mask)) <= {0, 1}
    assert np.all(mask[union == 1] == 1)
    assert not np.any(mask[dilated == 0])


def test_proposal_without_dilation_is_raw_difference(room):
    a = render(room, AgentState(position=(32, 8)))
    b = render(room, AgentState(position=(32, 24)))
    mask = compute_proposal_mask(a, b, radius=0)
    assert np.array_equal(mask.astype(bool), np.any(a != b, axis=2))


def test_threshold_above_range_gives_empty_proposal(room):
    a = render(room, AgentState(position=(32, 8)))
    b = render(room, AgentState(position=(32, 24)))
    assert not compute_proposal_mask(a, b, threshold=2.5).any()


def test_proposal_is_monotone_in_threshold(rng):
    a = rng.integers(0, 256, size=(24, 24, 3), dtype=np.uint8)
    b = rng.integers(0, 256, size=(24, 24, 3), dtype=np.uint8)
    previous = compute_proposal_mask(a, b, threshold=0.0)
    for tau in (0.1, 0.5, 1.0, 1.5):
        current = compute_proposal_mask(a, b, threshold=tau)
        assert np.all(current <= previous)
        previous = current


def test_proposal_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        compute_proposal_mask(np.zeros((4, 4, 3), np.uint8), np.zeros((4, 5, 3), np.uint8))


# ===== TransitionDataset =====

def test_dataset_items(ladder_room):
    records = collect(ladder_room, 5, seed=0)
    item = TransitionDataset(records)[0]
    assert item["frame_t"].shape == (3, 48, 48)
    assert item["frame_t"].dtype == torch.float32
    assert float(item["frame_t"].min()) >= -1.0 and float(item["frame_t"].max()) <= 1.0
    assert item["action"].sum() == 1.0
    assert item["proposal"].shape == (48, 48)
    assert torch.equal(item["motion"], torch.from_numpy(records[0].motion.astype(np.float32)))
    assert "proposal" not in TransitionDataset(records, with_proposal=False)[0]


# ===== storage =====

def test_dataset_roundtrip(tmp_path, ladder_room):
    records = collect(ladder_room, 120, seed=6)
    manifest = write_dataset(records, str(tmp_path / "ds"), seeds={"collect": 6})
    loaded, read_manifest = read_dataset(str(tmp_path / "ds"))
    assert loaded == records
    assert read_manifest == manifest
    assert manifest["height"] == 48 and manifest["width"] == 48
    assert manifest["n_actions"] == N_ACTIONS
    assert manifest["count"] == 120
    assert manifest["env_ids"] == [0]
    assert manifest["seeds"] == {"collect": 6}


def test_record_layout_is_packed(tmp_path, room):
    records = collect(room, 3, seed=0)
    write_dataset(records, str(tmp_path))
    h, w = room.frame_shape
    size = 2 * h * w * 3 + 1 + 2 * 2 + 2 * 2 + 2
    assert record_dtype(h, w).itemsize == size
    assert (tmp_path / "records.bin").stat().st_size == 3 * size


def test_empty_dataset_is_valid(tmp_path):
    manifest = write_dataset([], str(tmp_path), frame_shape=(16, 16))
    records, read_manifest = read_dataset(str(tmp_path))
    assert records == []
    assert manifest["count"] == 0 and read_manifest["height"] == 16


def test_empty_dataset_needs_frame_shape(tmp_path):
    with pytest.raises(ValueError):
        write_dataset([], str(tmp_path))


def test_corrupted_byte_fails_checksum(tmp_path, room):
    write_dataset(collect(room, 10, seed=0), str(tmp_path))
    path = tmp_path / "records.bin"
    payload = bytearray(path.read_bytes())
    payload[len(payload) // 2] ^= 0xFF
    path.write_bytes(bytes(payload))
    with pytest.raises(DatasetChecksumError):
        read_dataset(str(tmp_path))


def test_truncated_file_is_detected(tmp_path, room):
    write_dataset(collect(room, 10, seed=0), str(tmp_path))
    path = tmp_path / "records.bin"
    path.write_bytes(path.read_bytes()[:-7])
    with pytest.raises(DatasetTruncatedError):
        read_dataset(str(tmp_path))


def test_missing_records_file_is_detected(tmp_path, room):
    write_dataset(collect(room, 2, seed=0), str(tmp_path))
    (tmp_path / "records.bin").unlink()
    with pytest.raises(DatasetTruncatedError):
        DatasetStore(str(tmp_path)).read()


def test_version_mismatch_is_detected(tmp_path, room):
    write_dataset(collect(room, 2, seed=0), str(tmp_path))
    manifest_path = tmp_path / "manifest.json"
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    manifest["format_version"] = 99
    manifest_path.write_text(json.dumps(manifest), encoding="utf-8")
    with pytest.raises(DatasetVersionError):
        read_dataset(str(tmp_path))


def test_storage_errors_are_distinct():
    assert len({DatasetVersionError, DatasetTruncatedError, DatasetChecksumError}) == 3
    codes = {DatasetVersionError().code, DatasetTruncatedError().code, DatasetChecksumError().code}
    assert len(codes) == 3


def test_multi_env_manifest(tmp_path):
    first = make_layout(ROOM, spawn=(32, 8), env_id=3)
    second = make_layout(ROOM, spawn=(32, 16), env_id=5)
    manifest = write_dataset(collect_many([first, second], 4, seed=0), str(tmp_path))
    assert manifest["env_ids"] == [3, 5]
