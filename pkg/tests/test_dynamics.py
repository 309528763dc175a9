# oodp_desk/tests/test_dynamics.py
# Konum hesabı, ufuk penceresi kırpma, çift etki ağları, hareket ve highway kaybı.

import numpy as np
import pytest
import torch
import torch.nn.functional as F
from torch.autograd import gradcheck

from config.settings import N_ACTIONS
from core.physics import Action
from ml.dynamics import (DynamicsNet, PairEffectNet, crop_window, highway_loss, meshgrid_channels,
                         motion_from_effects, object_position, object_position_safe)
from utils.errors import DegenerateMaskError, InvalidWindowError, ShapeMismatchError


def bilinear_oracle(image, rows, cols):
    """Σ_u Σ_v M(u, v) max(0, 1 - |r - u|) max(0, 1 - |c - v|), tüm pikseller üzerinde."""
    height, width = image.shape
    u = np.arange(height)[:, None]
    v = np.arange(width)[None, :]
    out = np.zeros((len(rows), len(cols)))
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            out[i, j] = np.sum(image * np.maximum(0, 1 - np.abs(r - u)) * np.maximum(0, 1 - np.abs(c - v)))
    return out


def _one_hot_actions(actions):
    return torch.eye(N_ACTIONS)[torch.as_tensor(actions)]


# ===== object_position =====

def test_point_mass_position():
    mask = torch.zeros(80, 80, dtype=torch.float64)
    mask[10, 20] = 1.0
    assert object_position(mask).tolist() == [10.0, 20.0]


def test_uniform_mask_position():
    mask = torch.full((80, 80), 0.3, dtype=torch.float64)
    assert torch.allclose(object_position(mask), torch.tensor([39.5, 39.5], dtype=torch.float64))


def test_two_point_midpoint():
    mask = torch.zeros(8, 8, dtype=torch.float64)
    mask[0, 0] = 0.5
    mask[4, 4] = 0.5
    assert object_position(mask).tolist() == [2.0, 2.0]


def test_batched_positions_are_inside_frame(rng):
    masks = torch.from_numpy(rng.random((4, 2, 12, 9)))
    positions = object_position(masks)
    assert positions.shape == (4, 2, 2)
    assert float(positions[..., 0].min()) >= 0 and float(positions[..., 0].max()) <= 11
    assert float(positions[..., 1].min()) >= 0 and float(positions[..., 1].max()) <= 8


def test_degenerate_mask_raises():
    with pytest.raises(DegenerateMaskError):
        object_position(torch.zeros(8, 8))


def test_safe_position_flags_degenerate_mask():
    masks = torch.zeros(2, 8, 8)
    masks[0, 2, 3] = 1.0
    positions, valid = object_position_safe(masks)
    assert valid.tolist() == [True, False]
    assert positions[0].tolist() == [2.0, 3.0]
    assert positions[1].tolist() == [3.5, 3.5]


# ===== crop_window =====

def test_crop_matches_bilinear_oracle(rng):
    for _ in range(100):
        mask = rng.random((8, 8))
        window = int(rng.choice([1, 3, 5, 7]))
        center = rng.uniform(-1.0, 8.0, size=2)
        got = crop_window(torch.from_numpy(mask)[None], torch.from_numpy(center)[None], window)[0].numpy()
        offset = (window - 1) / 2
        expected = bilinear_oracle(mask, np.arange(window) + center[0] - offset,
                                   np.arange(window) + center[1] - offset)
        assert np.max(np.abs(got - expected)) <= 1e-6


def test_integer_center_crops_exact_sub_array(rng):
    mask = torch.from_numpy(rng.random((1, 12, 12)))
    cropped = crop_window(mask, torch.tensor([[5.0, 6.0]], dtype=torch.float64), 5)
    assert torch.equal(cropped[0], mask[0, 3:8, 4:9])


def test_half_pixel_shift_averages_vertical_neighbors(rng):
    mask = torch.from_numpy(rng.random((1, 12, 12)))
    cropped = crop_window(mask, torch.tensor([[5.5, 6.0]], dtype=torch.float64), 5)
    expected = (mask[0, 3:8, 4:9] + mask[0, 4:9, 4:9]) / 2
    assert torch.allclose(cropped[0], expected, atol=1e-12)


def test_out_of_frame_region_is_zero():
    mask = torch.ones(1, 8, 8, dtype=torch.float64)
    cropped = crop_window(mask, torch.tensor([[0.0, 0.0]], dtype=torch.float64), 5)[0]
    assert torch.equal(cropped[:2], torch.zeros(2, 5, dtype=torch.float64))
    assert torch.equal(cropped[:, :2], torch.zeros(5, 2, dtype=torch.float64))
    assert torch.equal(cropped[2:, 2:], torch.ones(3, 3, dtype=torch.float64))


def test_crop_is_bounded_by_source_max(rng):
    mask = torch.from_numpy(rng.random((3, 10, 10)) * 0.7)
    centers = torch.from_numpy(rng.uniform(0, 9, size=(3, 2)))
    cropped = crop_window(mask, centers, 7)
    assert float(cropped.max()) <= float(mask.max()) + 1e-12
    assert float(cropped.min()) >= 0.0


def test_crop_handles_channel_batches(rng):
    masks = torch.from_numpy(rng.random((2, 3, 10, 10)))
    centers = torch.from_numpy(rng.uniform(0, 9, size=(2, 2)))
    together = crop_window(masks, centers, 5)
    assert together.shape == (2, 3, 5, 5)
    for c in range(3):
        assert torch.allclose(together[:, c], crop_window(masks[:, c], centers, 5))


@pytest.mark.parametrize("window", [0, 4, 9])
def test_invalid_window_raises(window):
    with pytest.raises(InvalidWindowError):
        crop_window(torch.zeros(1, 8, 8), torch.zeros(1, 2), window)


def test_crop_gradient_flows_to_mask_only():
    mask = torch.rand(2, 8, 8, dtype=torch.float64, requires_grad=True)
    centers = torch.tensor([[3.3, 4.6], [2.2, 5.7]], dtype=torch.float64, requires_grad=True)
    crop_window(mask, centers, 5).sum().backward()
    assert mask.grad is not None and float(mask.grad.abs().sum()) > 0
    assert centers.grad is None


def test_crop_gradient_matches_finite_differences():
    centers = torch.tensor([[3.3, 4.6]], dtype=torch.float64)
    mask = torch.rand(1, 8, 8, dtype=torch.float64, requires_grad=True)
    assert gradcheck(lambda m: crop_window(m, centers, 5), (mask,), eps=1e-6, atol=1e-6, rtol=1e-3)


def test_frozen_center_gradient_equals_constant_center():
    logits = torch.randn(1, 2, 10, 10, dtype=torch.float64)

    def mask_grad(freeze):
        source = logits.clone().requires_grad_()
        masks = torch.softmax(source, dim=1)
        centers = object_position(masks[:, 1])
        if freeze:
            centers = centers.detach().clone()
        crop_window(masks[:, 0], centers, 5).pow(2).sum().backward()
        return source.grad

    assert torch.equal(mask_grad(False), mask_grad(True))


# ===== PairEffectNet =====

def test_meshgrid_is_window_local():
    grid = meshgrid_channels(5)
    assert grid.shape == (2, 5, 5)
    assert grid[0, 0].tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert grid[1, :, 0].tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert torch.equal(grid[0, 0], grid[0, 4])


def test_pair_effect_shape():
    net = PairEffectNet(window=9, n_actions=N_ACTIONS, channels=(4, 8), hidden=16)
    assert net(torch.rand(3, 9, 9)).shape == (3, 2, N_ACTIONS)


def test_default_pair_effect_flatten():
    net = PairEffectNet()
    assert net.fc[0].in_features == 128 * 3 * 3
    assert net.head.out_features == 2 * N_ACTIONS


def test_zeroed_head_gives_zero_effect():
    net = PairEffectNet(window=9, channels=(4, 8), hidden=16)
    with torch.no_grad():
        net.head.weight.zero_()
        net.head.bias.zero_()
    assert torch.equal(net(torch.rand(2, 9, 9)), torch.zeros(2, 2, N_ACTIONS))


def test_pair_effect_is_deterministic():
    net = PairEffectNet(window=9, channels=(4, 8), hidden=16).eval()
    cropped = torch.rand(2, 9, 9)
    assert torch.equal(net(cropped), net(cropped))


def test_pair_effect_matches_manual_forward():
    net = PairEffectNet(window=7, channels=(4, 8), hidden=16).eval()
    with torch.no_grad():
        for module in net.features:
            if isinstance(module, torch.nn.BatchNorm2d):
                module.running_mean.uniform_(-0.2, 0.2)
                module.running_var.uniform_(0.5, 1.5)
    cropped = torch.rand(2, 7, 7)

    x = torch.cat([cropped[:, None], meshgrid_channels(7).expand(2, -1, -1, -1)], dim=1)
    layers = list(net.features)
    for conv, bn in zip(layers[0::3], layers[1::3]):
        x = F.conv2d(x, conv.weight, conv.bias, stride=2, padding=1)
        x = F.batch_norm(x, bn.running_mean, bn.running_var, bn.weight, bn.bias, training=False, eps=bn.eps)
        x = F.relu(x)
    x = F.relu(F.linear(x.flatten(1), net.fc[0].weight, net.fc[0].bias))
    expected = F.linear(x, net.head.weight, net.head.bias).view(2, 2, N_ACTIONS)

    assert torch.allclose(net(cropped), expected, atol=1e-6)


def test_pair_effect_rejects_wrong_window():
    net = PairEffectNet(window=9, channels=(4, 8), hidden=16)
    with pytest.raises(ShapeMismatchError):
        net(torch.rand(2, 7, 7))


# ===== motion =====

def _small_dynamics(n_static=2, n_dynamic=1):
    return DynamicsNet(n_static, n_dynamic, N_ACTIONS, window=5, pair_channels=(4,), pair_hidden=8)


def _zero_heads(net):
    with torch.no_grad():
        for row in net.pair_nets:
            for pair in row:
                pair.head.weight.zero_()
                pair.head.bias.zero_()


def _masks_with_blob(batch=2, n_objects=3, size=16):
    masks = torch.rand(batch, n_objects, size, size)
    masks[:, -1] = 0.0
    masks[:, -1, 6:9, 6:9] = 1.0
    return masks


def test_dynamics_has_one_net_per_pair():
    net = DynamicsNet(3, 2, N_ACTIONS, window=5, pair_channels=(4,), pair_hidden=8)
    assert len(net.pair_nets) == 2
    assert all(len(row) == 4 for row in net.pair_nets)
    assert net.other_objects(0) == [0, 1, 2, 4]
    assert net.other_objects(1) == [0, 1, 2, 3]
    assert net.e_self.shape == (2, 2, N_ACTIONS)


def test_zero_effects_give_zero_motion():
    net = _small_dynamics().eval()
    _zero_heads(net)
    motion = net.predict_motion(_masks_with_blob(), _one_hot_actions([0, 3]), 0)
    assert torch.equal(motion, torch.zeros(2, 2))


def test_self_effect_selects_action_column():
    net = _small_dynamics().eval()
    _zero_heads(net)
    with torch.no_grad():
        net.e_self[0, :, Action.LEFT] = torch.tensor([0.0, -2.0])
    motion = net.predict_motion(_masks_with_blob(1), _one_hot_actions([Action.LEFT]), 0)
    assert motion.tolist() == [[0.0, -2.0]]


def test_motion_matches_sum_then_select(rng):
    effects = [torch.from_numpy(rng.normal(size=(N_ACTIONS, 2, N_ACTIONS))) for _ in range(3)]
    e_self = torch.from_numpy(rng.normal(size=(2, N_ACTIONS)))
    actions = torch.eye(N_ACTIONS, dtype=torch.float64)
    motion = motion_from_effects(effects, e_self, actions)
    for b in range(N_ACTIONS):
        total = sum(e[b] for e in effects) + e_self
        assert torch.allclose(motion[b], total[:, b], atol=1e-12)


def test_motion_is_linear_in_effects(rng):
    a = torch.from_numpy(rng.normal(size=(4, 2, N_ACTIONS)))
    b = torch.from_numpy(rng.normal(size=(4, 2, N_ACTIONS)))
    zero = torch.zeros(2, N_ACTIONS, dtype=torch.float64)
    actions = torch.eye(N_ACTIONS, dtype=torch.float64)[[0, 2, 3, 4]]
    combined = motion_from_effects([2.5 * a + b], zero, actions)
    separate = 2.5 * motion_from_effects([a], zero, actions) + motion_from_effects([b], zero, actions)
    assert torch.allclose(combined, separate, atol=1e-12)


def test_predict_motion_propagates_degenerate_mask():
    net = _small_dynamics()
    masks = torch.rand(1, 3, 16, 16)
    masks[:, -1] = 0.0
    with pytest.raises(DegenerateMaskError):
        net.predict_motion(masks, _one_hot_actions([0]), 0)


def test_forward_matches_predict_motion():
    net = _small_dynamics().eval()
    masks = _masks_with_blob()
    actions = _one_hot_actions([1, 4])
    out = net(masks, actions)
    assert out["motions"].shape == (2, 1, 2)
    assert out["positions"].shape == (2, 1, 2)
    assert out["valid"].all()
    assert torch.allclose(out["motions"][:, 0], net.predict_motion(masks, actions, 0))


def test_forward_keeps_degenerate_objects_finite():
    net = _small_dynamics().eval()
    masks = _masks_with_blob()
    masks[1, -1] = 0.0
    out = net(masks, _one_hot_actions([0, 0]))
    assert out["valid"].tolist() == [[True], [False]]
    assert torch.isfinite(out["motions"]).all()


def test_forward_rejects_bad_shapes():
    net = _small_dynamics()
    with pytest.raises(ShapeMismatchError):
        net(torch.rand(1, 4, 16, 16), _one_hot_actions([0]))
    with pytest.raises(ShapeMismatchError):
        net(torch.rand(1, 3, 16, 16), torch.zeros(1, 3))


def test_pixels_outside_window_do_not_change_motion():
    net = _small_dynamics().eval()
    masks = _masks_with_blob(1)
    actions = _one_hot_actions([2])
    before = net(masks, actions)["motions"]

    changed = masks.clone()
    # Ajan merkezi (7, 7), w=5: pencere satır/sütun 5..9
    changed[:, :2, :4] = torch.rand(1, 2, 4, 16)
    changed[:, :2, 12:] = torch.rand(1, 2, 4, 16)
    changed[:, :2, :, 12:] = torch.rand(1, 2, 16, 4)
    after = net(changed, actions)["motions"]
    assert torch.equal(before, after)


# ===== highway_loss =====

def test_highway_zero_when_motion_matches():
    p_t = torch.tensor([[[3.0, 4.0]]])
    p_t1 = torch.tensor([[[5.0, 1.0]]])
    assert float(highway_loss(p_t, p_t1 - p_t, p_t1)) == 0.0


def test_highway_unit_error():
    p = torch.zeros(1, 2)
    assert float(highway_loss(p, torch.tensor([[1.0, 0.0]]), p)) == 1.0


def test_highway_two_objects():
    p = torch.zeros(2, 2)
    motions = torch.tensor([[1.0, 0.0], [0.0, 2.0]])
    assert float(highway_loss(p, motions, p)) == 5.0


def test_highway_skips_invalid_objects():
    p = torch.zeros(1, 2, 2)
    motions = torch.tensor([[[1.0, 0.0], [0.0, 2.0]]])
    valid = torch.tensor([[True, False]])
    assert float(highway_loss(p, motions, p, valid)) == 1.0


def test_highway_gradient_matches_finite_differences():
    p_t = torch.rand(2, 1, 2, dtype=torch.float64)
    p_t1 = torch.rand(2, 1, 2, dtype=torch.float64)
    motions = torch.rand(2, 1, 2, dtype=torch.float64, requires_grad=True)
    assert gradcheck(lambda v: highway_loss(p_t, v, p_t1), (motions,), eps=1e-6, atol=1e-6, rtol=1e-3)
