# oodp_desk/tests/test_perception.py
# Nesne dedektörü, arka plan çıkarıcı ve ilgili kayıplar.

import math

import pytest
import torch
from torch.autograd import gradcheck

from ml.perception import BackgroundExtractor, ObjectDetector, background_loss, entropy_loss, masks_from_logits
from utils.errors import ShapeMismatchError

SMALL_LAYERS = ((8, 5, 2), (8, 3, 2), (8, 3, 1), (4, 1, 1), (1, 3, 1))


def _frames(batch=2, size=16):
    return torch.rand(batch, 3, size, size) * 2 - 1


def _random_masks(batch, n_objects, size, dtype=torch.float64):
    return masks_from_logits(torch.randn(batch, n_objects, size, size, dtype=dtype))


# ===== ObjectDetector =====

@pytest.mark.parametrize("training", [True, False])
def test_masks_sum_to_one(training):
    detector = ObjectDetector(3, 1, layers=SMALL_LAYERS)
    detector.train(training)
    masks = detector(_frames())
    assert masks.shape == (2, 4, 16, 16)
    assert torch.allclose(masks.sum(dim=1), torch.ones(2, 16, 16), atol=1e-5)
    assert float(masks.min()) >= 0.0 and float(masks.max()) <= 1.0


def test_default_detector_architecture():
    detector = ObjectDetector(3, 1)
    convs = [m for m in detector.branches[0] if isinstance(m, torch.nn.Conv2d)]
    assert [(c.out_channels, c.kernel_size[0], c.stride[0]) for c in convs] == [
        (64, 5, 2), (64, 3, 2), (64, 3, 1), (32, 1, 1), (1, 3, 1)
    ]
    assert sum(isinstance(m, torch.nn.BatchNorm2d) for m in detector.branches[0]) == 5


def test_zeroed_final_layers_give_uniform_masks():
    detector = ObjectDetector(3, 1, layers=SMALL_LAYERS)
    with torch.no_grad():
        for branch in detector.branches:
            branch[-3].weight.zero_()
            branch[-3].bias.zero_()
    detector.eval()
    masks = detector(_frames())
    assert torch.allclose(masks, torch.full_like(masks, 0.25))


def test_softmax_of_hand_set_logits():
    logits = torch.zeros(1, 3, 1, 1, dtype=torch.float64)
    logits[0, 0] = 2.0
    masks = masks_from_logits(logits)[0, :, 0, 0]
    denom = math.e ** 2 + 2
    expected = torch.tensor([math.e ** 2 / denom, 1 / denom, 1 / denom], dtype=torch.float64)
    assert torch.allclose(masks, expected, atol=1e-12)


def test_detector_branches_do_not_share_weights():
    detector = ObjectDetector(3, 1, layers=SMALL_LAYERS)
    first, second = detector.branches[0], detector.branches[1]
    assert first[0].weight is not second[0].weight
    assert not torch.equal(first[0].weight, second[0].weight)


def test_detector_is_deterministic_in_eval():
    detector = ObjectDetector(3, 1, layers=SMALL_LAYERS).eval()
    frames = _frames()
    assert torch.equal(detector(frames), detector(frames))


def test_detector_split_orders_static_first():
    detector = ObjectDetector(3, 2, layers=SMALL_LAYERS)
    masks = _random_masks(1, 5, 4)
    static, dynamic = detector.split(masks)
    assert static.shape[1] == 3 and dynamic.shape[1] == 2
    assert torch.equal(dynamic, masks[:, 3:])


def test_detector_rejects_bad_shape():
    detector = ObjectDetector(3, 1, layers=SMALL_LAYERS)
    with pytest.raises(ShapeMismatchError):
        detector(torch.zeros(1, 1, 16, 16))


# ===== entropy_loss =====

def test_entropy_of_one_hot_masks_is_zero():
    masks = torch.zeros(2, 4, 5, 5)
    masks[:, 1] = 1.0
    assert float(entropy_loss(masks)) == 0.0


def test_entropy_of_uniform_masks_is_log_n():
    masks = torch.full((2, 4, 6, 6), 0.25, dtype=torch.float64)
    assert float(entropy_loss(masks)) == pytest.approx(math.log(4))


def test_entropy_two_pixel_toy():
    masks = torch.tensor([[[[0.5, 1.0]], [[0.5, 0.0]]]], dtype=torch.float64)
    assert float(entropy_loss(masks)) == pytest.approx(math.log(2) / 2)


def test_entropy_is_permutation_invariant():
    masks = _random_masks(2, 4, 6)
    permuted = masks[:, torch.tensor([2, 0, 3, 1])]
    assert float(entropy_loss(masks)) == pytest.approx(float(entropy_loss(permuted)))


def test_entropy_gradient_matches_finite_differences():
    masks = (torch.rand(1, 3, 8, 8, dtype=torch.float64) * 0.9 + 0.05).requires_grad_()
    assert gradcheck(entropy_loss, (masks,), eps=1e-6, atol=1e-6, rtol=1e-3)


# ===== BackgroundExtractor =====

def _extractor(size=16):
    return BackgroundExtractor((size, size), channels=8, stages=4, hidden=16)


def test_background_range_and_shape():
    extractor = _extractor()
    out = extractor(_frames() * 50)
    assert out.shape == (2, 3, 16, 16)
    assert float(out.min()) >= -1.0 and float(out.max()) <= 1.0


@pytest.mark.parametrize("size", [(80, 80), (48, 40), (20, 13)])
def test_background_shape_for_odd_sizes(size):
    extractor = BackgroundExtractor(size, channels=4, stages=4, hidden=8)
    assert extractor(torch.zeros(1, 3, *size)).shape == (1, 3, *size)


def test_background_bottleneck_is_128_by_default():
    extractor = BackgroundExtractor((80, 80))
    assert extractor.encoder_fc[-1].out_features == 128
    assert isinstance(extractor.decoder[-1], torch.nn.Tanh)


def test_background_is_deterministic_in_eval():
    extractor = _extractor().eval()
    frames = _frames()
    assert torch.equal(extractor(frames), extractor(frames))


def test_zeroed_final_deconv_gives_zero_background():
    extractor = _extractor()
    with torch.no_grad():
        extractor.final_deconv.weight.zero_()
        extractor.final_deconv.bias.zero_()
    assert torch.equal(extractor(_frames()), torch.zeros(2, 3, 16, 16))


def test_background_rejects_other_frame_size():
    with pytest.raises(ShapeMismatchError):
        _extractor(16)(torch.zeros(1, 3, 24, 24))


# ===== background_loss =====

def test_background_loss_identical_is_zero():
    bg = torch.rand(2, 3, 8, 8)
    assert float(background_loss(bg, bg.clone())) == 0.0


def test_background_loss_constant_offset():
    bg = torch.rand(2, 3, 8, 8, dtype=torch.float64)
    assert float(background_loss(bg, bg + 0.1)) == pytest.approx(3 * 0.01)


def test_background_loss_single_pixel():
    bg = torch.zeros(1, 3, 8, 8, dtype=torch.float64)
    other = bg.clone()
    other[0, 1, 3, 4] = 0.5
    assert float(background_loss(bg, other)) == pytest.approx(0.25 / 64)


def test_background_loss_gradient_matches_finite_differences():
    a = torch.rand(2, 3, 8, 8, dtype=torch.float64, requires_grad=True)
    b = torch.rand(2, 3, 8, 8, dtype=torch.float64, requires_grad=True)
    assert gradcheck(background_loss, (a, b), eps=1e-6, atol=1e-6, rtol=1e-3)


def test_background_loss_rejects_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        background_loss(torch.zeros(1, 3, 8, 8), torch.zeros(1, 3, 8, 9))
