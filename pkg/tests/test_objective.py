# oodp_desk/tests/test_objective.py
# Toplam hedef ve öneri kaybı.

import pytest
import torch
from torch.autograd import gradcheck

from config.settings import LOSS_WEIGHTS
from ml.objective import COMPONENTS, LossBundle, components_dict, proposal_loss, total_loss
from utils.errors import ConfigError, LossInvariantError, ShapeMismatchError


def _zeros_minus_p(**values):
    base = dict(highway=0.0, prediction=0.0, entropy=0.0, reconstruction=0.0, consistency=0.0, background=0.0)
    base.update(values)
    return LossBundle(variant="-p", **base)


# ===== total_loss =====

def test_all_zero_components_give_zero():
    assert total_loss(_zeros_minus_p()) == 0.0
    assert total_loss(LossBundle(variant="+p", proposal=0.0)) == 0.0


def test_prediction_weight_without_proposal():
    assert total_loss(_zeros_minus_p(prediction=0.01)) == pytest.approx(1.0)


def test_proposal_weight_with_proposal():
    assert total_loss(LossBundle(variant="+p", proposal=0.5)) == pytest.approx(0.5)


@pytest.mark.parametrize("variant", ["-p", "+p"])
def test_total_is_linear_in_each_component(variant):
    weights = LOSS_WEIGHTS[variant]
    for name, weight in weights.items():
        values = {key: 0.0 for key in weights}
        values[name] = 1.0
        bundle = LossBundle(variant=variant, **values)
        assert total_loss(bundle) == pytest.approx(weight)
    assert total_loss(LossBundle(variant=variant, highway=2.0, **{key: 0.0 for key in weights})) == 2.0


def test_highway_is_unweighted_tensor_sum():
    bundle = LossBundle(variant="+p", highway=torch.tensor(3.0), prediction=torch.tensor(0.1),
                        entropy=torch.tensor(0.2), proposal=torch.tensor(0.4))
    total = total_loss(bundle)
    assert torch.is_tensor(total)
    assert float(total) == pytest.approx(3.0 + 10 * 0.1 + 0.2 + 0.4)


def test_negative_component_is_rejected():
    with pytest.raises(LossInvariantError):
        total_loss(_zeros_minus_p(entropy=-1e-3))
    with pytest.raises(LossInvariantError):
        total_loss(_zeros_minus_p(highway=torch.tensor(-0.5)))


def test_with_proposal_ignores_auxiliary_components():
    bundle = LossBundle(variant="+p", proposal=0.0, reconstruction=-1.0, consistency=-1.0, background=-1.0)
    assert total_loss(bundle) == 0.0


def test_missing_component_is_rejected():
    with pytest.raises(LossInvariantError):
        total_loss(LossBundle(variant="+p"))
    with pytest.raises(LossInvariantError):
        total_loss(LossBundle(variant="-p"))


def test_custom_weights_override_defaults():
    bundle = _zeros_minus_p(prediction=1.0, consistency=1.0)
    assert total_loss(bundle, weights={"prediction": 2.0, "consistency": 0.5}) == pytest.approx(2.5)


@pytest.mark.parametrize("alias, expected", [("OODP+p", 0.5), ("with-proposal", 0.5), ("oodp-p", 0.0)])
def test_variant_aliases(alias, expected):
    values = dict(proposal=0.5, reconstruction=0.0, consistency=0.0, background=0.0)
    assert total_loss(LossBundle(variant=alias, **values)) == pytest.approx(expected)


def test_unknown_variant_is_rejected():
    with pytest.raises(ConfigError):
        total_loss(LossBundle(variant="?p", proposal=0.0))


def test_components_dict_has_every_component():
    row = components_dict(LossBundle(variant="+p", prediction=torch.tensor(0.25), proposal=0.5))
    assert tuple(row) == COMPONENTS
    assert row["prediction"] == 0.25 and row["reconstruction"] is None


# ===== proposal_loss =====

def test_exact_proposal_gives_zero():
    proposal = torch.zeros(2, 10, 10)
    proposal[:, 3:5, 4:7] = 1.0
    masks = proposal.unsqueeze(1).clone()
    assert float(proposal_loss(masks, proposal)) == 0.0


def test_empty_proposal_and_empty_masks_give_zero():
    assert float(proposal_loss(torch.zeros(1, 2, 10, 10), torch.zeros(1, 10, 10))) == 0.0


def test_missed_positive_is_upweighted():
    proposal = torch.zeros(1, 10, 10, dtype=torch.float64)
    proposal[0, 5, 5] = 1.0
    loss = proposal_loss(torch.zeros(1, 1, 10, 10, dtype=torch.float64), proposal)
    assert float(loss) == pytest.approx(0.99)


def test_false_positives_without_positives_have_unit_weight():
    masks = torch.ones(1, 1, 10, 10, dtype=torch.float64)
    assert float(proposal_loss(masks, torch.zeros(1, 10, 10, dtype=torch.float64))) == pytest.approx(1.0)


def test_proposal_loss_sums_dynamic_masks():
    proposal = torch.ones(1, 4, 4)
    masks = torch.full((1, 2, 4, 4), 0.5)
    assert float(proposal_loss(masks, proposal)) == 0.0


def test_proposal_loss_rejects_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        proposal_loss(torch.zeros(1, 1, 8, 8), torch.zeros(1, 8, 9))


def test_proposal_loss_gradient_matches_finite_differences():
    masks = torch.rand(2, 2, 6, 6, dtype=torch.float64, requires_grad=True)
    proposal = (torch.rand(2, 6, 6, dtype=torch.float64) > 0.7).to(torch.float64)
    assert gradcheck(lambda m: proposal_loss(m, proposal), (masks,), eps=1e-6, atol=1e-6, rtol=1e-3)
