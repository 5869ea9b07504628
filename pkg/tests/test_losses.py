"""Tests for the objective terms."""

import math

import pytest
import torch

from lung_attr_seg.errors import ConfigError, InvalidLabels, ShapeMismatch
from lung_attr_seg.training.losses import (
    LossReport,
    LossWeights,
    assemble_losses,
    attribute_loss,
    coarse_loss,
    dice_loss,
    pseudo_labels,
    seg_loss,
    self_training_loss,
    total_loss,
)

WIDTHS = (2, 6, 7, 7)


def disk(size=32, radius=8.0):
    yy, xx = torch.meshgrid(torch.arange(size), torch.arange(size), indexing="ij")
    return (((yy - size / 2) ** 2 + (xx - size / 2) ** 2) <= radius ** 2).float().view(1, 1, size, size)


def saturate(Y, magnitude=20.0):
    return (Y * 2 - 1) * magnitude


class TestDiceLoss:
    def test_perfect_match(self):
        Y = disk()
        assert float(dice_loss(saturate(Y), Y)) <= 1e-5

    def test_half_probability_all_ones(self):
        Y = torch.ones(2, 1, 16, 16)
        assert float(dice_loss(torch.zeros_like(Y), Y)) == pytest.approx(1 / 3, abs=1e-6)

    def test_empty_target(self):
        Y = torch.zeros(1, 1, 16, 16)
        assert float(dice_loss(torch.full_like(Y, -40.0), Y)) == pytest.approx(0.0, abs=1e-6)

    def test_single_mask(self):
        Y = torch.ones(1, 8, 8)
        assert float(dice_loss(torch.zeros_like(Y), Y)) == pytest.approx(1 / 3, abs=1e-6)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            dice_loss(torch.zeros(1, 1, 8, 8), torch.zeros(1, 1, 8, 4))

    def test_bounds(self):
        gen = torch.Generator().manual_seed(0)
        for _ in range(50):
            P = torch.randn(2, 1, 8, 8, generator=gen) * 5
            Y = (torch.rand(2, 1, 8, 8, generator=gen) > 0.5).float()
            assert 0.0 <= float(dice_loss(P, Y)) <= 1.0


class TestSegLoss:
    def test_closed_form(self):
        Y = torch.ones(1, 1, 16, 16)
        expected = 0.5 * math.log(2) + 0.5 / 3
        assert float(seg_loss(torch.zeros_like(Y), Y)) == pytest.approx(expected, abs=1e-5)
        assert expected == pytest.approx(0.51324, abs=1e-5)

    def test_perfect(self):
        Y = disk()
        assert float(seg_loss(saturate(Y), Y)) < 1e-5

    def test_permutation_invariant(self):
        gen = torch.Generator().manual_seed(1)
        P = torch.randn(1, 1, 8, 8, generator=gen)
        Y = (torch.rand(1, 1, 8, 8, generator=gen) > 0.5).float()
        perm = torch.randperm(64, generator=gen)
        Pp = P.view(-1)[perm].view(1, 1, 8, 8)
        Yp = Y.view(-1)[perm].view(1, 1, 8, 8)
        assert float(seg_loss(Pp, Yp)) == pytest.approx(float(seg_loss(P, Y)), abs=1e-6)

    def test_coarse_delegates(self):
        Y = disk()
        P = torch.zeros_like(Y)
        assert float(coarse_loss(P, Y)) == float(seg_loss(P, Y))
        n, area = Y.numel(), float(Y.sum())
        dice = 1 - (2 * 0.5 * area + 1e-6) / (0.5 * n + area + 1e-6)
        assert float(coarse_loss(P, Y)) == pytest.approx(0.5 * math.log(2) + 0.5 * dice, abs=1e-5)

    def test_coarse_empty(self):
        Y = torch.zeros(1, 1, 16, 16)
        assert float(coarse_loss(torch.full_like(Y, -20.0), Y)) < 1e-5

    def test_gradcheck(self):
        P = torch.randn(1, 1, 4, 4, dtype=torch.double, requires_grad=True)
        Y = (torch.rand(1, 1, 4, 4) > 0.5).double()
        assert torch.autograd.gradcheck(lambda p: seg_loss(p, Y), (P,))
        assert torch.autograd.gradcheck(lambda p: dice_loss(p, Y), (P,))


class TestAttributeLoss:
    def test_uniform_logits(self):
        logits = [torch.zeros(1, w) for w in WIDTHS]
        value = float(attribute_loss(logits, torch.tensor([[0, 3, 1, 6]])))
        assert value == pytest.approx(sum(math.log(w) for w in WIDTHS), abs=1e-5)
        assert value == pytest.approx(6.3767, abs=1e-4)

    def test_confident_logits(self):
        labels = torch.tensor([[1, 2, 3, 4]])
        logits = [torch.nn.functional.one_hot(labels[:, m], w).float() * 10 for m, w in enumerate(WIDTHS)]
        assert float(attribute_loss(logits, labels)) <= 4 * math.exp(-10) * 10

    def test_additive_over_heads(self):
        gen = torch.Generator().manual_seed(2)
        logits = [torch.randn(3, w, generator=gen) for w in WIDTHS]
        labels = torch.tensor([[0, 1, 2, 3], [1, 5, 6, 0], [0, 0, 4, 6]])
        full = attribute_loss(logits, labels)
        for m in range(1, 5):
            rest = [h for h in range(1, 5) if h != m]
            single = attribute_loss(logits, labels, heads=[m])
            assert float(full - attribute_loss(logits, labels, heads=rest)) == pytest.approx(float(single), abs=1e-5)

    def test_unbatched_labels(self):
        logits = [torch.zeros(w) for w in WIDTHS]
        assert float(attribute_loss(logits, torch.tensor([0, 0, 0, 0]))) == pytest.approx(6.3767, abs=1e-4)

    def test_label_out_of_range(self):
        logits = [torch.zeros(1, w) for w in WIDTHS]
        with pytest.raises(InvalidLabels):
            attribute_loss(logits, torch.tensor([[2, 0, 0, 0]]))
        with pytest.raises(InvalidLabels):
            attribute_loss(logits, torch.tensor([[0, 0, 0, 0]]), heads=[5])

    def test_gradcheck(self):
        logits = [torch.randn(2, w, dtype=torch.double, requires_grad=True) for w in WIDTHS]
        labels = torch.tensor([[0, 1, 2, 3], [1, 0, 6, 5]])
        assert torch.autograd.gradcheck(lambda *ls: attribute_loss(list(ls), labels), tuple(logits))


class TestSelfTraining:
    def test_below_threshold(self):
        assert not pseudo_labels(torch.zeros(1, 1, 8, 8), 0.7).any()

    def test_above_threshold(self):
        P = torch.full((1, 1, 8, 8), math.log(0.8 / 0.2))
        assert pseudo_labels(P, 0.7).all()

    def test_monotone_in_delta(self):
        gen = torch.Generator().manual_seed(3)
        for _ in range(20):
            P = torch.randn(1, 1, 16, 16, generator=gen) * 3
            prev = pseudo_labels(P, 0.05)
            for delta in (0.2, 0.5, 0.7, 0.9, 0.99):
                cur = pseudo_labels(P, delta)
                assert not (cur > prev).any()
                prev = cur

    def test_detached(self):
        P = torch.randn(1, 1, 4, 4, requires_grad=True)
        assert not pseudo_labels(P).requires_grad

    def test_invalid_delta(self):
        with pytest.raises(ConfigError):
            pseudo_labels(torch.zeros(1, 1, 2, 2), 1.0)

    def test_zero_prediction(self):
        value = float(self_training_loss(torch.zeros(1, 1, 16, 16), 0.7))
        assert value == pytest.approx(0.5 * math.log(2) + 0.5, abs=1e-4)
        assert value == pytest.approx(0.8466, abs=1e-4)

    def test_saturated_prediction(self):
        Y = disk()
        assert float(self_training_loss(saturate(Y), 0.7)) < 1e-5

    def test_gradient_only_through_prediction(self):
        torch.manual_seed(4)
        P = torch.randn(1, 1, 4, 4, dtype=torch.double) * 2
        P = P.masked_fill((torch.sigmoid(P) - 0.7).abs() < 1e-3, 3.0).requires_grad_()
        Y_bar = pseudo_labels(P.detach(), 0.7)
        assert torch.autograd.gradcheck(lambda p: self_training_loss(p, 0.7), (P,))
        grad_st = torch.autograd.grad(self_training_loss(P, 0.7), P)[0]
        grad_fixed = torch.autograd.grad(seg_loss(P, Y_bar), P)[0]
        assert torch.allclose(grad_st, grad_fixed)


class TestTotalLoss:
    def test_weights(self):
        assert total_loss(1.0, 1.0, 1.0, LossWeights()) == pytest.approx(2.9)
        assert total_loss(0.3, 5.0, 7.0, LossWeights(1.0, 0.0, 0.0)) == pytest.approx(0.3)

    def test_linear(self):
        a = total_loss(1.0, 2.0, 3.0, LossWeights(lambda_a=0.5))
        b = total_loss(1.0, 2.0, 3.0, LossWeights(lambda_a=1.0))
        c = total_loss(1.0, 2.0, 3.0, LossWeights(lambda_a=1.5))
        assert b - a == pytest.approx(c - b)

    @pytest.mark.parametrize("field", ["lambda_c", "lambda_a", "lambda_st"])
    def test_negative_weight(self, field):
        with pytest.raises(ConfigError):
            LossWeights(**{field: -0.1})

    def test_bad_thresholds(self):
        with pytest.raises(ConfigError):
            LossWeights(delta=0.0)
        with pytest.raises(ConfigError):
            LossWeights(attribute_heads=(0, 1))


class TestAssemble:
    def test_warmup_disables_self_training(self):
        P = torch.zeros(2, 1, 8, 8)
        logits = [torch.zeros(2, w) for w in WIDTHS]
        labels = torch.zeros(2, 4, dtype=torch.long)
        Y = torch.ones(2, 1, 8, 8)
        total, terms, coverage = assemble_losses(P, logits, Y, labels, LossWeights(), self_training=False)
        assert float(terms["l_st"]) == 0.0 and coverage == 0.0
        assert float(total) == pytest.approx(float(terms["l_c"]) + 0.9 * float(terms["l_a"]), abs=1e-5)

    def test_head_subset(self):
        P = torch.zeros(1, 1, 8, 8)
        logits = [torch.zeros(1, w) for w in WIDTHS]
        labels = torch.zeros(1, 4, dtype=torch.long)
        _, terms, _ = assemble_losses(P, logits, P, labels, LossWeights(attribute_heads=(1,)))
        assert float(terms["l_a"]) == pytest.approx(math.log(2), abs=1e-6)

    def test_report_mean(self):
        a = LossReport(1.0, 2.0, 3.0, 6.0, 0.2)
        b = LossReport(3.0, 4.0, 5.0, 12.0, 0.4)
        mean = LossReport.mean([a, b])
        assert mean.to_dict() == pytest.approx({"l_c": 2.0, "l_a": 3.0, "l_st": 4.0, "l_total": 9.0, "coverage": 0.3})
        assert mean.is_finite()
        assert not LossReport(float("nan"), 0, 0, 0).is_finite()
        with pytest.raises(ValueError):
            LossReport.mean([])
