"""Tests for Dice/Jaccard and model evaluation."""

import numpy as np
import pytest
import torch

from lung_attr_seg.errors import MissingGroundTruth, ShapeMismatch
from lung_attr_seg.evaluation import (
    EvalResult,
    dice_jaccard,
    dice_metric,
    evaluate,
    evaluate_masks,
    jaccard_metric,
    predict_masks,
    score_masks,
)
from lung_attr_seg.model.network import SegModel


def strip(n, offset=0, size=1000):
    mask = np.zeros(size, dtype=np.uint8)
    mask[offset:offset + n] = 1
    return mask


class TestMetrics:
    def test_identical(self):
        a = strip(100)
        assert dice_metric(a, a) == 1.0 and jaccard_metric(a, a) == 1.0

    def test_disjoint(self):
        assert dice_metric(strip(100), strip(100, 200)) == 0.0
        assert jaccard_metric(strip(100), strip(100, 200)) == 0.0

    def test_count_oracles(self):
        a, b = strip(100), strip(100, 50)
        assert dice_metric(a, b) == pytest.approx(0.5)
        assert jaccard_metric(a, b) == pytest.approx(1 / 3)

    def test_empty_pair(self):
        empty = np.zeros((1, 8, 8), dtype=np.uint8)
        assert dice_jaccard(empty, empty) == (1.0, 1.0)
        full = np.ones_like(empty)
        assert dice_jaccard(empty, full) == (0.0, 0.0)

    def test_identity_and_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            a = rng.random((1, 16, 16)) < rng.random()
            b = rng.random((1, 16, 16)) < rng.random()
            d, j = dice_jaccard(a, b)
            assert j == pytest.approx(d / (2 - d), abs=1e-9)
            assert dice_metric(a, b) == dice_metric(b, a)
            assert jaccard_metric(a, b) == jaccard_metric(b, a)
            assert j <= d

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            dice_metric(np.zeros((4, 4)), np.zeros((4, 5)))

    def test_not_binary(self):
        with pytest.raises(ValueError):
            jaccard_metric(np.full((2, 2), 2), np.zeros((2, 2)))


class TestScoring:
    def test_perfect(self, small_samples):
        sample = small_samples[0]
        result = score_masks({sample.sample_id: sample.gt_mask}, [sample])
        assert (result.dice, result.jaccard, result.n_samples) == (1.0, 1.0, 1)

    def test_coarse_baseline(self, small_samples):
        result = evaluate_masks(small_samples)
        expected = np.mean([dice_metric(s.coarse_mask, s.gt_mask) for s in small_samples])
        assert result.dice == pytest.approx(expected, abs=1e-12)
        assert [s.sample_id for s in result.per_sample] == sorted(s.sample_id for s in small_samples)

    def test_missing_ground_truth(self, small_samples):
        unlabeled = [small_samples[0], small_samples[1].replace(gt_mask=None)]
        with pytest.raises(MissingGroundTruth) as excinfo:
            evaluate_masks(unlabeled)
        assert small_samples[1].sample_id in str(excinfo.value)

    def test_to_dict(self, small_samples):
        result = evaluate_masks(small_samples)
        assert set(result.to_dict()) == {"dice", "jaccard", "n_samples"}
        assert len(result.to_dict(per_sample=True)["per_sample"]) == len(small_samples)

    def test_empty(self):
        with pytest.raises(ValueError):
            score_masks({}, [])


class TestEvaluate:
    @pytest.fixture
    def model(self, tiny_model_config):
        torch.manual_seed(0)
        return SegModel(tiny_model_config)

    def test_untrained_model_is_finite(self, model, small_samples):
        result = evaluate(model, small_samples)
        assert isinstance(result, EvalResult)
        assert 0.0 <= result.jaccard <= result.dice <= 1.0
        assert result.n_samples == len(small_samples)

    def test_order_invariant(self, model, small_samples):
        forward = evaluate(model, small_samples, batch_size=1)
        backward = evaluate(model, small_samples[::-1], batch_size=1)
        assert forward.dice == backward.dice and forward.jaccard == backward.jaccard

    def test_predictions_are_binary(self, model, small_samples):
        masks = predict_masks(model, small_samples[:3], alpha=0.5)
        assert sorted(masks) == sorted(s.sample_id for s in small_samples[:3])
        for mask in masks.values():
            assert mask.shape == (1, 64, 64) and mask.dtype == np.uint8
            assert set(np.unique(mask)) <= {0, 1}

    def test_keeps_training_flag(self, model, small_samples):
        model.train()
        evaluate(model, small_samples[:2])
        assert model.training

    def test_missing_ground_truth(self, model, small_samples):
        with pytest.raises(MissingGroundTruth):
            evaluate(model, [small_samples[0].replace(gt_mask=None)])
