"""Tests for coarse masks, the synthetic generator, augmentation, batching and ingestion."""

import numpy as np
import pytest
from scipy import ndimage

from lung_attr_seg.attributes.parser import AttributeLabels, parse_description
from lung_attr_seg.attributes.batch import write_text_table
from lung_attr_seg.data.augment import AugmentConfig, augment_sample, mirror_vertical
from lung_attr_seg.data.loader import SampleDataset, collate_samples
from lung_attr_seg.data.qata import ingest_qata, load_dataset, write_dataset
from lung_attr_seg.data.saliency import BaselineLungSaliency, ConstantSaliency, coarse_mask
from lung_attr_seg.data.synthetic import GeneratorConfig, lung_geometry, synth_generate
from lung_attr_seg.errors import ConfigError, MissingFile, SampleParseError, ShapeMismatch
from lung_attr_seg.evaluation.metrics import dice_metric


class DiskSaliency:
    """+10 inside a centred disk, -10 outside."""

    def __init__(self, radius=10):
        self.radius = radius

    def disk(self, shape):
        _, h, w = shape
        yy, xx = np.mgrid[0:h, 0:w]
        return ((yy - h / 2) ** 2 + (xx - w / 2) ** 2 <= self.radius ** 2)[None]

    def score(self, image):
        return np.where(self.disk(image.shape), 10.0, -10.0)


class WrongShapeSaliency:
    def score(self, image):
        return np.zeros((1, 4, 4))


class TestCoarseMask:
    def test_zero_logits_give_empty_mask(self):
        mask = coarse_mask(np.full((1, 32, 32), 0.5), ConstantSaliency(0.0), 0.5)
        assert mask.dtype == np.uint8
        assert mask.sum() == 0

    def test_disk(self):
        backend = DiskSaliency()
        mask = coarse_mask(np.zeros((1, 40, 40)), backend, 0.5)
        np.testing.assert_array_equal(mask.astype(bool), backend.disk((1, 40, 40)))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            coarse_mask(np.zeros((1, 32, 32)), WrongShapeSaliency())

    @pytest.mark.parametrize("tau", [0.0, 1.0, -0.2, 1.5])
    def test_tau_range(self, tau):
        with pytest.raises(ConfigError):
            coarse_mask(np.zeros((1, 8, 8)), ConstantSaliency(), tau)

    def test_monotone_in_tau(self, small_samples):
        backend = BaselineLungSaliency()
        image = small_samples[0].image
        counts = [int(coarse_mask(image, backend, t).sum()) for t in (0.1, 0.3, 0.5, 0.7, 0.9)]
        assert counts == sorted(counts, reverse=True)

    def test_pure_function(self, small_samples):
        backend = BaselineLungSaliency()
        image = small_samples[1].image
        np.testing.assert_array_equal(coarse_mask(image, backend), coarse_mask(image, backend))

    def test_baseline_overlaps_ground_truth(self):
        samples = synth_generate(7, 100, GeneratorConfig())
        dice = [dice_metric(s.coarse_mask, s.gt_mask) for s in samples]
        assert np.mean(dice) >= 0.5


class TestSyntheticGenerator:
    def test_deterministic(self, small_gen):
        a = synth_generate(3, 4, small_gen)
        b = synth_generate(3, 4, small_gen)
        for x, y in zip(a, b):
            assert x.sample_id == y.sample_id
            assert x.raw_text == y.raw_text
            np.testing.assert_array_equal(x.image, y.image)
            np.testing.assert_array_equal(x.gt_mask, y.gt_mask)
            np.testing.assert_array_equal(x.coarse_mask, y.coarse_mask)

    def test_fields(self, small_samples, taxonomy):
        for s in small_samples:
            assert s.image.shape == (1, 64, 64)
            assert 0.0 <= s.image.min() and s.image.max() <= 1.0
            assert set(np.unique(s.gt_mask)) <= {0, 1}
            assert parse_description(s.raw_text, taxonomy) == s.attr_labels

    def test_forced_upper_left(self, taxonomy):
        labels = AttributeLabels.from_values(("unilateral", "one", "upper", "no"), taxonomy)
        config = GeneratorConfig()
        (sample,) = synth_generate(0, 1, config, forced_labels=labels)
        gt = sample.gt_mask[0].astype(bool)
        _, n = ndimage.label(gt, structure=np.ones((3, 3)))
        assert n == 1

        geom = lung_geometry(config.height, config.width)[3]
        ys, xs = np.nonzero(gt)
        assert xs.min() > config.width / 2
        assert ys.max() <= geom.band_edges()[1]
        assert parse_description(sample.raw_text, taxonomy) == labels

    def test_component_count_matches_label(self):
        samples = synth_generate(11, 1000, GeneratorConfig(), backend=ConstantSaliency(-10.0))
        for s in samples:
            _, n = ndimage.label(s.gt_mask[0], structure=np.ones((3, 3)))
            assert n == s.attr_labels.categories[1] + 1, s.sample_id

    def test_too_many_blobs(self, taxonomy):
        with pytest.raises(ConfigError):
            GeneratorConfig(max_blobs=7)
        labels = AttributeLabels.from_values(("bilateral", "six", "upper", "lower"), taxonomy)
        with pytest.raises(ConfigError):
            synth_generate(0, 1, GeneratorConfig(max_blobs=4), forced_labels=labels)

    def test_inconsistent_forced_labels(self, taxonomy):
        labels = AttributeLabels.from_values(("bilateral", "two", "upper", "no"), taxonomy)
        with pytest.raises(ConfigError):
            synth_generate(0, 1, forced_labels=labels)

    def test_n_must_be_positive(self):
        with pytest.raises(ConfigError):
            synth_generate(0, 0)

    def test_image_too_small(self):
        with pytest.raises(ConfigError):
            GeneratorConfig(height=32, width=32)


class TestAugment:
    def test_horizontal_flip_swaps_sides(self, small_samples, taxonomy):
        sample = next(s for s in small_samples if s.attr_labels.categories[2] != s.attr_labels.categories[3])
        config = AugmentConfig(max_rotation=0.0, p_hflip=1.0, p_vflip=0.0)
        out = augment_sample(sample, np.random.default_rng(0), config, taxonomy)
        np.testing.assert_array_equal(out.image, sample.image[:, :, ::-1])
        np.testing.assert_array_equal(out.gt_mask, sample.gt_mask[:, :, ::-1])
        assert out.attr_labels == sample.attr_labels.swap_sides()
        assert parse_description(out.raw_text, taxonomy) == out.attr_labels

    def test_vertical_flip_mirrors_zones(self, taxonomy):
        labels = AttributeLabels.from_values(("bilateral", "two", "upper middle", "lower"), taxonomy)
        assert mirror_vertical(labels, taxonomy).values(taxonomy) == ("bilateral", "two", "middle lower", "upper")

    def test_rotation_keeps_masks_binary(self, small_samples):
        config = AugmentConfig(max_rotation=15.0, p_hflip=0.0, p_vflip=0.0)
        out = augment_sample(small_samples[0], np.random.default_rng(1), config)
        assert set(np.unique(out.coarse_mask)) <= {0, 1}
        assert out.attr_labels == small_samples[0].attr_labels
        assert out.raw_text == small_samples[0].raw_text

    def test_dataset_is_seeded(self, small_samples):
        ds = SampleDataset(small_samples, AugmentConfig(), seed=5)
        a = ds[2]
        b = SampleDataset(small_samples, AugmentConfig(), seed=5)[2]
        np.testing.assert_array_equal(a.image, b.image)


class TestBatching:
    def test_collate(self, small_samples):
        batch = collate_samples(small_samples[:3])
        assert tuple(batch.images.shape) == (3, 1, 64, 64)
        assert tuple(batch.coarse_masks.shape) == (3, 1, 64, 64)
        assert tuple(batch.labels.shape) == (3, 4)
        assert batch.gt_masks is not None
        assert batch.texts("attributes") == [s.attr_description.text for s in small_samples[:3]]
        assert batch.texts("raw") == [s.raw_text for s in small_samples[:3]]

    def test_empty_batch(self):
        with pytest.raises(ValueError):
            collate_samples([])


class TestIngest:
    def test_round_trip(self, tmp_path, small_samples, taxonomy):
        write_dataset(small_samples[:3], tmp_path / "d")
        loaded = load_dataset(tmp_path / "d", size=(64, 64))
        assert [s.sample_id for s in loaded] == [s.sample_id for s in small_samples[:3]]
        for a, b in zip(loaded, small_samples):
            assert a.attr_labels == b.attr_labels
            np.testing.assert_array_equal(a.gt_mask, b.gt_mask)
            assert np.abs(a.image - b.image).max() <= 1.0 / 255.0 + 1e-6

    def test_empty_directory(self, tmp_path):
        (tmp_path / "images").mkdir()
        assert ingest_qata(tmp_path / "images", tmp_path / "texts.tsv") == []

    def test_without_masks(self, tmp_path, small_samples):
        write_dataset(small_samples[:2], tmp_path / "d")
        loaded = load_dataset(tmp_path / "d", with_masks=False, size=(64, 64))
        assert all(s.gt_mask is None for s in loaded)

    def test_bad_text_names_sample(self, tmp_path, small_samples):
        d = write_dataset(small_samples[:1], tmp_path / "d")
        sid = small_samples[0].sample_id
        write_text_table([(sid, "Bilateral pulmonary infection, many infected areas, upper left lung.")], d / "texts.tsv")
        with pytest.raises(SampleParseError) as exc:
            load_dataset(d, size=(64, 64))
        assert exc.value.sample_id == sid
        assert "clause 2" in str(exc.value)

    def test_missing_image(self, tmp_path, small_samples):
        d = write_dataset(small_samples[:1], tmp_path / "d")
        write_text_table(
            [(small_samples[0].sample_id, small_samples[0].raw_text), ("ghost", small_samples[0].raw_text)],
            d / "texts.tsv",
        )
        with pytest.raises(MissingFile) as exc:
            load_dataset(d, size=(64, 64))
        assert exc.value.sample_id == "ghost"
