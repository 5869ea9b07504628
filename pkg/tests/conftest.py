"""Shared fixtures: the default taxonomy and tiny synthetic datasets."""

import pytest

from lung_attr_seg.attributes.taxonomy import AttributeTaxonomy
from lung_attr_seg.data.synthetic import GeneratorConfig, synth_generate
from lung_attr_seg.model.config import ModelConfig


@pytest.fixture(scope="session")
def taxonomy():
    return AttributeTaxonomy.default()


@pytest.fixture(scope="session")
def small_gen():
    return GeneratorConfig(height=64, width=64)


@pytest.fixture(scope="session")
def small_samples(small_gen):
    return synth_generate(0, 8, small_gen)


@pytest.fixture
def tiny_model_config():
    return ModelConfig(height=64, width=64, depth=2, base_width=8, channels=16, embed_dim=8, max_tokens=12)
