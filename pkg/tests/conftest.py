"""Shared fixtures."""

import logging

import numpy as np
import pytest

from spikedpca import settings
from spikedpca.log import PACKAGE_LOGGER
from spikedpca.model import LatentLaw, SpikedModel, sample_model


@pytest.fixture(autouse=True)
def quiet_progress(monkeypatch):
    monkeypatch.setattr(settings, "PROGRESS", False)


@pytest.fixture
def model():
    return SpikedModel(signal_norm=2.8, noise_level=0.3, dimension=200)


@pytest.fixture
def rademacher_model():
    return SpikedModel(
        signal_norm=1.5, noise_level=0.2, dimension=30, latent_law=LatentLaw.RADEMACHER
    )


@pytest.fixture
def realization(model):
    return sample_model(model, 50, seed=7, stream_key=(0,))


@pytest.fixture
def random_symmetric():
    def make(p, seed=0):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((p, p))
        return 0.5 * (a + a.T)

    return make


@pytest.fixture(autouse=True)
def reset_package_logger():
    yield
    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.handlers.clear()
    logger.setLevel(logging.NOTSET)
    logger.propagate = True
