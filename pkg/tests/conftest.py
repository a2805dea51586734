"""Shared fixtures: small synthetic datasets and cheaply trained models.

Session scope keeps the expensive pieces (image rendering, short training
runs) to one build per test run.
"""

import os

import numpy as np
import pytest

from swellgen.domain import fit_stats
from swellgen.embedding import train_embedding
from swellgen.encoder import train_encoder
from swellgen.metrics import train_metric_classifier
from swellgen.oracle import generate_dataset
from swellgen.pipeline import (save_classifier_bundle, save_embedding_bundle,
                               save_encoder_bundle, save_gan_bundle,
                               save_predictor_bundle)
from swellgen.predictor import train_predictor
from swellgen.training import TrainConfig, train_gan

TEST_VERSION = "fixture-version"


@pytest.fixture(scope="session")
def small_dataset():
    return generate_dataset(64, seed=7)


@pytest.fixture(scope="session")
def small_stats(small_dataset):
    return fit_stats(small_dataset)

@pytest.fixture(scope="session")
def trained_embedding(small_dataset):
    return train_embedding(small_dataset, epochs=40, lr=0.05, seed=3)


@pytest.fixture(scope="session")
def bundles_dir(tmp_path_factory, small_dataset, small_stats,
                trained_embedding):
    """Directory of minimally trained bundles for pipeline/service tests."""
    out = tmp_path_factory.mktemp("bundles")
    enc_params, _ = train_encoder(small_dataset, epochs=3, seed=0)
    gan = train_gan(small_dataset[:16], trained_embedding, enc_params,
                    small_stats, TrainConfig(epochs=2, batch_size=8, seed=0))
    model = train_predictor(small_dataset[:32], trained_embedding, epochs=2,
                            seed=0, stats=small_stats)
    clf_params, _ = train_metric_classifier(small_dataset, epochs=2, seed=0)

    save_embedding_bundle(os.path.join(out, "embedding.mbnd"),
                          trained_embedding, TEST_VERSION)
    save_encoder_bundle(os.path.join(out, "encoder.mbnd"), enc_params,
                        TEST_VERSION)
    save_gan_bundle(os.path.join(out, "gan.mbnd"), gan.gen, gan.disc,
                    gan.prior, small_stats, TEST_VERSION)
    save_predictor_bundle(os.path.join(out, "predictor.mbnd"), model,
                          TEST_VERSION)
    save_classifier_bundle(os.path.join(out, "classifier.mbnd"), clf_params,
                           TEST_VERSION)
    return out


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


# -- acceptance summary ---------------------------------------------------------

_ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::", 1)[1]
    detail = dict(report.user_properties).get("detail", "")
    _ACCEPTANCE.append((name, "PASS" if report.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict, detail in _ACCEPTANCE:
        line = f"{verdict}  {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
