"""Record golden service fixtures for the frontend tests.

Trains the same minimal bundles the Python test suite uses (identical data,
seeds, and epochs, so the recorded responses match what the service tests
see), then captures real endpoint traffic. Rerunning regenerates identical
files; tests/test_service.py cross-checks the live service against these.

Usage: python frontend/scripts/record_fixtures.py
"""

import json
import os
import sys
import tempfile

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "..", "src"))

from fastapi.testclient import TestClient

from swellgen.domain import fit_stats
from swellgen.embedding import train_embedding
from swellgen.encoder import train_encoder
from swellgen.metrics import train_metric_classifier
from swellgen.oracle import generate_dataset
from swellgen.pipeline import (save_classifier_bundle, save_embedding_bundle,
                               save_encoder_bundle, save_gan_bundle,
                               save_predictor_bundle)
from swellgen.predictor import train_predictor
from swellgen.service import create_app
from swellgen.training import TrainConfig, train_gan

VERSION = "fixture-version"
OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")

GENERATE_REQUEST = {
    "alloy_name": "Au304",
    "d_c": {"phi_fast": 8, "phi_thermal": 12, "phi_flux": 10,
            "T_irr": 650, "T_exp": 420},
    "n": 2,
    "seed": 21,
}

BAD_REQUESTS = [
    ("missing_d_c", {"alloy_name": "Au304", "n": 1, "seed": 1}),
    ("missing_T_irr", {"alloy_name": "Au304", "n": 1, "seed": 1,
                       "d_c": {"phi_fast": 8, "phi_thermal": 12,
                               "phi_flux": 10, "T_exp": 420}}),
    ("zero_T_irr", {**GENERATE_REQUEST,
                    "d_c": {**GENERATE_REQUEST["d_c"], "T_irr": 0}}),
    ("negative_phi_flux", {**GENERATE_REQUEST,
                           "d_c": {**GENERATE_REQUEST["d_c"], "phi_flux": -1}}),
    ("unknown_alloy", {**GENERATE_REQUEST, "alloy_name": "Unobtainium"}),
    ("n_zero", {**GENERATE_REQUEST, "n": 0}),
    ("n_fractional", {**GENERATE_REQUEST, "n": 2.5}),
    ("negative_seed", {**GENERATE_REQUEST, "seed": -3}),
]


def build_bundles(out: str) -> None:
    dataset = generate_dataset(64, seed=7)
    stats = fit_stats(dataset)
    emb = train_embedding(dataset, epochs=40, lr=0.05, seed=3)
    enc_params, _ = train_encoder(dataset, epochs=3, seed=0)
    gan = train_gan(dataset[:16], emb, enc_params, stats,
                    TrainConfig(epochs=2, batch_size=8, seed=0))
    model = train_predictor(dataset[:32], emb, epochs=2, seed=0, stats=stats)
    clf_params, _ = train_metric_classifier(dataset, epochs=2, seed=0)
    save_embedding_bundle(os.path.join(out, "embedding.mbnd"), emb, VERSION)
    save_encoder_bundle(os.path.join(out, "encoder.mbnd"), enc_params, VERSION)
    save_gan_bundle(os.path.join(out, "gan.mbnd"), gan.gen, gan.disc,
                    gan.prior, stats, VERSION)
    save_predictor_bundle(os.path.join(out, "predictor.mbnd"), model, VERSION)
    save_classifier_bundle(os.path.join(out, "classifier.mbnd"), clf_params,
                           VERSION)


def dump(name: str, payload) -> None:
    path = os.path.join(OUT, name)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path}")


def main() -> None:
    os.makedirs(OUT, exist_ok=True)
    with tempfile.TemporaryDirectory() as bundles:
        build_bundles(bundles)
        client = TestClient(create_app(bundles))

        dump("health.json", client.get("/api/health").json())
        dump("materials.json", client.get("/api/materials").json())

        res = client.post("/api/generate", json=GENERATE_REQUEST)
        assert res.status_code == 200, res.text
        generate = res.json()
        dump("generate.json", {"request": GENERATE_REQUEST, "response": generate})

        predict_request = {"alloy_name": "Au304",
                           "image": generate["samples"][0]["image"]}
        res = client.post("/api/predict", json=predict_request)
        assert res.status_code == 200, res.text
        dump("predict.json", {"request": predict_request, "response": res.json()})

        errors = []
        for name, body in BAD_REQUESTS:
            res = client.post("/api/generate", json=body)
            assert res.status_code == 400, f"{name}: {res.status_code}"
            errors.append({"name": name, "request": body,
                           "detail": res.json()["detail"]})
        dump("errors.json", errors)


if __name__ == "__main__":
    main()
