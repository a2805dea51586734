"""Operator command line: dataset synthesis, model training, evaluation,
generation, prediction and serving.

Every run writes a resolved-config JSON next to its outputs so any artifact
can be traced back to the exact flags that produced it.  Exit codes: 0 on
success, 1 on validation errors (one-line diagnostic on stderr), 2 on I/O
failure.
"""

from __future__ import annotations

import argparse
import base64
import dataclasses
import json
import os
import sys

import numpy as np

from .bundle import BundleError
from .dataset import (DatasetError, load_dataset, pgm_bytes, read_pgm,
                      save_dataset, write_pgm)
from .domain import IrradiationConditions, ValidationError, fit_stats
from .embedding import export_embedding_projection, train_embedding
from .encoder import encoder_mae, train_encoder
from .materials import ALLOY_NAMES, composition, nominal_dd
from .metrics import (classifier_accuracy, classifier_probs,
                      inception_style_score, train_metric_classifier)
from .oracle import DATASET_VERSION, generate_dataset
from .pipeline import (Pipeline, load_classifier_bundle, load_embedding_bundle,
                       load_encoder_bundle, load_gan_bundle, load_vae_bundle,
                       save_classifier_bundle, save_embedding_bundle,
                       save_encoder_bundle, save_gan_bundle,
                       save_predictor_bundle, save_vae_bundle)
from .predictor import evaluate_predictor, train_predictor
from .tensor import ShapeError
from .training import (PRESETS, GanTrainResult, TrainConfig, VARIANTS,
                       evaluate_discriminator, generate_for_samples,
                       load_gan_checkpoint, mean_generated_lhv, train_gan,
                       write_loss_log)
from .vae import train_vae, vae_generate


def _ensure_out(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _write_resolved_config(args, extra: dict | None = None) -> None:
    out = _ensure_out(args.out)
    resolved = {k: v for k, v in vars(args).items() if k != "func"}
    resolved.update(extra or {})
    path = os.path.join(out, f"resolved-config-{args.command}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(resolved, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_curve(path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(repr(float(v)) if isinstance(v, float) else str(v)
                              for v in (row if isinstance(row, (tuple, list))
                                        else (row,))))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _gan_bundle_name(variant: str) -> str:
    return "gan.mbnd" if variant == "full" else f"gan-{variant}.mbnd"


def _split(samples, holdout: int):
    if holdout <= 0:
        return samples, []
    if holdout >= len(samples):
        raise ValidationError(f"holdout {holdout} leaves no training data "
                              f"(dataset has {len(samples)} samples)")
    return samples[:-holdout], samples[-holdout:]


# -- subcommand handlers -------------------------------------------------------


def _cmd_synth(args) -> None:
    samples = generate_dataset(args.n, args.seed)
    save_dataset(samples, args.out, dataset_version=DATASET_VERSION)
    _write_resolved_config(args, {"dataset_version": DATASET_VERSION})
    print(f"wrote {len(samples)} samples to {args.out} "
          f"(dataset_version {DATASET_VERSION})")


def _cmd_train_embed(args) -> None:
    samples, version = load_dataset(args.data)
    model = train_embedding(samples, epochs=args.epochs, lr=args.lr,
                            seed=args.seed, rule=args.rule,
                            weight_decay=args.weight_decay)
    out = _ensure_out(args.out)
    save_embedding_bundle(os.path.join(out, "embedding.mbnd"), model,
                          version or "")
    log_path = os.path.join(out, "loss-embedding.csv")
    _write_curve(log_path, "epoch,mse",
                 [(i, v) for i, v in enumerate(model.loss_curve)])
    _write_resolved_config(args)
    print(f"loss log: {log_path}")


def _cmd_train_encoder(args) -> None:
    samples, version = load_dataset(args.data)
    train, held = _split(samples, args.holdout)
    params, curve = train_encoder(train, epochs=args.epochs, lr=args.lr,
                                  seed=args.seed, batch_size=args.batch_size,
                                  rule=args.rule,
                                  weight_decay=args.weight_decay)
    out = _ensure_out(args.out)
    save_encoder_bundle(os.path.join(out, "encoder.mbnd"), params, version or "")
    log_path = os.path.join(out, "loss-encoder.csv")
    _write_curve(log_path, "epoch,mse", [(i, v) for i, v in enumerate(curve)])
    _write_resolved_config(args)
    if held:
        mae = encoder_mae(params, held)
        print("held-out per-bin MAE: "
              + ", ".join(f"bin{i + 1}={v:.3f}" for i, v in enumerate(mae)))
    print(f"loss log: {log_path}")


def _resolve_train_config(args) -> TrainConfig:
    config = PRESETS[args.preset]
    overrides = {}
    for name in ("epochs", "batch_size", "lr", "weight_decay", "lam",
                 "variant", "seed", "rule", "checkpoint_interval"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    return config.override(**overrides)


def _cmd_train_gan(args) -> None:
    samples, version = load_dataset(args.data)
    out = _ensure_out(args.out)
    embeddings, _ = load_embedding_bundle(os.path.join(out, "embedding.mbnd"))
    enc_params, _ = load_encoder_bundle(os.path.join(out, "encoder.mbnd"))
    stats = fit_stats(samples)
    config = _resolve_train_config(args)

    resume, start_epoch = None, 0
    if args.resume:
        resume, start_epoch = load_gan_checkpoint(args.resume, version or "")
        # continue under the saved configuration; explicit flags (notably
        # --epochs) still override so a run can be extended
        explicit = {name: getattr(args, name)
                    for name in ("epochs", "batch_size", "lr", "weight_decay",
                                 "lam", "seed", "rule", "checkpoint_interval")
                    if getattr(args, name) is not None}
        config = resume.config.override(**explicit)
    checkpoint_path = os.path.join(out, f"checkpoint-{config.variant}.mbnd")
    result = train_gan(samples, embeddings, enc_params, stats, config,
                       dataset_version=version or "",
                       checkpoint_path=checkpoint_path, resume=resume,
                       start_epoch=start_epoch)
    save_gan_bundle(os.path.join(out, _gan_bundle_name(config.variant)),
                    result.gen, result.disc, result.prior, stats, version or "",
                    extra_meta={"variant": config.variant, "lambda": config.lam,
                                "epochs": config.epochs, "seed": config.seed})
    log_path = os.path.join(out, f"loss-gan-{config.variant}.csv")
    write_loss_log(log_path, result.loss_log)
    _write_resolved_config(args, {"effective_config": dataclasses.asdict(config)})
    for warning in result.warnings:
        print(f"warning: {warning}")
    print(f"loss log: {log_path}")


def _cmd_train_vae(args) -> None:
    samples, version = load_dataset(args.data)
    stats = fit_stats(samples)
    params, log = train_vae(samples, stats, epochs=args.epochs, lr=args.lr,
                            seed=args.seed, batch_size=args.batch_size,
                            rule=args.rule, weight_decay=args.weight_decay)
    out = _ensure_out(args.out)
    save_vae_bundle(os.path.join(out, "vae.mbnd"), params, stats, version or "")
    log_path = os.path.join(out, "loss-vae.csv")
    _write_curve(log_path, "epoch,loss,reconstruction,kl",
                 [(i, *row) for i, row in enumerate(log)])
    _write_resolved_config(args)
    print(f"loss log: {log_path}")


def _cmd_train_predictor(args) -> None:
    samples, version = load_dataset(args.data)
    out = _ensure_out(args.out)
    embeddings, _ = load_embedding_bundle(os.path.join(out, "embedding.mbnd"))
    train, held = _split(samples, args.holdout)
    model = train_predictor(train, embeddings, epochs=args.epochs, lr=args.lr,
                            seed=args.seed, batch_size=args.batch_size,
                            rule=args.rule, weight_decay=args.weight_decay)
    save_predictor_bundle(os.path.join(out, "predictor.mbnd"), model,
                          version or "")
    log_path = os.path.join(out, "loss-predictor.csv")
    _write_curve(log_path, "epoch,loss",
                 [(i, v) for i, v in enumerate(model.loss_curve)])
    _write_resolved_config(args)
    if held:
        per_field, overall, acc = evaluate_predictor(model, embeddings, held)
        eval_path = os.path.join(out, "predictor-eval.csv")
        rows = [(name, float(v)) for name, v
                in zip(model.stats.d_r.names, per_field)]
        _write_curve(eval_path, "field,rmse",
                     rows + [("overall", overall), ("C_He_accuracy", acc)])
        print(f"held-out RMSE {overall:.4f}, C_He accuracy {acc:.3f} "
              f"({eval_path})")
    print(f"loss log: {log_path}")


def _cmd_train_classifier(args) -> None:
    samples, version = load_dataset(args.data)
    train, held = _split(samples, args.holdout)
    params, curve = train_metric_classifier(train, epochs=args.epochs,
                                            lr=args.lr, seed=args.seed,
                                            batch_size=args.batch_size,
                                            rule=args.rule,
                                            weight_decay=args.weight_decay)
    out = _ensure_out(args.out)
    save_classifier_bundle(os.path.join(out, "classifier.mbnd"), params,
                           version or "")
    log_path = os.path.join(out, "loss-classifier.csv")
    _write_curve(log_path, "epoch,cross_entropy",
                 [(i, v) for i, v in enumerate(curve)])
    _write_resolved_config(args)
    if held:
        print(f"held-out accuracy: {classifier_accuracy(params, held):.3f}")
    print(f"loss log: {log_path}")


def _cmd_eval(args) -> None:
    samples, version = load_dataset(args.data)
    bundles = args.bundles
    embeddings, _ = load_embedding_bundle(os.path.join(bundles, "embedding.mbnd"))
    enc_params, _ = load_encoder_bundle(os.path.join(bundles, "encoder.mbnd"))
    clf_params, _ = load_classifier_bundle(os.path.join(bundles,
                                                        "classifier.mbnd"))
    stats = fit_stats(samples)
    conditions = samples[-args.n_images:]

    rmse_fields = []
    predictor_path = os.path.join(bundles, "predictor.mbnd")
    if os.path.exists(predictor_path):
        from .pipeline import load_predictor_bundle
        model, _ = load_predictor_bundle(predictor_path)
        per_field, _overall, _acc = evaluate_predictor(model, embeddings,
                                                       conditions)
        rmse_fields = [float(v) for v in per_field]

    def classify(images):
        return classifier_probs(clf_params, images[:, None, :, :])

    rows = []
    for variant in args.variant or ["full"]:
        if variant == "vae":
            params, vae_stats, _ = load_vae_bundle(os.path.join(bundles,
                                                                "vae.mbnd"))
            from .domain import dc_vector, dd_vector
            fakes = np.stack([
                vae_generate(params, dd_vector(s.d_d, vae_stats),
                             dc_vector(s.d_c, vae_stats), 1,
                             args.seed + i)[0]
                for i, s in enumerate(conditions)])
            disc_acc = ""
            lhv = ""
        else:
            gen, disc, prior, gan_stats, meta = load_gan_bundle(
                os.path.join(bundles, _gan_bundle_name(variant)))
            result = GanTrainResult(gen=gen, disc=disc, prior=prior,
                                    loss_log=[],
                                    config=TrainConfig(variant=variant))
            fakes = generate_for_samples(result, embeddings, gan_stats,
                                         conditions, args.seed)
            disc_acc = repr(float(evaluate_discriminator(
                result, embeddings, gan_stats, conditions, seed=args.seed)))
            lhv = repr(float(mean_generated_lhv(
                result, embeddings, enc_params, gan_stats, conditions,
                seed=args.seed)))
        score, stderr = inception_style_score(fakes, classify,
                                              split_seed=args.seed)
        rows.append([variant, repr(float(score)), repr(float(stderr)), lhv,
                     disc_acc] + [repr(float(v)) for v in rmse_fields])

    out = _ensure_out(args.out)
    report = os.path.join(out, "eval-report.csv")
    header = ["variant", "score", "stderr", "l_hv", "disc_accuracy"]
    header += [f"rmse_{name}" for name in stats.d_r.names[:len(rmse_fields)]]
    with open(report, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
    _write_resolved_config(args, {"dataset_version": version})
    print(f"report: {report}")


def _parse_dd_overrides(pairs) -> dict:
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValidationError(f"--dd expects name=value, got {pair!r}")
        name, raw = pair.split("=", 1)
        overrides[name] = raw if name == "crystal_type" else float(raw)
    return overrides


def _cmd_generate(args) -> None:
    pipe = Pipeline.load(args.bundles)
    if args.material not in ALLOY_NAMES:
        raise ValidationError(f"unknown alloy {args.material!r}; valid names: "
                              f"{', '.join(ALLOY_NAMES)}")
    comp = composition(args.material)
    d_d = dataclasses.replace(nominal_dd(args.material),
                              **_parse_dd_overrides(args.dd))
    d_c = IrradiationConditions(phi_fast=args.phi_fast,
                                phi_thermal=args.phi_thermal,
                                phi_flux=args.phi_flux, T_irr=args.t_irr,
                                T_exp=args.t_exp)
    samples = pipe.generate_samples(comp, d_d, d_c, args.n, args.seed)
    out = _ensure_out(args.out)
    records = []
    for i, sample in enumerate(samples):
        filename = f"gen-{i:03d}.pgm"
        write_pgm(os.path.join(out, filename), sample["image"])
        records.append({
            "image_file": filename,
            "image": base64.b64encode(pgm_bytes(sample["image"])).decode("ascii"),
            "h_v_estimate": sample["h_v_estimate"],
            "d_r_prediction": sample["d_r_prediction"],
            "seed_used": sample["seed_used"],
        })
    sidecar = os.path.join(out, "generate.json")
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump({"dataset_version": pipe.dataset_version,
                   "seed_used": args.seed, "samples": records},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_resolved_config(args)
    for warning in pipe.warnings:
        print(f"warning: {warning}")
    print(f"wrote {len(samples)} images and {sidecar}")


def _cmd_predict(args) -> None:
    pipe = Pipeline.load(args.bundles)
    if args.material not in ALLOY_NAMES:
        raise ValidationError(f"unknown alloy {args.material!r}; valid names: "
                              f"{', '.join(ALLOY_NAMES)}")
    image = read_pgm(args.image)
    prediction = pipe.predict_from_image(image, composition(args.material))
    out = _ensure_out(args.out)
    path = os.path.join(out, "predict.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"alloy_name": args.material, "d_r_prediction": prediction},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_resolved_config(args)
    print(json.dumps(prediction, sort_keys=True))


def _cmd_serve(args) -> None:
    import uvicorn

    from .service import create_app

    _write_resolved_config(args)
    uvicorn.run(create_app(args.bundles), host=args.host, port=args.port)


def _cmd_export_embeddings(args) -> None:
    embeddings, _ = load_embedding_bundle(os.path.join(args.bundles,
                                                       "embedding.mbnd"))
    out = _ensure_out(args.out)
    path = os.path.join(out, "embedding-projection.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(export_embedding_projection(embeddings))
    _write_resolved_config(args)
    print(f"projection: {path}")


# -- parser ----------------------------------------------------------------------


def _add_training_flags(sub, epochs: int, lr: float, batch_size: int = 32,
                        rule: str = "rmsprop") -> None:
    sub.add_argument("--epochs", type=int, default=epochs)
    sub.add_argument("--lr", type=float, default=lr)
    sub.add_argument("--batch-size", type=int, default=batch_size)
    sub.add_argument("--rule", default=rule)
    sub.add_argument("--weight-decay", type=float, default=0.0)
    sub.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swellgen",
        description="Micrograph generation and performance prediction for "
                    "irradiated materials.")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("synth", help="generate a synthetic dataset")
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=_cmd_synth)

    sub = subs.add_parser("train-embed", help="train element embeddings")
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--epochs", type=int, default=200)
    sub.add_argument("--lr", type=float, default=0.05)
    sub.add_argument("--rule", default="adagrad")
    sub.add_argument("--weight-decay", type=float, default=0.0)
    sub.add_argument("--seed", type=int, default=0)
    sub.set_defaults(func=_cmd_train_embed)

    sub = subs.add_parser("train-encoder", help="train the cavity encoder")
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--holdout", type=int, default=0)
    _add_training_flags(sub, epochs=30, lr=1e-3)
    sub.set_defaults(func=_cmd_train_encoder)

    sub = subs.add_parser("train-gan", help="adversarial training")
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    sub.add_argument("--variant", choices=[v for v in VARIANTS if v != "vae"],
                     default=None)
    sub.add_argument("--epochs", type=int, default=None)
    sub.add_argument("--batch-size", type=int, default=None)
    sub.add_argument("--lr", type=float, default=None)
    sub.add_argument("--weight-decay", type=float, default=None)
    sub.add_argument("--lambda", dest="lam", type=float, default=None)
    sub.add_argument("--rule", default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--checkpoint-interval", type=int, default=None)
    sub.add_argument("--resume", default=None,
                     help="checkpoint bundle to continue from")
    sub.set_defaults(func=_cmd_train_gan)

    sub = subs.add_parser("train-vae", help="train the VAE baseline")
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", required=True)
    _add_training_flags(sub, epochs=20, lr=1e-3)
    sub.set_defaults(func=_cmd_train_vae)

    sub = subs.add_parser("train-predictor", help="train the performance predictor")
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--holdout", type=int, default=0)
    _add_training_flags(sub, epochs=30, lr=1e-3)
    sub.set_defaults(func=_cmd_train_predictor)

    sub = subs.add_parser("train-classifier", help="train the metric classifier")
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--holdout", type=int, default=0)
    _add_training_flags(sub, epochs=40, lr=1e-3)
    sub.set_defaults(func=_cmd_train_classifier)

    sub = subs.add_parser("eval", help="score generation variants")
    sub.add_argument("--data", required=True)
    sub.add_argument("--bundles", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--variant", action="append",
                     choices=list(VARIANTS))
    sub.add_argument("--n-images", type=int, default=256)
    sub.add_argument("--seed", type=int, default=0)
    sub.set_defaults(func=_cmd_eval)

    sub = subs.add_parser("generate", help="what-if generation + prediction")
    sub.add_argument("--bundles", required=True)
    sub.add_argument("--material", required=True)
    sub.add_argument("--phi-fast", type=float, default=0.0)
    sub.add_argument("--phi-thermal", type=float, default=0.0)
    sub.add_argument("--phi-flux", type=float, required=True)
    sub.add_argument("--t-irr", type=float, required=True)
    sub.add_argument("--t-exp", type=float, default=300.0)
    sub.add_argument("--dd", action="append",
                     help="thermo-mechanical override name=value")
    sub.add_argument("--n", type=int, default=1)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=_cmd_generate)

    sub = subs.add_parser("predict", help="performance from a micrograph")
    sub.add_argument("--bundles", required=True)
    sub.add_argument("--image", required=True)
    sub.add_argument("--material", required=True)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=_cmd_predict)

    sub = subs.add_parser("serve", help="run the inference HTTP service")
    sub.add_argument("--bundles", required=True)
    sub.add_argument("--host", default="127.0.0.1")
    sub.add_argument("--port", type=int, default=8000)
    sub.add_argument("--out", default=".")
    sub.set_defaults(func=_cmd_serve)

    sub = subs.add_parser("export-embeddings",
                          help="write the 2-D embedding projection CSV")
    sub.add_argument("--bundles", required=True)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=_cmd_export_embeddings)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed the diagnostic; map usage errors to 1
        return 0 if exc.code in (0, None) else 1
    try:
        args.func(args)
        return 0
    except (ValidationError, DatasetError, BundleError, ShapeError,
            ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
