"""On-disk dataset container: manifest.csv + materials.csv + images/*.pgm.

Layout under a dataset directory:

    materials.csv   alloy_name + 12 element fractions, one row per alloy
    manifest.csv    optional ``# dataset_version=...`` comment, header row,
                    then one row per sample: id, alloy_name, 19 descriptor
                    fields, 5 condition fields, 8 histogram counts, 12
                    performance fields, relative image path
    images/<id>.pgm binary PGM "P5", 32x32, maxval 255

Floats are serialized with ``repr`` (shortest round-trip form) so
load(save(x)) == x exactly and re-saving a loaded dataset is
byte-identical.  Image intensities are quantized to the 1/255 grid by the
renderer before they reach this module.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .domain import (CavityHistogram, DC_FIELDS, DD_FIELDS, DR_CONTINUOUS,
                     ELEMENTS, IMAGE_SIZE, IrradiationConditions,
                     MaterialComposition, N_BINS, PerformanceParams,
                     SampleRecord, ThermoMechParams)


class DatasetError(ValueError):
    pass


_HV_COLUMNS = tuple(f"bin{i}" for i in range(1, N_BINS + 1))
MANIFEST_COLUMNS = (("id", "alloy_name") + DD_FIELDS + DC_FIELDS
                    + _HV_COLUMNS + DR_CONTINUOUS + ("C_He", "image"))


def _fmt(value) -> str:
    return repr(float(value))


# -- PGM ----------------------------------------------------------------------


def write_pgm(path, image: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(image))


def parse_pgm(blob: bytes, origin: str = "<bytes>") -> np.ndarray:
    if not blob.startswith(b"P5"):
        raise DatasetError(f"{origin}: not a binary PGM (P5) file")
    # header tokens: magic, width, height, maxval; then a single whitespace
    # byte, then raw pixel data
    tokens, pos = [], 2
    while len(tokens) < 3:
        while pos < len(blob) and blob[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DatasetError(f"{origin}: truncated PGM header")
        tokens.append(blob[start:pos])
    pos += 1  # the single whitespace after maxval
    width, height, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise DatasetError(f"{origin}: expected maxval 255, got {maxval}")
    if (width, height) != (IMAGE_SIZE, IMAGE_SIZE):
        raise DatasetError(f"{origin}: image is {width}x{height}, "
                           f"expected {IMAGE_SIZE}x{IMAGE_SIZE}")
    data = blob[pos:pos + width * height]
    if len(data) != width * height:
        raise DatasetError(f"{origin}: truncated pixel data")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width) / 255.0


def pgm_bytes(image: np.ndarray) -> bytes:
    pixels = np.rint(np.asarray(image) * 255.0).clip(0, 255).astype(np.uint8)
    if pixels.shape != (IMAGE_SIZE, IMAGE_SIZE):
        raise DatasetError(f"image must be {IMAGE_SIZE}x{IMAGE_SIZE}, got {pixels.shape}")
    return b"P5\n%d %d\n255\n" % (IMAGE_SIZE, IMAGE_SIZE) + pixels.tobytes()


def read_pgm(path) -> np.ndarray:
    return parse_pgm(Path(path).read_bytes(), origin=str(path))


# -- dataset save/load -----------------------------------------------------------


def save_dataset(samples, path, dataset_version: str | None = None) -> None:
    root = Path(path)
    (root / "images").mkdir(parents=True, exist_ok=True)

    seen_alloys: dict[str, MaterialComposition] = {}
    for s in samples:
        seen_alloys.setdefault(s.composition.alloy_name, s.composition)
    with open(root / "materials.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("alloy_name",) + ELEMENTS)
        for name in sorted(seen_alloys):
            comp = seen_alloys[name]
            writer.writerow([name] + [_fmt(f) for f in comp.m])

    with open(root / "manifest.csv", "w", newline="") as fh:
        if dataset_version is not None:
            fh.write(f"# dataset_version={dataset_version}\n")
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        for s in samples:
            image_rel = f"images/{s.id}.pgm"
            row = [s.id, s.composition.alloy_name]
            for name in DD_FIELDS:
                value = getattr(s.d_d, name)
                row.append(value if name == "crystal_type" else _fmt(value))
            row += [_fmt(getattr(s.d_c, name)) for name in DC_FIELDS]
            row += [str(int(c)) for c in s.h_v.counts]
            row += [_fmt(getattr(s.d_r, name)) for name in DR_CONTINUOUS]
            row.append(str(int(s.d_r.C_He)))
            row.append(image_rel)
            writer.writerow(row)
            write_pgm(root / image_rel, s.micrograph)


def load_dataset(path) -> tuple[list[SampleRecord], str | None]:
    root = Path(path)
    manifest = root / "manifest.csv"
    if not manifest.exists():
        raise DatasetError(f"{manifest}: no manifest found")

    compositions: dict[str, MaterialComposition] = {}
    materials = root / "materials.csv"
    if materials.exists():
        with open(materials, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            for row in reader:
                name = row[0]
                m = tuple(float(v) for v in row[1:1 + len(ELEMENTS)])
                compositions[name] = MaterialComposition(alloy_name=name, m=m)

    dataset_version: str | None = None
    body_lines: list[str] = []
    with open(manifest, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                stripped = line[1:].strip()
                if stripped.startswith("dataset_version="):
                    dataset_version = stripped.split("=", 1)[1]
                continue
            body_lines.append(line)

    reader = csv.reader(body_lines)
    header = next(reader, None)
    if header is None or tuple(header) != MANIFEST_COLUMNS:
        raise DatasetError(f"{manifest}: unexpected header row")

    samples: list[SampleRecord] = []
    ids = set()
    for row_no, row in enumerate(reader, start=2):
        try:
            sample = _parse_row(row, root, compositions)
        except DatasetError:
            raise
        except Exception as exc:
            raise DatasetError(f"{manifest}: malformed row {row_no}: {exc}") from exc
        if sample.id in ids:
            raise DatasetError(f"{manifest}: duplicate id {sample.id!r} at row {row_no}")
        ids.add(sample.id)
        samples.append(sample)
    return samples, dataset_version


def _parse_row(row, root: Path, compositions) -> SampleRecord:
    if len(row) != len(MANIFEST_COLUMNS):
        raise ValueError(f"expected {len(MANIFEST_COLUMNS)} columns, got {len(row)}")
    it = iter(row)
    sample_id = next(it)
    alloy_name = next(it)
    dd_kwargs = {}
    for name in DD_FIELDS:
        raw = next(it)
        dd_kwargs[name] = raw if name == "crystal_type" else float(raw)
    dc_kwargs = {name: float(next(it)) for name in DC_FIELDS}
    counts = tuple(int(next(it)) for _ in range(N_BINS))
    dr_kwargs = {name: float(next(it)) for name in DR_CONTINUOUS}
    dr_kwargs["C_He"] = int(next(it))
    image_rel = next(it)

    image_path = root / image_rel
    if not image_path.exists():
        raise DatasetError(f"sample {sample_id!r}: missing image file {image_rel}")
    micrograph = read_pgm(image_path)

    if alloy_name not in compositions:
        raise ValueError(f"alloy {alloy_name!r} absent from materials.csv")
    return SampleRecord(
        id=sample_id,
        composition=compositions[alloy_name],
        d_d=ThermoMechParams(**dd_kwargs),
        d_c=IrradiationConditions(**dc_kwargs),
        h_v=CavityHistogram(counts=counts),
        d_r=PerformanceParams(**dr_kwargs),
        micrograph=micrograph,
    )
