"""Dataset container round trips and failure modes."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swellgen.dataset import (DatasetError, load_dataset, read_pgm,
                              save_dataset, write_pgm)
from swellgen.oracle import DATASET_VERSION, generate_dataset


def test_pgm_roundtrip(tmp_path):
    img = np.rint(np.linspace(0, 1, 1024).reshape(32, 32) * 255) / 255
    p = tmp_path / "x.pgm"
    write_pgm(p, img)
    loaded = read_pgm(p)
    np.testing.assert_array_equal(loaded, img)
    assert p.read_bytes().startswith(b"P5\n32 32\n255\n")


def test_pgm_rejects_wrong_size(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P5\n31 32\n255\n" + bytes(31 * 32))
    with pytest.raises(DatasetError):
        read_pgm(p)
    with pytest.raises(DatasetError):
        write_pgm(tmp_path / "y.pgm", np.zeros((31, 32)))


def test_roundtrip_ten_samples(tmp_path):
    samples = generate_dataset(10, seed=42)
    save_dataset(samples, tmp_path / "ds", dataset_version=DATASET_VERSION)
    loaded, version = load_dataset(tmp_path / "ds")
    assert version == DATASET_VERSION
    assert len(loaded) == 10
    for orig, back in zip(samples, loaded):
        assert orig == back
        np.testing.assert_array_equal(orig.micrograph, back.micrograph)


def test_resave_is_byte_identical(tmp_path):
    samples = generate_dataset(6, seed=1)
    save_dataset(samples, tmp_path / "a", dataset_version="v1")
    loaded, version = load_dataset(tmp_path / "a")
    save_dataset(loaded, tmp_path / "b", dataset_version=version)
    for rel in ("manifest.csv", "materials.csv"):
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
    for img in sorted((tmp_path / "a" / "images").iterdir()):
        twin = tmp_path / "b" / "images" / img.name
        assert img.read_bytes() == twin.read_bytes()


def test_empty_dataset_manifest_header_only(tmp_path):
    save_dataset([], tmp_path / "empty")
    text = (tmp_path / "empty" / "manifest.csv").read_text()
    lines = [ln for ln in text.splitlines() if ln]
    assert len(lines) == 1 and lines[0].startswith("id,alloy_name,")
    loaded, version = load_dataset(tmp_path / "empty")
    assert loaded == [] and version is None


def test_missing_image_names_the_id(tmp_path):
    samples = generate_dataset(3, seed=2)
    save_dataset(samples, tmp_path / "ds")
    (tmp_path / "ds" / "images" / "s000001.pgm").unlink()
    with pytest.raises(DatasetError, match="s000001"):
        load_dataset(tmp_path / "ds")


def test_malformed_row_cites_row_number(tmp_path):
    samples = generate_dataset(3, seed=2)
    save_dataset(samples, tmp_path / "ds")
    manifest = tmp_path / "ds" / "manifest.csv"
    lines = manifest.read_text().splitlines()
    lines[2] = lines[2].replace(lines[2].split(",")[2], "not_a_number", 1)
    manifest.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match="row 3"):
        load_dataset(tmp_path / "ds")


def test_duplicate_id_rejected(tmp_path):
    samples = generate_dataset(2, seed=2)
    dup = [samples[0], samples[0]]
    save_dataset(dup, tmp_path / "ds")
    with pytest.raises(DatasetError, match="duplicate"):
        load_dataset(tmp_path / "ds")


def test_unexpected_header_rejected(tmp_path):
    samples = generate_dataset(2, seed=2)
    save_dataset(samples, tmp_path / "ds")
    manifest = tmp_path / "ds" / "manifest.csv"
    lines = manifest.read_text().splitlines()
    lines[0] = lines[0].replace("alloy_name", "alloy")
    manifest.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetError, match="header"):
        load_dataset(tmp_path / "ds")


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1))
def test_property_load_save_identity(tmp_path_factory, seed):
    samples = generate_dataset(int(np.random.default_rng(seed).integers(1, 8)),
                               seed=seed)
    root = tmp_path_factory.mktemp("ds")
    save_dataset(samples, root / "d", dataset_version="vv")
    loaded, _ = load_dataset(root / "d")
    assert loaded == samples
    for a, b in zip(samples, loaded):
        np.testing.assert_array_equal(a.micrograph, b.micrograph)
