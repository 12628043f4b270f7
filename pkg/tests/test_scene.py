import json

import numpy as np
import pytest
from scipy import ndimage

from hoimatte.containers import array_checksum
from hoimatte.corpus import LabelAccessError, load_split, write_corpus
from hoimatte.scene import SynthConfig, composite, derive_modalities, synth_scene


def test_composite_identities():
    rng = np.random.default_rng(0)
    fg = rng.random((4, 5, 3))
    bg = rng.random((4, 5, 3))
    assert np.array_equal(composite(fg, bg, np.ones((4, 5))), fg)
    assert np.array_equal(composite(fg, bg, np.zeros((4, 5))), bg)


def test_composite_single_pixel_midpoint():
    out = composite(np.array([[[1.0, 0, 0]]]), np.array([[[0, 0, 1.0]]]), np.array([[0.5]]))
    assert out[0, 0].tolist() == [0.5, 0.0, 0.5]


def test_composite_shape_mismatch():
    with pytest.raises(ValueError):
        composite(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)), np.zeros((4, 4)))
    with pytest.raises(ValueError):
        composite(np.zeros((4, 4, 3)), np.zeros((4, 4, 3)), np.zeros((3, 4)))


def test_small_images_rejected():
    with pytest.raises(ValueError):
        SynthConfig(size=31)


def test_same_seed_bit_identical():
    a, b = synth_scene(123), synth_scene(123)
    for field in ("rgb", "fg_star", "bg_star", "alpha_star", "human_region", "object_region"):
        assert np.array_equal(getattr(a, field), getattr(b, field))
    ma, mb = derive_modalities(a), derive_modalities(b)
    assert np.array_equal(ma.depth, mb.depth)
    assert np.array_equal(ma.heatmap, mb.heatmap)


def test_object_probability_zero():
    cfg = SynthConfig(object_probability=0.0)
    assert not any(synth_scene(s, cfg).object_region.any() for s in range(50))


def test_object_fraction_monte_carlo():
    frac = np.mean([synth_scene(s).interactive for s in range(1000)])
    assert 0.70 <= frac <= 0.80


@pytest.mark.parametrize("seed", range(0, 400, 7))
def test_scene_invariants(seed):
    sc = synth_scene(seed)
    assert np.array_equal(sc.rgb, composite(sc.fg_star, sc.bg_star, sc.alpha_star))
    a = sc.alpha_star
    assert a.min() >= 0 and a.max() <= 1
    soft = ((a > 0) & (a < 1)).mean()
    assert 0 < soft < 0.2

    union = sc.human_region | sc.object_region
    interior = ndimage.binary_erosion(union, np.ones((5, 5)))
    assert np.all(a[interior] == 1)
    far = ~ndimage.binary_dilation(union, np.ones((5, 5)))
    assert np.all(a[far] == 0)
    # soft values only inside the 2 px band around the boundary
    band = ndimage.binary_dilation(union, np.ones((5, 5))) & ~interior
    assert not np.any((a > 0) & (a < 1) & ~band)


@pytest.mark.parametrize("seed", range(1, 300, 11))
def test_modality_invariants(seed):
    sc = synth_scene(seed)
    m = derive_modalities(sc)
    union = sc.human_region | sc.object_region
    d = m.depth[union]
    assert d.max() - d.min() < 0.05
    for arr in (m.depth, m.seg, m.heatmap):
        assert arr.min() >= 0 and arr.max() <= 1
    inner = ndimage.binary_erosion(sc.human_region, np.ones((5, 5)))
    assert np.all(m.seg[inner] >= 0.9)
    obj_only = sc.object_region & ~sc.human_region
    if obj_only.any():
        assert np.all(m.seg[obj_only] <= 0.1)
        assert m.seg[obj_only].mean() <= 0.1
        assert abs(m.depth[sc.object_region].mean() - m.depth[sc.human_region].mean()) < 0.05
    assert m.heatmap.max() == pytest.approx(1.0)


def test_heatmap_peak_at_human_centroid_for_human_only():
    cfg = SynthConfig(object_probability=0.0)
    for seed in range(20):
        sc = synth_scene(seed, cfg)
        m = derive_modalities(sc, cfg)
        rows, cols = np.nonzero(sc.human_region)
        peak = np.unravel_index(np.argmax(m.heatmap), m.heatmap.shape)
        assert abs(peak[0] - rows.mean()) <= 1 and abs(peak[1] - cols.mean()) <= 1


def test_corpus_roundtrip_and_checksums(tmp_path):
    sizes = {"pretrain": 2, "labeled-train": 3, "labeled-test": 2, "unlabeled-train": 3, "unlabeled-test": 1}
    m1 = write_corpus(tmp_path / "a", sizes, seed=5)
    m2 = write_corpus(tmp_path / "b", sizes, seed=5)
    assert m1 == m2
    for split, n in sizes.items():
        assert m1["splits"][split]["count"] == n
    assert m1["splits"]["pretrain"]["interactive"] == 0
    # sample files are byte-identical too
    a = (tmp_path / "a" / "labeled-train" / "000001.npz").read_bytes()
    b = (tmp_path / "b" / "labeled-train" / "000001.npz").read_bytes()
    assert a == b

    data = load_split(tmp_path / "a", "labeled-train")
    assert data.rgb.shape == (3, 64, 64, 3) and data.rgb.dtype == np.float32
    assert data.alpha.shape == (3, 64, 64)
    row = m1["splits"]["labeled-train"]["samples"][0]
    assert synth_scene(row["seed"]).alpha_star.tolist() == data.alpha[0].tolist()

    with open(tmp_path / "a" / "manifest.json") as fh:
        assert json.load(fh)["splits"]["labeled-test"]["count"] == 2


def test_corpus_refuses_nonempty_dir(tmp_path):
    (tmp_path / "junk").write_text("x")
    with pytest.raises(FileExistsError):
        write_corpus(tmp_path, {"pretrain": 1})
    write_corpus(tmp_path, {"pretrain": 1}, force=True)


def test_unlabeled_view_hides_ground_truth(tmp_path):
    write_corpus(tmp_path, {"unlabeled-train": 2})
    view = load_split(tmp_path, "unlabeled-train").unlabeled()
    assert view.rgb.shape[0] == 2
    for name in ("alpha", "fg", "bg", "human_mask", "object_mask"):
        with pytest.raises(LabelAccessError):
            getattr(view, name)


def test_array_checksum_sensitive():
    a = {"x": np.zeros(3, np.float32)}
    b = {"x": np.array([0, 0, 1e-7], np.float32)}
    assert array_checksum(a) != array_checksum(b)
