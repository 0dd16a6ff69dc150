from __future__ import annotations

import time

import imageio.v3 as iio
import numpy as np
import pytest

from deblurgrid.data.dataset import load_dataset
from deblurgrid.errors import ExternalMapError, LevelCacheError
from deblurgrid.sharpness import (
    MapKind,
    PriorSource,
    SharpnessLevelMap,
    SharpnessMap,
    build_level_maps,
    depth_segmented_quantize,
    depth_segments,
    load_external_map,
    load_level_maps,
    local_levels,
    modified_laplacian,
    quantize,
    random_levels,
    save_level_maps,
    skip_mask,
    sml_map,
    tenengrad_map,
    write_unit_map,
)

from .conftest import write_tiny_dataset


def odd_reflect(image: np.ndarray, i: int, j: int) -> float:
    """Point-symmetric extension of `image` at a possibly out-of-range index."""
    h, w = image.shape
    if i < 0:
        return 2 * odd_reflect(image, 0, j) - odd_reflect(image, -i, j)
    if i >= h:
        return 2 * odd_reflect(image, h - 1, j) - odd_reflect(image, 2 * (h - 1) - i, j)
    if j < 0:
        return 2 * image[i, 0] - odd_reflect(image, i, -j)
    if j >= w:
        return 2 * image[i, w - 1] - odd_reflect(image, i, 2 * (w - 1) - j)
    return float(image[i, j])


def mirror(i: int, n: int) -> int:
    if i < 0:
        return -i
    if i >= n:
        return 2 * (n - 1) - i
    return i


def window_sum_loop(values: np.ndarray, window: int) -> np.ndarray:
    h, w = values.shape
    r = window // 2
    out = np.zeros_like(values)
    for i in range(h):
        for j in range(w):
            for di in range(-r, r + 1):
                for dj in range(-r, r + 1):
                    out[i, j] += values[mirror(i + di, h), mirror(j + dj, w)]
    return out


def sml_loop(image: np.ndarray, s: int, window: int) -> np.ndarray:
    h, w = image.shape
    ml = np.zeros_like(image)
    for i in range(h):
        for j in range(w):
            c = image[i, j]
            ml_x = abs(2 * c - odd_reflect(image, i, j - s) - odd_reflect(image, i, j + s))
            ml_y = abs(2 * c - odd_reflect(image, i - s, j) - odd_reflect(image, i + s, j))
            ml[i, j] = ml_x + ml_y
    return window_sum_loop(ml, window)


def tenengrad_loop(image: np.ndarray, window: int) -> np.ndarray:
    kx = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
    h, w = image.shape
    mag = np.zeros_like(image)
    for i in range(h):
        for j in range(w):
            gx = gy = 0.0
            for a in range(3):
                for b in range(3):
                    v = odd_reflect(image, i + a - 1, j + b - 1)
                    gx += kx[a, b] * v
                    gy += kx.T[a, b] * v
            mag[i, j] = gx**2 + gy**2
    return window_sum_loop(mag, window)


# ── Focus measures ────────────────────────────────────────────────


def test_sml_of_constant_image_is_zero():
    assert np.all(sml_map(np.full((9, 9), 0.4)).values == 0)


def test_sml_annihilates_linear_ramp():
    ramp = np.tile(np.arange(10, dtype=np.float64) / 10.0, (8, 1))
    np.testing.assert_allclose(sml_map(ramp, step=1).values, 0.0, atol=1e-12)
    np.testing.assert_allclose(modified_laplacian(ramp.T, step=2), 0.0, atol=1e-12)


def test_sml_matches_nested_loops(rng):
    image = rng.uniform(size=(7, 7))
    np.testing.assert_allclose(sml_map(image, 1, 3).values, sml_loop(image, 1, 3), atol=1e-12)
    np.testing.assert_allclose(sml_map(image, 2, 5).values, sml_loop(image, 2, 5), atol=1e-12)


@pytest.mark.parametrize("window", [0, 2, 4])
def test_even_or_empty_window_rejected(window):
    with pytest.raises(ValueError):
        sml_map(np.zeros((5, 5)), window=window)
    with pytest.raises(ValueError):
        tenengrad_map(np.zeros((5, 5)), window=window)


def test_sml_reads_rgb_through_luma(rng):
    gray = rng.uniform(size=(6, 6))
    rgb = np.repeat(gray[..., None], 3, axis=-1)
    np.testing.assert_allclose(sml_map(rgb).values, sml_map(gray).values, atol=1e-12)


def test_tenengrad_of_constant_image_is_zero():
    assert np.all(tenengrad_map(np.full((6, 6), 0.7)).values == 0)


def test_tenengrad_peaks_on_step_edge():
    image = np.zeros((9, 9))
    image[:, 4:] = 1.0
    values = tenengrad_map(image, window=1).values
    assert set(np.unique(np.argmax(values, axis=1))) <= {3, 4}
    assert np.all(values[:, :3] == 0)
    assert np.all(values[:, 5:] == 0)
    assert np.all(values[:, 3] == 16.0)


def test_tenengrad_matches_nested_loops(rng):
    image = rng.uniform(size=(7, 7))
    np.testing.assert_allclose(tenengrad_map(image, 3).values, tenengrad_loop(image, 3), atol=1e-12)


def test_sharpness_map_rejects_negative_values():
    with pytest.raises(ValueError):
        SharpnessMap(values=np.array([[0.1, -0.2]]), source=PriorSource.SML)


# ── External maps ─────────────────────────────────────────────────


def test_zero_defocus_means_full_sharpness(tmp_path):
    write_unit_map(tmp_path / "a.png", np.zeros((4, 5)))
    sharp = load_external_map(tmp_path / "a.png", MapKind.DEFOCUS)
    assert sharp.source is PriorSource.EXTERNAL
    assert np.all(sharp.values == 1.0)


def test_sixteen_bit_midpoint(tmp_path):
    iio.imwrite(tmp_path / "d.png", np.full((3, 3), 32768, dtype=np.uint16))
    depth = load_external_map(tmp_path / "d.png", MapKind.DEPTH)
    np.testing.assert_allclose(depth, 0.5, atol=1.0 / 65535)


def test_map_round_trip_within_one_step(tmp_path, rng):
    values = rng.uniform(size=(6, 7))
    write_unit_map(tmp_path / "m.png", values)
    loaded = load_external_map(tmp_path / "m.png", "depth", expected_shape=(6, 7))
    assert np.max(np.abs(loaded - values)) <= 1.0 / 65535


def test_size_mismatch_names_the_view(tmp_path):
    write_unit_map(tmp_path / "m.png", np.zeros((4, 4)))
    with pytest.raises(ExternalMapError, match="view_07"):
        load_external_map(tmp_path / "m.png", "defocus", expected_shape=(5, 4), view="view_07")


def test_unreadable_map_names_the_view(tmp_path):
    (tmp_path / "broken.png").write_bytes(b"not an image")
    with pytest.raises(ExternalMapError, match="broken"):
        load_external_map(tmp_path / "broken.png", "depth")
    with pytest.raises(ExternalMapError, match="missing"):
        load_external_map(tmp_path / "missing.png", "depth")


# ── Quantization ──────────────────────────────────────────────────


def smap(values) -> SharpnessMap:
    return SharpnessMap(values=np.asarray(values, dtype=np.float64), source=PriorSource.SML)


def test_single_level_is_all_zero(rng):
    assert np.all(quantize(smap(rng.uniform(size=(5, 5))), 1).levels == 0)


def test_top_value_lands_in_last_bin():
    assert quantize(smap([[0.0, 0.5, 1.0]]), 2).levels.tolist() == [[0, 1, 1]]


def test_constant_map_is_level_zero():
    assert np.all(quantize(smap(np.full((3, 3), 2.0)), 16).levels == 0)


def test_quantize_matches_binning_oracle(rng):
    values = rng.uniform(0.0, 7.0, size=(30, 40))
    levels = quantize(smap(values), 400).levels
    lo, hi = values.min(), values.max()
    expected = np.array(
        [min(int(np.floor(400 * (v - lo) / (hi - lo))), 399) for v in values.ravel()]
    ).reshape(values.shape)
    np.testing.assert_array_equal(levels, expected)
    order = np.argsort(values, axis=None)
    assert np.all(np.diff(levels.ravel()[order]) >= 0)
    np.testing.assert_array_equal(
        np.bincount(levels.ravel(), minlength=400), np.bincount(expected.ravel(), minlength=400)
    )


@pytest.mark.parametrize("scale, offset", [(0.25, 0.0), (2.0, 3.0), (8.0, 100.0), (1.0, -5.0)])
def test_quantize_ignores_affine_rescaling(scale, offset):
    for seed in range(4):
        values = np.random.default_rng(seed).integers(0, 64, size=(12, 10)).astype(np.float64)
        base = quantize(smap(values), 16).levels
        np.testing.assert_array_equal(quantize(smap(scale * values + offset), 16).levels, base)


def test_one_depth_segment_equals_plain_quantize(rng):
    values = smap(rng.uniform(size=(8, 8)))
    depth = rng.uniform(size=(8, 8))
    np.testing.assert_array_equal(
        depth_segmented_quantize(values, depth, 1, 10).levels, quantize(values, 10).levels
    )


def test_each_depth_segment_spans_all_levels():
    depth = np.zeros((4, 8))
    depth[:, 4:] = 1.0
    values = np.zeros((4, 8))
    values[:, :4] = np.linspace(0.0, 0.1, 16).reshape(4, 4)   # near: dim range
    values[:, 4:] = np.linspace(5.0, 9.0, 16).reshape(4, 4)   # far: bright range
    levels = depth_segmented_quantize(smap(values), depth, 2, 4).levels
    for half in (levels[:, :4], levels[:, 4:]):
        assert half.min() == 0
        assert half.max() == 3


def test_depth_segments_match_partition_oracle(rng):
    values = rng.uniform(size=(10, 12))
    depth = rng.uniform(size=(10, 12))
    levels = depth_segmented_quantize(smap(values), depth, 3, 8).levels
    segments = depth_segments(depth, 3)
    assert set(np.unique(segments)) == {0, 1, 2}
    for seg in range(3):
        mask = segments == seg
        v = values[mask]
        expected = np.minimum(np.floor(8 * (v - v.min()) / (v.max() - v.min())), 7)
        np.testing.assert_array_equal(levels[mask], expected.astype(np.int64))


def test_depth_segments_need_depth():
    with pytest.raises(ValueError, match="quantize"):
        depth_segmented_quantize(smap(np.ones((2, 2))), None, 2, 4)


# ── Skip groups ───────────────────────────────────────────────────


def test_skip_mask_extremes(rng):
    lm = SharpnessLevelMap(rng.integers(0, 16, size=(6, 6)), 16)
    assert not skip_mask(lm, 0).any()
    assert skip_mask(lm, 16).all()


def test_skip_mask_flags_sharpest_groups(rng):
    lm = SharpnessLevelMap(rng.integers(0, 400, size=(40, 40)), 400, n_skip=100)
    np.testing.assert_array_equal(skip_mask(lm), lm.levels >= 300)
    assert lm.skip_threshold == 300


def test_level_map_validates_range():
    with pytest.raises(ValueError):
        SharpnessLevelMap(np.array([[0, 4]]), 4)
    with pytest.raises(ValueError):
        SharpnessLevelMap(np.array([[0, 1]]), 4, n_skip=5)


def test_random_and_local_assignments(rng):
    rand = random_levels((20, 30), 12, rng, n_skip=2)
    assert rand.levels.min() >= 0
    assert rand.levels.max() < 12
    local = local_levels((20, 30), 12)
    assert set(np.unique(local.levels)) == set(range(12))
    # row-major tiles: levels never decrease along a row
    assert np.all(np.diff(local.levels, axis=1) >= 0)


# ── Preprocessing and the level cache ─────────────────────────────


@pytest.mark.parametrize("prior", ["sml", "tenengrad", "external", "random", "local"])
def test_build_level_maps_for_every_prior(tiny_dataset_dir, prior):
    views = load_dataset(tiny_dataset_dir).train
    maps = build_level_maps(views, prior, n_levels=8, n_skip=2, rng=np.random.default_rng(1))
    assert len(maps) == len(views)
    for lm, view in zip(maps, views, strict=True):
        assert lm.shape == view.image.shape[:2]
        assert lm.n_levels == 8
        assert lm.n_skip == 2


def test_sml_preprocessing_of_ten_views_is_fast(tmp_path):
    root = write_tiny_dataset(tmp_path / "scene", n_train=10, n_test=0, size=64)
    started = time.perf_counter()
    views = load_dataset(root).train
    maps = build_level_maps(views, PriorSource.SML, n_levels=400, n_skip=100)
    elapsed = time.perf_counter() - started
    assert len(maps) == 10
    assert elapsed < 2.0, f"{elapsed:.2f} s"


def test_external_prior_inverts_the_defocus_file(tiny_dataset_dir):
    view = load_dataset(tiny_dataset_dir).train[0]
    (lm,) = build_level_maps([view], "external", n_levels=4)
    np.testing.assert_array_equal(lm.levels, quantize(view.external, 4).levels)


def test_depth_segmented_preprocessing_needs_depth(tiny_dataset_dir):
    views = load_dataset(tiny_dataset_dir).train
    build_level_maps(views, "sml", n_levels=6, depth_segments=2)
    views[0].depth = None
    with pytest.raises(ExternalMapError, match=views[0].name):
        build_level_maps(views, "sml", n_levels=6, depth_segments=2)


def test_level_cache_round_trip(tmp_path, rng):
    names = ["train_000.png", "train_001.png"]
    maps = [SharpnessLevelMap(rng.integers(0, 400, size=(5, 6)), 400, 100) for _ in names]
    save_level_maps(tmp_path / "levels", names, maps, source="sml", segments=2)
    loaded, sidecar = load_level_maps(tmp_path / "levels", names, n_levels=400)
    assert sidecar["source"] == "sml"
    assert sidecar["segments"] == 2
    for a, b in zip(maps, loaded, strict=True):
        np.testing.assert_array_equal(a.levels, b.levels)
        assert b.n_skip == 100


def test_stale_or_missing_level_cache(tmp_path, rng):
    with pytest.raises(LevelCacheError):
        load_level_maps(tmp_path / "nowhere", ["a.png"])
    maps = [SharpnessLevelMap(rng.integers(0, 8, size=(3, 3)), 8)]
    save_level_maps(tmp_path, ["a.png"], maps, source="sml")
    with pytest.raises(LevelCacheError, match="re-run"):
        load_level_maps(tmp_path, ["a.png"], n_levels=16)
    with pytest.raises(LevelCacheError, match="b"):
        load_level_maps(tmp_path, ["b.png"])
