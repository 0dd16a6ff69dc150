from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from deblurgrid.sampler import PatchSpec, ray_budget_table, rays_per_pixel, sample_batch
from deblurgrid.sharpness import SharpnessLevelMap


def view_stack(rng, n_views=2, size=64, n_levels=8, n_skip=2):
    images = [rng.uniform(size=(size, size, 3)) for _ in range(n_views)]
    maps = [
        SharpnessLevelMap(rng.integers(0, n_levels, size=(size, size)), n_levels, n_skip)
        for _ in range(n_views)
    ]
    return images, maps


def test_view_the_size_of_a_patch_has_one_origin(rng):
    images, maps = view_stack(rng, size=9)
    batch = sample_batch(rng, images, maps, n_patches=5, P=9, K=3)
    assert all(p.origin == (0, 0) for p in batch.patches)


def test_training_sized_batch(rng):
    images, maps = view_stack(rng)
    batch = sample_batch(rng, images, maps, n_patches=28, P=22, K=11)
    assert len(batch.patches) == 28
    assert batch.P_prime == 12
    assert batch.targets.shape == (28, 12, 12, 3)
    assert batch.levels.shape == (28, 12, 12)
    assert batch.n_rays == 28 * 484
    assert batch.n_targets == 28 * 144


def test_targets_levels_and_skip_align_with_patch_interior(rng):
    images, maps = view_stack(rng, n_views=3, size=20)
    batch = sample_batch(rng, images, maps, n_patches=6, P=8, K=5)
    for b, spec in enumerate(batch.patches):
        h, w = spec.origin
        rows, cols = slice(h + 2, h + 6), slice(w + 2, w + 6)
        target = batch.targets[b].numpy()
        np.testing.assert_array_equal(target, images[spec.view][rows, cols].astype(target.dtype))
        np.testing.assert_array_equal(batch.levels[b].numpy(), maps[spec.view].levels[rows, cols])
        sharp = maps[spec.view].levels[rows, cols] >= 6
        np.testing.assert_array_equal(batch.skip[b].numpy(), sharp)
    assert batch.views.tolist() == [p.view for p in batch.patches]


def test_same_seed_same_batch():
    images, maps = view_stack(np.random.default_rng(0))
    a = sample_batch(np.random.default_rng(5), images, maps, 4, 10, 3)
    b = sample_batch(np.random.default_rng(5), images, maps, 4, 10, 3)
    assert a.patches == b.patches


def test_origins_are_uniform_over_valid_grid():
    images, maps = view_stack(np.random.default_rng(0), n_views=1)
    passed = 0
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        counts = np.zeros((43, 43))
        for _ in range(10):
            batch = sample_batch(rng, images, maps, n_patches=1000, P=22, K=11)
            for h, w in batch.origins.tolist():
                counts[h, w] += 1
        assert counts.sum() == 10_000
        if stats.chisquare(counts.ravel()).pvalue > 0.01:
            passed += 1
    assert passed >= 4


def test_patch_larger_than_view_rejected(rng):
    images, maps = view_stack(rng, size=10)
    with pytest.raises(ValueError, match="smaller than the patch"):
        sample_batch(rng, images, maps, 1, P=11, K=3)


def test_patch_smaller_than_kernel_rejected(rng):
    images, maps = view_stack(rng, size=10)
    with pytest.raises(ValueError):
        sample_batch(rng, images, maps, 1, P=3, K=5)


def test_patch_spec_validation():
    PatchSpec(0, (2, 2), 4).validate(6, 6)
    with pytest.raises(ValueError):
        PatchSpec(0, (3, 0), 4).validate(6, 6)


@pytest.mark.parametrize(
    "P_prime, expected",
    [(16, 676 / 256), (12, 484 / 144), (8, 324 / 64)],
)
def test_rays_per_pixel_at_kernel_eleven(P_prime, expected):
    assert rays_per_pixel(P_prime, 11) == pytest.approx(expected)


def test_rays_per_pixel_table_rounding():
    rows = ray_budget_table()
    assert [(P, Pp) for P, Pp, _ in rows] == [(26, 16), (22, 12), (18, 8)]
    assert [round(r, 2) for _, _, r in rows] == [2.64, 3.36, 5.06]


@pytest.mark.parametrize("P_prime", [1, 5, 100])
def test_single_tap_kernel_needs_one_ray(P_prime):
    assert rays_per_pixel(P_prime, 1) == 1.0


def test_rays_per_pixel_decreases_toward_one():
    values = [rays_per_pixel(p, 7) for p in range(1, 200)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert 1.0 < values[-1] < 1.07


def test_empty_target_region_rejected():
    with pytest.raises(ValueError):
        rays_per_pixel(0, 11)
