from __future__ import annotations

import json
import math
from pathlib import Path

import imageio.v3 as iio
import numpy as np
import pytest
import torch
from scipy.ndimage import gaussian_filter

from deblurgrid.data import load_dataset, read_image, write_dataset, write_image
from deblurgrid.data.synthetic import (
    PsfBin,
    SyntheticSceneSpec,
    build_synthetic_dataset,
    defocus_oracle,
    make_synthetic_scene,
    ring_cameras,
    synth_blur,
    write_synthetic,
)
from deblurgrid.errors import CameraError, ConfigError, DatasetError, SynthesisError
from deblurgrid.field import DenseField
from deblurgrid.render import render_view

from .conftest import write_tiny_dataset

ROOT = Path(__file__).resolve().parent.parent


def tiny_spec(**overrides) -> SyntheticSceneSpec:
    values = dict(
        seed=3, n_blobs=3, grid_res=16, n_views=2, n_test=1, height=16, width=16,
        samples_per_ray=32, half_extent=1.0, radius=3.0, elevation=0.5,
    )
    return SyntheticSceneSpec(**{**values, **overrides})


def write_poses(root: Path, frames: list[dict]) -> None:
    (root / "poses.json").write_text(json.dumps({"frames": frames}))


def frame(file: str, c2w=None, split: str = "train") -> dict:
    c2w = np.eye(4).tolist() if c2w is None else c2w
    return {"file": file, "split": split, "fx": 8.0, "fy": 8.0, "cx": 4.0, "cy": 4.0, "c2w": c2w}


# ── Datasets ──────────────────────────────────────────────────────


def test_single_view_with_identity_pose(tmp_path):
    write_image(tmp_path / "images" / "a.png", np.full((8, 8, 3), 0.5))
    write_poses(tmp_path, [frame("a.png")])
    dataset = load_dataset(tmp_path)
    assert len(dataset.views) == 1
    view = dataset.views[0]
    assert view.image.shape == (8, 8, 3)
    assert view.camera.position.tolist() == [0.0, 0.0, 0.0]
    assert view.external is None and view.depth is None and view.sharp is None


def test_scaled_rotation_names_the_view(tmp_path):
    write_image(tmp_path / "images" / "a.png", np.zeros((8, 8, 3)))
    c2w = np.eye(4)
    c2w[:3, :3] *= 1.1
    write_poses(tmp_path, [frame("a.png", c2w.tolist())])
    with pytest.raises(CameraError, match="a.png"):
        load_dataset(tmp_path)


def test_image_without_pose_rejected(tmp_path):
    write_image(tmp_path / "images" / "a.png", np.zeros((8, 8, 3)))
    write_image(tmp_path / "images" / "b.png", np.zeros((8, 8, 3)))
    write_poses(tmp_path, [frame("a.png")])
    with pytest.raises(DatasetError, match="b.png"):
        load_dataset(tmp_path)


def test_images_smaller_than_a_patch_rejected(tmp_path):
    write_image(tmp_path / "images" / "a.png", np.zeros((6, 9, 3)))
    write_poses(tmp_path, [frame("a.png")])
    assert len(load_dataset(tmp_path, min_size=6).views) == 1
    with pytest.raises(DatasetError, match=r"a.png.*6x9.*7px"):
        load_dataset(tmp_path, min_size=7)


def test_pose_without_image_rejected(tmp_path):
    (tmp_path / "images").mkdir()
    write_poses(tmp_path, [frame("ghost.png")])
    with pytest.raises(DatasetError, match="ghost.png"):
        load_dataset(tmp_path)


def test_missing_layout_rejected(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(tmp_path)
    (tmp_path / "images").mkdir()
    with pytest.raises(DatasetError, match="poses.json"):
        load_dataset(tmp_path)


def test_malformed_poses_rejected(tmp_path):
    (tmp_path / "images").mkdir()
    (tmp_path / "poses.json").write_text(json.dumps({"frames": [{"file": "a.png"}]}))
    with pytest.raises(DatasetError):
        load_dataset(tmp_path)


def test_train_views_must_share_a_size(tmp_path):
    write_image(tmp_path / "images" / "a.png", np.zeros((8, 8, 3)))
    write_image(tmp_path / "images" / "b.png", np.zeros((8, 9, 3)))
    write_poses(tmp_path, [frame("a.png"), frame("b.png")])
    with pytest.raises(DatasetError, match="b.png"):
        load_dataset(tmp_path)


def test_auxiliary_maps_are_loaded(tiny_dataset_dir):
    dataset = load_dataset(tiny_dataset_dir)
    assert [v.split for v in dataset.views] == ["train", "train", "test"]
    for view in dataset.train:
        assert view.external is not None
        assert view.depth.shape == view.image.shape[:2]
    assert dataset.test[0].external is None
    np.testing.assert_array_equal(dataset.aabb, [[-1.0] * 3, [1.0] * 3])


def test_sixteen_bit_and_gray_images(tmp_path):
    iio.imwrite(tmp_path / "g.png", np.full((4, 4), 65535, dtype=np.uint16))
    image = read_image(tmp_path / "g.png")
    assert image.shape == (4, 4, 3)
    assert np.all(image == 1.0)


def test_write_then_load_round_trip(tmp_path):
    dataset = build_synthetic_dataset(make_synthetic_scene(tiny_spec()))
    write_dataset(dataset, tmp_path)
    loaded = load_dataset(tmp_path)
    assert [v.name for v in loaded.views] == [v.name for v in dataset.views]
    for a, b in zip(dataset.views, loaded.views, strict=True):
        assert np.max(np.abs(a.image - b.image)) <= 0.5 / 255 + 1e-12
        np.testing.assert_allclose(a.camera.c2w, b.camera.c2w)
    train_a, train_b = dataset.train[0], loaded.train[0]
    np.testing.assert_allclose(train_b.external.values, train_a.external.values, atol=1 / 65535)
    np.testing.assert_allclose(train_b.depth, train_a.depth, atol=1 / 65535)


# ── Synthetic scenes ──────────────────────────────────────────────


def test_zero_blobs_render_black():
    scene = make_synthetic_scene(tiny_spec(n_blobs=0))
    for image in scene.sharp:
        assert np.all(image == 0)


def test_centered_opaque_blob_projects_to_the_image_center():
    spec = tiny_spec()
    n = 17
    axis = torch.linspace(-1.0, 1.0, n, dtype=torch.float64)
    zz, yy, xx = torch.meshgrid(axis, axis, axis, indexing="ij")
    sigma = 400.0 * torch.exp(-(xx**2 + yy**2 + zz**2) / (2 * 0.15**2))
    field = DenseField(
        sigma, torch.ones((3, n, n, n), dtype=torch.float64),
        torch.tensor([[-1.0] * 3, [1.0] * 3], dtype=torch.float64),
    )
    cameras, _ = ring_cameras(spec)
    for camera in cameras:
        image, _ = render_view(field, camera, 64)
        assert image[7:9, 7:9].mean() > 0.9
        assert image[0, 0].max() < 0.05
        assert image[15, 15].max() < 0.05


def test_rendering_is_deterministic():
    a = make_synthetic_scene(tiny_spec())
    b = make_synthetic_scene(tiny_spec())
    for x, y in zip(a.sharp + a.depth, b.sharp + b.depth, strict=True):
        assert np.array_equal(x, y)


def test_test_views_sit_between_train_views():
    cameras, splits = ring_cameras(tiny_spec(n_views=4, n_test=4))
    assert splits == ["train"] * 4 + ["test"] * 4
    angles = [math.degrees(math.atan2(c.position[1], c.position[0])) % 360 for c in cameras]
    assert angles[:4] == pytest.approx([0, 90, 180, 270], abs=1e-9)
    assert angles[4:] == pytest.approx([45, 135, 225, 315], abs=1e-9)


def test_misses_get_the_far_depth():
    spec = tiny_spec(n_blobs=0)
    scene = make_synthetic_scene(spec)
    assert np.all(scene.depth[0] == spec.far_depth)


def test_synthetic_dataset_layout():
    dataset = build_synthetic_dataset(make_synthetic_scene(tiny_spec()))
    assert [v.name for v in dataset.views] == ["train_000.png", "train_001.png", "test_002.png"]
    for view in dataset.train:
        assert view.sharp is not None and view.external is not None
        assert view.depth.min() >= 0 and view.depth.max() <= 1
    assert np.array_equal(dataset.test[0].image, dataset.test[0].sharp)


def test_write_synthetic_echoes_the_spec(tmp_path):
    spec = tiny_spec()
    write_synthetic(spec, tmp_path)
    assert SyntheticSceneSpec.from_yaml(tmp_path / "synth.yaml") == spec
    assert len(load_dataset(tmp_path).views) == 3


def test_shipped_scene_spec_parses():
    spec = SyntheticSceneSpec.from_yaml(ROOT / "configs" / "synthetic.yaml")
    assert spec.n_views == 12
    assert math.isinf(spec.psf_bank[-1].depth_max)


def test_bad_scene_specs(tmp_path):
    with pytest.raises(ConfigError):
        SyntheticSceneSpec.from_yaml(tmp_path / "nope.yaml")
    (tmp_path / "bad.yaml").write_text("n_views: -2\n")
    with pytest.raises(ConfigError):
        SyntheticSceneSpec.from_yaml(tmp_path / "bad.yaml")
    with pytest.raises(ValueError):
        PsfBin(depth_min=2.0, depth_max=1.0)


# ── Depth-dependent blur ──────────────────────────────────────────


def test_zero_std_bank_leaves_image_sharp(rng):
    sharp = rng.uniform(size=(10, 10, 3))
    blurred, stds = synth_blur(sharp, rng.uniform(0, 5, (10, 10)), [PsfBin(std=0.0)])
    assert np.array_equal(blurred, sharp)
    assert np.all(stds == 0)


def test_single_bin_equals_gaussian_filter(rng):
    sharp = rng.uniform(size=(12, 12, 3))
    blurred, _ = synth_blur(sharp, np.ones((12, 12)), [PsfBin(std=2.0)])
    for c in range(3):
        np.testing.assert_allclose(
            blurred[..., c], gaussian_filter(sharp[..., c], 2.0, mode="mirror"), atol=1e-12
        )


def test_two_bins_blur_each_region_with_its_own_std(rng):
    sharp = rng.uniform(size=(16, 16, 3))
    depth = np.ones((16, 16))
    depth[:, 8:] = 5.0
    bank = [PsfBin(depth_max=3.0, std=0.5), PsfBin(depth_min=3.0, std=2.5)]
    blurred, stds = synth_blur(sharp, depth, bank)
    near, far = depth < 3.0, depth >= 3.0
    assert np.all(stds[near] == 0.5) and np.all(stds[far] == 2.5)
    for std, region in [(0.5, near), (2.5, far)]:
        ref = gaussian_filter(sharp, (std, std, 0.0), mode="mirror")
        other = gaussian_filter(sharp, (3.0 - std, 3.0 - std, 0.0), mode="mirror")
        np.testing.assert_allclose(blurred[region], ref[region], atol=1e-12)
        assert np.abs(blurred[region] - other[region]).max() > 1e-3


def test_uncovered_depth_rejected(rng):
    with pytest.raises(SynthesisError, match="no PSF bin"):
        synth_blur(rng.uniform(size=(4, 4, 3)), np.full((4, 4), 9.0), [PsfBin(depth_max=5.0)])


def test_defocus_oracle_is_inverted_std():
    oracle = defocus_oracle(np.array([[0.0, 1.5, 3.0]]), 3.0)
    np.testing.assert_allclose(oracle.values, [[1.0, 0.5, 0.0]])


def test_tiny_dataset_fixture_loads(tmp_path):
    root = write_tiny_dataset(tmp_path / "d", n_train=3, n_test=2, size=10, with_maps=False)
    dataset = load_dataset(root)
    assert len(dataset.train) == 3 and len(dataset.test) == 2
    assert all(v.external is None for v in dataset.views)
