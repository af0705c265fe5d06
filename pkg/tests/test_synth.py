from __future__ import annotations

import numpy as np
import pytest

from phpipe.synth import (
    SHAPES,
    ShapeSpec,
    TORUS_R,
    TORUS_r,
    generate_shape_dataset,
    ideal_diameter,
    perturb,
    read_manifest,
    sample_shape,
    write_shape_dataset,
)


class TestSampleShape:
    def test_circle_on_surface(self):
        pts = sample_shape(ShapeSpec("circle", n_points=80, seed=1))
        assert np.allclose(pts[:, 0] ** 2 + pts[:, 1] ** 2, 1.0, atol=1e-12)
        assert np.allclose(pts[:, 2], 0.0, atol=1e-12)

    def test_torus_on_surface(self):
        pts = sample_shape(ShapeSpec("torus", n_points=80, seed=2))
        ring = np.sqrt(pts[:, 0] ** 2 + pts[:, 1] ** 2)
        assert np.allclose((ring - TORUS_R) ** 2 + pts[:, 2] ** 2, TORUS_r**2,
                           atol=1e-12)

    def test_sphere_on_surface(self):
        pts = sample_shape(ShapeSpec("sphere", n_points=40, seed=3))
        assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)

    def test_deterministic(self):
        spec = ShapeSpec("uniform", n_points=30, noise_mu=0.3, seed=11)
        assert (sample_shape(spec) == sample_shape(spec)).all()

    def test_every_shape_in_r3(self):
        for shape in SHAPES:
            pts = sample_shape(ShapeSpec(shape, n_points=10, seed=4))
            assert pts.shape == (10, 3)

    def test_bad_spec_rejected(self):
        with pytest.raises(ValueError):
            ShapeSpec("pyramid")
        with pytest.raises(ValueError):
            ShapeSpec("circle", n_points=0)
        with pytest.raises(ValueError):
            ShapeSpec("circle", noise_mu=-0.1)


class TestPerturb:
    def test_mu_zero_identity(self):
        pts = np.arange(12, dtype=float).reshape(4, 3)
        assert (perturb(pts, 0.0, seed=5) == pts).all()

    def test_displacement_norms_strictly_inside_range(self):
        pts = np.zeros((200, 3))
        moved = perturb(pts, 0.3, seed=6)
        norms = np.linalg.norm(moved, axis=1)
        assert (norms > 0).all() and (norms < 0.3).all()

    def test_reproducible(self):
        pts = np.random.default_rng(0).normal(size=(20, 3))
        assert (perturb(pts, 0.2, seed=7) == perturb(pts, 0.2, seed=7)).all()

    def test_direction_distribution_roughly_uniform(self):
        moved = perturb(np.zeros((4000, 3)), 1.0, seed=8)
        dirs = moved / np.linalg.norm(moved, axis=1)[:, None]
        assert np.abs(dirs.mean(axis=0)).max() < 0.05


class TestDataset:
    def test_counts_and_balance(self):
        entries = generate_shape_dataset(per_class=3, mu=0.1, seed=9, n_points=12)
        assert len(entries) == 15
        labels = [e.label for e in entries]
        for shape in SHAPES:
            assert labels.count(shape) == 3

    def test_per_class_one(self):
        assert len(generate_shape_dataset(1, 0.0, 0, n_points=5)) == 5

    def test_full_scale_counts(self):
        entries = generate_shape_dataset(per_class=200, mu=0.3, seed=7, n_points=5)
        assert len(entries) == 1000
        labels = [e.label for e in entries]
        assert all(labels.count(shape) == 200 for shape in SHAPES)

    def test_deterministic_across_runs(self):
        a = generate_shape_dataset(2, 0.2, seed=13, n_points=8)
        b = generate_shape_dataset(2, 0.2, seed=13, n_points=8)
        for ea, eb in zip(a, b):
            assert ea.label == eb.label and (ea.points == eb.points).all()

    def test_entries_independent_of_others(self):
        # entry seeds derive from (seed, index), so regenerating matches
        full = generate_shape_dataset(2, 0.2, seed=13, n_points=8)
        entry = full[7]
        spec = ShapeSpec(entry.label, n_points=8, noise_mu=0.2, seed=entry.seed)
        assert (sample_shape(spec) == entry.points).all()

    def test_ideal_diameters_comparable(self):
        for shape in SHAPES:
            assert 1.4 <= ideal_diameter(shape) <= 2.2

    def test_sampled_clouds_within_ideal_diameter(self):
        for shape in ("circle", "sphere", "torus", "uniform"):
            pts = sample_shape(ShapeSpec(shape, n_points=120, seed=21))
            dists = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
            assert dists.max() <= ideal_diameter(shape) + 1e-9


class TestManifest:
    def test_round_trip(self, tmp_path):
        entries = generate_shape_dataset(2, 0.1, seed=3, n_points=6)
        manifest = write_shape_dataset(
            tmp_path, entries, per_class=2, mu=0.1, seed=3, n_points=6
        )
        header, recs = read_manifest(manifest)
        assert header["per_class"] == "2"
        assert len(recs) == 10
        from phpipe.synth import load_entry_points

        pts = load_entry_points(recs[0])
        assert np.allclose(pts, entries[0].points)

    def test_manifest_byte_identical_across_runs(self, tmp_path):
        for sub in ("a", "b"):
            entries = generate_shape_dataset(2, 0.1, seed=3, n_points=6)
            write_shape_dataset(
                tmp_path / sub, entries, per_class=2, mu=0.1, seed=3, n_points=6
            )
        a = (tmp_path / "a" / "manifest.ini").read_bytes()
        b = (tmp_path / "b" / "manifest.ini").read_bytes()
        assert a == b
        ca = (tmp_path / "a" / "clouds" / "entry_0000.csv").read_bytes()
        cb = (tmp_path / "b" / "clouds" / "entry_0000.csv").read_bytes()
        assert ca == cb
