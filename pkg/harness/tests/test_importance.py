from __future__ import annotations

import numpy as np
import pytest
from sklearn.decomposition import PCA
from sklearn.ensemble import RandomForestClassifier
from sklearn.inspection import permutation_importance

from mlharness.importance import (
    feature_importance_experiment,
    pca_distance_check,
    reshape_by_layout,
    two_class_permutation_test,
    write_importance_report,
)
from mlharness.data import read_layout_sidecar
from mlharness.specfile import ExperimentSpec
from harness_support import write_feature_csv, write_sidecar


def make_classification_features(rng, n=240, informative_shift=2.5):
    """Two features carry the classes, the rest are noise."""
    y = np.array(["5", "7"] * (n // 2))
    X = rng.normal(size=(n, 8))
    X[y == "7", 0] += informative_shift
    X[y == "7", 1] -= informative_shift
    return X, y


def importance_spec(tmp_path, files, **kw):
    defaults = dict(
        task="classification", metric="accuracy", seed=0,
        pca_components=4, class_pair=("5", "7"),
        importance_repeats=10, mean_test_permutations=200,
        rf_estimators=80,
    )
    defaults.update(kw)
    return ExperimentSpec(feature_files=files, **defaults)


class TestExperiment:
    def test_noise_feature_has_near_zero_importance(self, tmp_path):
        rng = np.random.default_rng(0)
        X, y = make_classification_features(rng)
        path = write_feature_csv(tmp_path / "fr.csv", X, y)
        spec = importance_spec(tmp_path, {"fr": path}, pca_components=6)
        report = feature_importance_experiment(spec)
        rep = report.per_kind["fr"]
        # the two informative directions dominate; trailing PCs are noise
        top_two = np.sort(rep.importances_mean)[-2:].sum()
        assert top_two > 0.8 * rep.importances_mean.sum()
        assert rep.importances_mean.min() < 0.05

    def test_report_values_populated(self, tmp_path):
        rng = np.random.default_rng(1)
        X, y = make_classification_features(rng)
        fr = write_feature_csv(tmp_path / "fr.csv", X, y)
        l1 = write_feature_csv(tmp_path / "l1.csv", X + rng.normal(size=X.shape), y)
        spec = importance_spec(tmp_path, {"fr": fr, "l1": l1})
        report = feature_importance_experiment(spec)
        assert report.kinds == ("fr", "l1")
        assert report.n_components == 4
        assert report.top_pc_cosine is not None
        for rep in report.per_kind.values():
            assert 0 <= rep.accuracy <= 1
            assert rep.pair_accuracy is not None
            assert rep.diff_l2 and rep.diff_l2 > 0
            assert 0 < rep.pair_p_value <= 1
            assert len(rep.importances_mean) == 4

    def test_distinct_classes_give_small_p_value(self, tmp_path):
        rng = np.random.default_rng(2)
        X, y = make_classification_features(rng, informative_shift=4.0)
        path = write_feature_csv(tmp_path / "fr.csv", X, y)
        spec = importance_spec(tmp_path, {"fr": path},
                               mean_test_permutations=400)
        report = feature_importance_experiment(spec)
        assert report.per_kind["fr"].pair_p_value == pytest.approx(1 / 401)

    def test_k_exceeding_feature_count_rejected(self, tmp_path):
        rng = np.random.default_rng(3)
        X, y = make_classification_features(rng)
        path = write_feature_csv(tmp_path / "fr.csv", X, y)
        spec = importance_spec(tmp_path, {"fr": path}, pca_components=50)
        with pytest.raises(ValueError, match="exceeds"):
            feature_importance_experiment(spec)

    def test_auto_components_reach_90_percent(self, tmp_path):
        rng = np.random.default_rng(4)
        X, y = make_classification_features(rng)
        path = write_feature_csv(tmp_path / "fr.csv", X, y)
        spec = importance_spec(tmp_path, {"fr": path}, pca_components="auto")
        report = feature_importance_experiment(spec)
        assert report.per_kind["fr"].explained_variance_ratio.sum() >= 0.90

    def test_subsampling_keeps_strata_and_determinism(self, tmp_path):
        rng = np.random.default_rng(5)
        X, y = make_classification_features(rng, n=400)
        path = write_feature_csv(tmp_path / "fr.csv", X, y)
        spec = importance_spec(
            tmp_path, {"fr": path}, subsample_train=100, subsample_test=40
        )
        a = feature_importance_experiment(spec).per_kind["fr"]
        b = feature_importance_experiment(spec).per_kind["fr"]
        assert a.accuracy == b.accuracy
        assert (a.importances_mean == b.importances_mean).all()

    def test_mismatched_sidecars_rejected(self, tmp_path):
        rng = np.random.default_rng(6)
        X, y = make_classification_features(rng, n=60)
        fr = write_feature_csv(tmp_path / "fr.csv", X, y)
        l1 = write_feature_csv(tmp_path / "l1.csv", X, y)
        write_sidecar(tmp_path / "fr.layout.ini", [("img/0", 8)],
                      extra={"bandwidth": "0.1"})
        write_sidecar(tmp_path / "l1.layout.ini", [("img/0", 8)],
                      extra={"bandwidth": "0.5"})
        spec = importance_spec(tmp_path, {"fr": fr, "l1": l1})
        with pytest.raises(ValueError, match="differ"):
            feature_importance_experiment(spec)


class TestPermutationImportanceSemantics:
    def test_duplicated_feature_importance_splits_never_doubles(self):
        rng = np.random.default_rng(7)
        n = 400
        y = np.array(["a", "b"] * (n // 2))
        signal = np.where(y == "a", -1.5, 1.5) + rng.normal(0, 0.4, n)
        noise = rng.normal(size=(n, 2))

        def importance_of(X):
            model = RandomForestClassifier(n_estimators=120, random_state=0)
            model.fit(X[: n // 2], y[: n // 2])
            imp = permutation_importance(
                model, X[n // 2 :], y[n // 2 :], n_repeats=15, random_state=0
            )
            return imp.importances_mean

        solo = importance_of(np.column_stack([signal, noise]))
        dup = importance_of(np.column_stack([signal, signal, noise]))
        # combined importance stays at the solo level; duplication must not
        # inflate it, and neither copy may exceed the solo importance
        assert dup[0] + dup[1] < 1.2 * solo[0] + 0.05
        assert max(dup[0], dup[1]) <= solo[0] + 0.05


class TestPcaCheck:
    def test_projection_preserves_distances_within_bound(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(120, 20)) @ rng.normal(size=(20, 20))
        Xc = X - X.mean(axis=0)
        pca = PCA(n_components=10, random_state=0).fit(Xc)
        proj = pca.transform(Xc)
        pca_distance_check(Xc, pca, proj, np.random.default_rng(0))


class TestReshape:
    def test_reshape_round_trips_layout(self, tmp_path):
        side = write_sidecar(
            tmp_path / "x.layout.ini",
            [("sweep:N/0", 9), ("sweep:N/1", 9)],
            resolution=3,
        )
        layout = read_layout_sidecar(side)
        flat = np.arange(18, dtype=float)
        images = reshape_by_layout(flat, layout)
        assert images["sweep:N/0"].shape == (3, 3)
        assert images["sweep:N/1"][0, 0] == 9.0


class TestTwoClassTest:
    def test_identical_distributions_large_p(self):
        rng = np.random.default_rng(9)
        A = rng.normal(size=(60, 5))
        B = rng.normal(size=(60, 5))
        _, p = two_class_permutation_test(A, B, 300, seed=1)
        assert p > 0.05

    def test_report_writer_outputs(self, tmp_path):
        rng = np.random.default_rng(10)
        X, y = make_classification_features(rng)
        fr = write_feature_csv(tmp_path / "fr.csv", X, y)
        spec = importance_spec(tmp_path, {"fr": fr})
        report = feature_importance_experiment(spec)
        path = write_importance_report(report, tmp_path / "out")
        assert path.exists()
        assert (tmp_path / "out" / "importance.csv").exists()
        assert (tmp_path / "out" / "accuracies.csv").exists()
        assert (tmp_path / "out" / "arrays.npz").exists()
