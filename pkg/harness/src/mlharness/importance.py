"""Feature-importance comparison between diagram kinds on image features.

Protocol per kind: seeded 80/20 split (shared entry indices across kinds),
mean-center and scale by per-feature train std, project onto the leading
principal components of the training data, train a random forest, then
measure permutation importance of each projected component on the full test
set. The report also carries the per-key class-average difference images for
a chosen class pair, their L2 norms, a permutation test on the class-mean
separation, and the most important component's weights reshaped into
per-key images.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.decomposition import PCA
from sklearn.ensemble import RandomForestClassifier
from sklearn.inspection import permutation_importance
from sklearn.metrics import accuracy_score
from sklearn.model_selection import train_test_split
from sklearn.preprocessing import StandardScaler

from .data import (
    LayoutKey,
    check_layouts_identical,
    read_feature_csv,
    stratified_subsample,
)
from .specfile import ExperimentSpec


@dataclass
class KindReport:
    kind: str
    accuracy: float
    pair_accuracy: float | None
    importances_mean: np.ndarray
    importances_std: np.ndarray
    top_component: int
    top_component_weights: np.ndarray
    diff_image_flat: np.ndarray | None
    diff_l2: float | None
    pair_p_value: float | None
    explained_variance_ratio: np.ndarray
    model_params: dict = field(default_factory=dict)


@dataclass
class ImportanceReport:
    kinds: tuple[str, ...]
    n_components: int
    layout: list[LayoutKey] | None
    per_kind: dict[str, KindReport]
    top_pc_cosine: float | None


def pca_distance_check(X_centered: np.ndarray, pca: PCA, projected: np.ndarray,
                       rng: np.random.Generator, n_pairs: int = 200) -> None:
    """Projection never stretches distances, and the average squared loss is
    bounded by the variance the discarded components carry."""
    n = len(X_centered)
    if n < 2:
        return
    i = rng.integers(0, n, n_pairs)
    j = rng.integers(0, n, n_pairs)
    keep = i != j
    i, j = i[keep], j[keep]
    d_orig = np.linalg.norm(X_centered[i] - X_centered[j], axis=1)
    d_proj = np.linalg.norm(projected[i] - projected[j], axis=1)
    if not (d_proj <= d_orig + 1e-8).all():
        raise AssertionError("PCA projection increased a pairwise distance")
    discarded = float(X_centered.var(axis=0, ddof=1).sum()) - float(
        pca.explained_variance_[: pca.n_components_].sum()
    )
    mean_gap = float(np.mean(d_orig**2 - d_proj**2))
    if mean_gap > 2.5 * max(discarded, 0.0) + 1e-6:
        raise AssertionError("PCA distance loss exceeds the discarded variance bound")


def _components_for(spec: ExperimentSpec, scaled_train_by_kind: dict[str, np.ndarray]) -> int:
    """Component count: explicit, or the minimum reaching 90% of the first
    kind's training variance ("auto"); default 13."""
    if isinstance(spec.pca_components, int):
        return spec.pca_components
    ref_kind = "fr" if "fr" in scaled_train_by_kind else next(iter(scaled_train_by_kind))
    X = scaled_train_by_kind[ref_kind]
    limit = min(X.shape)
    if spec.pca_components == "auto":
        probe = PCA(n_components=limit, random_state=spec.seed).fit(X)
        cum = np.cumsum(probe.explained_variance_ratio_)
        return int(np.searchsorted(cum, 0.90) + 1)
    return min(13, limit)


def two_class_permutation_test(A: np.ndarray, B: np.ndarray, n_perm: int,
                               seed: int) -> tuple[float, float]:
    """Permutation test for distinct class means; statistic is the L2 norm of
    the mean difference. Returns (observed statistic, p-value)."""
    observed = float(np.linalg.norm(A.mean(axis=0) - B.mean(axis=0)))
    pooled = np.vstack([A, B])
    n_a = len(A)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(n_perm):
        perm = rng.permutation(len(pooled))
        pa, pb = pooled[perm[:n_a]], pooled[perm[n_a:]]
        stat = float(np.linalg.norm(pa.mean(axis=0) - pb.mean(axis=0)))
        if stat >= observed:
            hits += 1
    return observed, (1 + hits) / (n_perm + 1)


def feature_importance_experiment(spec: ExperimentSpec) -> ImportanceReport:
    if spec.task != "classification":
        raise ValueError("the importance experiment is a classification protocol")
    layout = check_layouts_identical(spec.feature_files)

    loaded = {}
    for kind, path in spec.feature_files.items():
        X, y = read_feature_csv(path)
        loaded[kind] = (X, y)
    kinds = tuple(loaded)
    ref_y = loaded[kinds[0]][1]
    for kind, (X, y) in loaded.items():
        if not (y == ref_y).all():
            raise ValueError(f"labels differ between {kinds[0]} and {kind}")

    idx_all = np.arange(len(ref_y))
    train_idx, test_idx = train_test_split(
        idx_all, test_size=spec.test_fraction, random_state=spec.seed,
        stratify=ref_y,
    )
    if spec.subsample_train is not None:
        sub = stratified_subsample(ref_y[train_idx], spec.subsample_train, spec.seed)
        train_idx = train_idx[sub]
    if spec.subsample_test is not None:
        sub = stratified_subsample(ref_y[test_idx], spec.subsample_test, spec.seed + 1)
        test_idx = test_idx[sub]

    scalers, scaled_train, scaled_test = {}, {}, {}
    for kind, (X, y) in loaded.items():
        scaler = StandardScaler().fit(X[train_idx])
        scalers[kind] = scaler
        scaled_train[kind] = scaler.transform(X[train_idx])
        scaled_test[kind] = scaler.transform(X[test_idx])

    n_components = _components_for(spec, scaled_train)
    width = next(iter(scaled_train.values())).shape[1]
    if n_components > width:
        raise ValueError(
            f"pca_components {n_components} exceeds feature count {width}"
        )
    if n_components > len(train_idx):
        raise ValueError("pca_components exceeds the number of training entries")

    y_train, y_test = ref_y[train_idx], ref_y[test_idx]
    per_kind: dict[str, KindReport] = {}
    rng = np.random.default_rng(spec.seed)
    for kind in kinds:
        pca = PCA(n_components=n_components, random_state=spec.seed)
        proj_train = pca.fit_transform(scaled_train[kind])
        pca_distance_check(
            scaled_train[kind] - scaled_train[kind].mean(axis=0), pca, proj_train, rng
        )
        proj_test = pca.transform(scaled_test[kind])
        model = RandomForestClassifier(
            n_estimators=spec.rf_estimators, random_state=spec.seed
        ).fit(proj_train, y_train)
        acc = float(accuracy_score(y_test, model.predict(proj_test)))

        pair_acc = None
        diff_flat = None
        diff_l2 = None
        p_value = None
        if spec.class_pair is not None:
            a, b = spec.class_pair
            mask = (y_test == a) | (y_test == b)
            if not mask.any():
                raise ValueError(f"class pair {spec.class_pair} absent from test data")
            pair_acc = float(
                accuracy_score(y_test[mask], model.predict(proj_test[mask]))
            )
            A = scaled_test[kind][y_test == a]
            B = scaled_test[kind][y_test == b]
            diff_flat = B.mean(axis=0) - A.mean(axis=0)
            diff_l2, p_value = two_class_permutation_test(
                A, B, spec.mean_test_permutations, spec.seed
            )

        imp = permutation_importance(
            model, proj_test, y_test,
            n_repeats=spec.importance_repeats, random_state=spec.seed,
        )
        top = int(np.argmax(imp.importances_mean))
        per_kind[kind] = KindReport(
            kind=kind,
            accuracy=acc,
            pair_accuracy=pair_acc,
            importances_mean=imp.importances_mean,
            importances_std=imp.importances_std,
            top_component=top,
            top_component_weights=pca.components_[top],
            diff_image_flat=diff_flat,
            diff_l2=diff_l2,
            pair_p_value=p_value,
            explained_variance_ratio=pca.explained_variance_ratio_,
            model_params=model.get_params(),
        )

    cosine = None
    if len(kinds) >= 2:
        u = per_kind[kinds[0]].top_component_weights
        v = per_kind[kinds[1]].top_component_weights
        cosine = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return ImportanceReport(
        kinds=kinds,
        n_components=n_components,
        layout=layout,
        per_kind=per_kind,
        top_pc_cosine=cosine,
    )


def reshape_by_layout(flat: np.ndarray, layout: list[LayoutKey]) -> dict[str, np.ndarray]:
    """Split a concatenated vector back into per-key images (or 1-D segments
    for non-square methods)."""
    out = {}
    for key in layout:
        seg = flat[key.offset : key.offset + key.length]
        if key.resolution is not None and key.resolution**2 == key.length:
            seg = seg.reshape(key.resolution, key.resolution)
        out[key.key] = seg
    return out


def write_importance_report(report: ImportanceReport, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "importance.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "component", "importance_mean", "importance_std"])
        for kind, rep in report.per_kind.items():
            for c in range(len(rep.importances_mean)):
                writer.writerow(
                    [kind, c, repr(float(rep.importances_mean[c])),
                     repr(float(rep.importances_std[c]))]
                )
    with open(out / "accuracies.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "accuracy", "pair_accuracy", "diff_l2", "p_value"])
        for kind, rep in report.per_kind.items():
            writer.writerow([
                kind, repr(rep.accuracy),
                "" if rep.pair_accuracy is None else repr(rep.pair_accuracy),
                "" if rep.diff_l2 is None else repr(rep.diff_l2),
                "" if rep.pair_p_value is None else repr(rep.pair_p_value),
            ])

    arrays = {}
    for kind, rep in report.per_kind.items():
        arrays[f"pc_weights__{kind}"] = rep.top_component_weights
        if rep.diff_image_flat is not None:
            arrays[f"diff__{kind}"] = rep.diff_image_flat
        if report.layout is not None:
            for name, img in reshape_by_layout(
                rep.top_component_weights, report.layout
            ).items():
                arrays[f"pcimg__{kind}__{name.replace('/', '_')}"] = img
            if rep.diff_image_flat is not None:
                for name, img in reshape_by_layout(
                    rep.diff_image_flat, report.layout
                ).items():
                    arrays[f"diffimg__{kind}__{name.replace('/', '_')}"] = img
    np.savez(out / "arrays.npz", **arrays)

    path = out / "report.txt"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"kinds: {','.join(report.kinds)}\n")
        fh.write(f"pca components: {report.n_components}\n")
        if report.top_pc_cosine is not None:
            fh.write(f"cosine(top PCs): {report.top_pc_cosine:.3f}\n")
        ratios = [r.diff_l2 for r in report.per_kind.values() if r.diff_l2]
        if len(ratios) == 2 and ratios[0]:
            fh.write(f"diff L2 ratio ({report.kinds[1]}/{report.kinds[0]}): "
                     f"{ratios[1] / ratios[0]:.2f}\n")
        for kind, rep in report.per_kind.items():
            fh.write(f"\n[{kind}]\n")
            fh.write(f"accuracy: {rep.accuracy:.4f}\n")
            if rep.pair_accuracy is not None:
                fh.write(f"pair accuracy: {rep.pair_accuracy:.4f}\n")
            if rep.diff_l2 is not None:
                fh.write(f"class diff L2: {rep.diff_l2:.4f}  "
                         f"p-value: {rep.pair_p_value:.6g}\n")
            fh.write(f"top component: PC{rep.top_component + 1}\n")
            fh.write("importances: "
                     + " ".join(f"{v:.4f}" for v in rep.importances_mean) + "\n")
            fh.write(f"explained variance: "
                     + " ".join(f"{v:.3f}" for v in rep.explained_variance_ratio)
                     + "\n")
    return path
