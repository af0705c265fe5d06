"""Cross-validated random-forest experiments per diagram kind.

Fold assignment is a pure function of the labels and the seed and is shared
across kinds, so per-kind scores are directly comparable. Random-forest
hyperparameters stay at fixed defaults (recorded in the report); an optional
small max_depth grid can be enabled, selected by out-of-bag score.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.ensemble import RandomForestClassifier, RandomForestRegressor
from sklearn.metrics import accuracy_score, average_precision_score, r2_score
from sklearn.model_selection import KFold, StratifiedKFold

from .data import read_feature_csv
from .specfile import ExperimentSpec


@dataclass(frozen=True)
class CvResult:
    kind: str
    metric: str
    fold_scores: tuple[float, ...]
    mean: float
    std: float
    model_params: dict = field(compare=False, default_factory=dict)


def make_folds(y: np.ndarray, n_folds: int, seed: int, task: str):
    """Seeded fold assignment; reshuffles once if a train fold is degenerate.

    Returns (folds, reshuffled). Degenerate means a training fold carrying a
    single class, which a forest cannot be fit on.
    """

    def build(s):
        if task == "classification":
            try:
                splitter = StratifiedKFold(n_splits=n_folds, shuffle=True,
                                           random_state=s)
                return list(splitter.split(np.zeros(len(y)), y))
            except ValueError:
                pass
        splitter = KFold(n_splits=n_folds, shuffle=True, random_state=s)
        return list(splitter.split(np.zeros(len(y))))

    def degenerate(folds):
        if task != "classification":
            return False
        return any(len(np.unique(y[train])) < 2 for train, _ in folds)

    folds = build(seed)
    if not degenerate(folds):
        return folds, False
    folds = build(seed + 1)
    if degenerate(folds):
        raise ValueError("labels too degenerate to form usable folds")
    return folds, True


def _make_model(spec: ExperimentSpec, X_train, y_train, seed: int):
    cls = (
        RandomForestClassifier if spec.task == "classification" else RandomForestRegressor
    )
    depth = None
    if spec.rf_grid_depths:
        best = -np.inf
        for cand in spec.rf_grid_depths:
            probe = cls(
                n_estimators=spec.rf_estimators, max_depth=cand,
                oob_score=True, random_state=seed,
            ).fit(X_train, y_train)
            if probe.oob_score_ > best:
                best, depth = probe.oob_score_, cand
    model = cls(n_estimators=spec.rf_estimators, max_depth=depth, random_state=seed)
    return model.fit(X_train, y_train)


def score_model(model, X, y, metric: str) -> float:
    if metric == "r2":
        return float(r2_score(y, model.predict(X)))
    if metric == "accuracy":
        return float(accuracy_score(y, model.predict(X)))
    # macro average precision, one-vs-rest over the model's class order
    proba = model.predict_proba(X)
    scores = []
    for c, cls in enumerate(model.classes_):
        mask = (y == cls).astype(int)
        if mask.sum() == 0:
            continue
        scores.append(average_precision_score(mask, proba[:, c]))
    return float(np.mean(scores))


def run_cv_experiment(spec: ExperimentSpec) -> dict[str, CvResult]:
    """Train one forest per fold and kind; returns per-kind score summaries."""
    data = {}
    for kind, path in spec.feature_files.items():
        X, labels = read_feature_csv(path)
        y = labels.astype(float) if spec.task == "regression" else labels
        data[kind] = (X, y)
    ref_kind = next(iter(data))
    y_ref = data[ref_kind][1]
    for kind, (X, y) in data.items():
        if len(y) != len(y_ref):
            raise ValueError(f"feature files disagree on entry count ({kind})")
        if spec.task == "classification" and not (y == y_ref).all():
            raise ValueError(f"labels differ between {ref_kind} and {kind}")

    folds, reshuffled = make_folds(y_ref, spec.folds, spec.seed, spec.task)
    if reshuffled:
        print("note: degenerate fold detected, folds reshuffled once")

    results = {}
    for kind, (X, y) in data.items():
        scores = []
        params = {}
        for train, test in folds:
            model = _make_model(spec, X[train], y[train], spec.seed)
            scores.append(score_model(model, X[test], y[test], spec.metric))
            params = model.get_params()
        results[kind] = CvResult(
            kind=kind,
            metric=spec.metric,
            fold_scores=tuple(scores),
            mean=statistics.fmean(scores),
            std=statistics.pstdev(scores) if len(scores) > 1 else 0.0,
            model_params=params,
        )
    return results


def write_cv_report(results: dict[str, CvResult], spec: ExperimentSpec, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "metrics.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "fold", "score"])
        for kind, res in results.items():
            for i, s in enumerate(res.fold_scores):
                writer.writerow([kind, i, repr(s)])
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "metric", "mean", "std"])
        for kind, res in results.items():
            writer.writerow([kind, res.metric, repr(res.mean), repr(res.std)])
    report = out / "report.txt"
    with open(report, "w", encoding="utf-8") as fh:
        fh.write(f"experiment: {spec.name}\n")
        fh.write(f"task: {spec.task}   metric: {spec.metric} (macro over classes)\n")
        fh.write(f"folds: {spec.folds}   seed: {spec.seed}\n")
        for kind, res in results.items():
            fh.write(f"{kind}: {res.mean:.4f} +- {res.std:.4f} {res.fold_scores}\n")
        any_res = next(iter(results.values()))
        fh.write("\nrandom forest parameters (recorded for reproducibility):\n")
        for key in sorted(any_res.model_params):
            fh.write(f"  {key} = {any_res.model_params[key]}\n")
    return report
