"""Experiment spec files: one INI per experiment.

[experiment] holds the protocol knobs, [features] maps diagram kinds to the
pipeline's feature CSVs. Example:

    [experiment]
    task = classification
    metric = average_precision
    folds = 5
    seed = 0

    [features]
    fr = out/features_fr.csv
    l1 = out/features_l1.csv
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

TASKS = ("classification", "regression")
METRICS = ("average_precision", "accuracy", "r2")


@dataclass(frozen=True)
class ExperimentSpec:
    feature_files: dict[str, Path]
    task: str = "classification"
    metric: str = "average_precision"
    folds: int = 5
    seed: int = 0
    pca_components: int | str | None = None  # int, "auto" (90% variance), None=off
    class_pair: tuple[str, str] | None = None
    test_fraction: float = 0.2
    importance_repeats: int = 10
    mean_test_permutations: int = 10000
    subsample_train: int | None = None
    subsample_test: int | None = None
    rf_estimators: int = 200
    rf_grid_depths: tuple[int, ...] = ()
    name: str = "experiment"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.task == "regression" and self.metric != "r2":
            raise ValueError("regression experiments use the r2 metric")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if not self.feature_files:
            raise ValueError("at least one feature file required")
        if not 0 < self.test_fraction < 1:
            raise ValueError("test_fraction must be in (0, 1)")
        if self.importance_repeats < 1:
            raise ValueError("importance_repeats must be >= 1")


def _opt_int(sec, key):
    raw = sec.get(key, "").strip()
    return int(raw) if raw and raw != "0" else None


def load_spec(path) -> ExperimentSpec:
    parser = configparser.ConfigParser()
    if not parser.read(path, encoding="utf-8"):
        raise ValueError(f"cannot read spec file {path}")
    if "features" not in parser or not parser["features"]:
        raise ValueError(f"{path}: missing [features] section")
    base = Path(path).parent
    features = {
        kind: (base / file).resolve() if not Path(file).is_absolute() else Path(file)
        for kind, file in parser["features"].items()
    }
    for kind, file in features.items():
        if not file.exists():
            raise ValueError(f"{path}: feature file for {kind!r} not found: {file}")
    exp = parser["experiment"] if "experiment" in parser else {}
    pca_raw = str(exp.get("pca_components", "")).strip()
    if pca_raw in ("", "off", "0"):
        pca: int | str | None = None
    elif pca_raw == "auto":
        pca = "auto"
    else:
        pca = int(pca_raw)
    pair_raw = str(exp.get("class_pair", "")).strip()
    pair = tuple(p.strip() for p in pair_raw.split(",")) if pair_raw else None
    if pair is not None and len(pair) != 2:
        raise ValueError(f"{path}: class_pair must name exactly two classes")
    grid_raw = str(exp.get("rf_grid_depths", "")).strip()
    grid = tuple(int(d) for d in grid_raw.split(",") if d.strip()) if grid_raw else ()
    return ExperimentSpec(
        feature_files=features,
        task=exp.get("task", "classification"),
        metric=exp.get("metric", "average_precision"),
        folds=int(exp.get("folds", 5)),
        seed=int(exp.get("seed", 0)),
        pca_components=pca,
        class_pair=pair,
        test_fraction=float(exp.get("test_fraction", 0.2)),
        importance_repeats=int(exp.get("importance_repeats", 10)),
        mean_test_permutations=int(exp.get("mean_test_permutations", 10000)),
        subsample_train=_opt_int(exp, "subsample_train"),
        subsample_test=_opt_int(exp, "subsample_test"),
        rf_estimators=int(exp.get("rf_estimators", 200)),
        rf_grid_depths=grid,
        name=exp.get("name", Path(path).stem),
    )
