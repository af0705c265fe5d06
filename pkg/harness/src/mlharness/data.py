"""Readers for the pipeline's feature-matrix contract.

The harness talks to the diagram pipeline exclusively through its files: a
feature CSV (one row per entry, trailing `label` column) and its
`.layout.ini` sidecar describing how per-diagram vectors were concatenated.
"""

from __future__ import annotations

import configparser
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class LayoutKey:
    """One concatenated segment: `key` is "<source>/<degree>"."""

    key: str
    method: str
    offset: int
    length: int
    resolution: int | None
    params: dict

    @property
    def source(self) -> str:
        return self.key.rpartition("/")[0]

    @property
    def degree(self) -> int:
        return int(self.key.rpartition("/")[2])


def read_feature_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrix plus labels (as a string array)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1] != "label":
            raise ValueError(f"{path}: expected a trailing label column")
        rows, labels = [], []
        for row in reader:
            if not row:
                continue
            rows.append([float(x) for x in row[:-1]])
            labels.append(row[-1])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float), np.asarray(labels)


def sidecar_path(features_path) -> Path:
    p = Path(features_path)
    return p.with_name(p.stem + ".layout.ini")


def read_layout_sidecar(path) -> list[LayoutKey]:
    parser = configparser.ConfigParser()
    if not parser.read(path, encoding="utf-8"):
        raise ValueError(f"cannot read layout sidecar {path}")
    keys = []
    for section in parser.sections():
        if not section.startswith("key:"):
            continue
        sec = parser[section]
        keys.append(
            LayoutKey(
                key=section.split(":", 1)[1],
                method=sec.get("method", "pi"),
                offset=int(sec["offset"]),
                length=int(sec["length"]),
                resolution=int(sec["resolution"]) if "resolution" in sec else None,
                params={
                    k: v
                    for k, v in sec.items()
                    if k not in ("method", "offset", "length")
                },
            )
        )
    keys.sort(key=lambda k: k.offset)
    if not keys:
        raise ValueError(f"{path}: sidecar lists no keys")
    return keys


def check_layouts_identical(paths: dict[str, Path]) -> list[LayoutKey] | None:
    """Verify every kind was vectorized with identical hyperparameters.

    Returns the shared layout, or None when no sidecars exist (features not
    produced by the pipeline); mismatching sidecars are an error.
    """
    layouts = {}
    for kind, path in paths.items():
        side = sidecar_path(path)
        if side.exists():
            layouts[kind] = read_layout_sidecar(side)
    if not layouts:
        return None
    first_kind, first = next(iter(layouts.items()))
    for kind, layout in layouts.items():
        if [(k.key, k.method, k.length, k.params) for k in layout] != [
            (k.key, k.method, k.length, k.params) for k in first
        ]:
            raise ValueError(
                f"vectorization hyperparameters differ between {first_kind} and {kind}"
            )
    return first


def stratified_subsample(y: np.ndarray, n: int, seed: int) -> np.ndarray:
    """Indices of a label-balanced subsample of size ~n, seeded."""
    if n >= len(y):
        return np.arange(len(y))
    rng = np.random.default_rng(seed)
    classes, counts = np.unique(y, return_counts=True)
    fractions = n / len(y)
    picked = []
    for cls in classes:
        idx = np.nonzero(y == cls)[0]
        take = max(1, int(round(len(idx) * fractions)))
        picked.append(rng.choice(idx, size=min(take, len(idx)), replace=False))
    out = np.sort(np.concatenate(picked))
    return out
