"""Fixed-length feature vectors from diagrams.

Two vectorizers: persistence images (weighted Gaussian mass integrated over a
birth-persistence grid) and the four polynomial diagram coordinates. Entry
vectors concatenate per-diagram vectors in (source, degree) order and clamp
anything beyond the 32-bit float range.

Points are summed in sorted order everywhere, so outputs are bit-identical
under any permutation of a diagram's points.
"""

from __future__ import annotations

import configparser
import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .diagrams import Diagram

F32_MAX = float(np.finfo(np.float32).max)


@dataclass(frozen=True)
class PIConfig:
    """Persistence-image grid: `resolution` pixels per axis, Gaussian width
    `bandwidth` in filtration units, and the birth/persistence windows.

    weight "linear" scales each point by persistence / p_max (p_max taken
    from the diagram unless pinned here); "constant" weighs every point 1.
    """

    resolution: int = 10
    bandwidth: float = 0.1
    birth_range: tuple[float, float] = (0.0, 1.0)
    persistence_range: tuple[float, float] = (0.0, 1.0)
    weight: str = "linear"
    p_max: float | None = None

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError("resolution must be >= 1")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        for lo, hi in (self.birth_range, self.persistence_range):
            if not hi > lo:
                raise ValueError("ranges must be non-degenerate")
        if self.weight not in ("linear", "constant"):
            raise ValueError("weight must be 'linear' or 'constant'")

    @property
    def length(self) -> int:
        return self.resolution * self.resolution


@dataclass(frozen=True)
class ACConfig:
    """Polynomial coordinates config; d_max=None means per-diagram max death."""

    d_max: float | None = None

    @property
    def length(self) -> int:
        return 4


@dataclass(frozen=True)
class LayoutSlot:
    source: str
    degree: int
    method: str
    length: int
    offset: int


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    layout: tuple[LayoutSlot, ...]
    n_clamped: int = 0

    def __len__(self) -> int:
        return len(self.values)


def _sorted_births_deaths(diagram: Diagram) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted(diagram.points)
    b = np.array([p[0] for p in pts], dtype=float)
    d = np.array([p[1] for p in pts], dtype=float)
    return b, d


def persistence_image(diagram: Diagram, cfg: PIConfig) -> np.ndarray:
    """Grid of weighted Gaussian masses in birth-persistence coordinates.

    Each pixel gets the exact Gaussian mass over its box, computed as the
    product of per-axis CDF differences (not center sampling). Flattened
    row-major with persistence bins as rows.
    """
    res = cfg.resolution
    if not diagram.points:
        return np.zeros(res * res)
    b, d = _sorted_births_deaths(diagram)
    if not (np.isfinite(b).all() and np.isfinite(d).all()):
        raise ValueError("diagram has non-finite points")
    p = d - b
    if cfg.weight == "linear":
        p_max = cfg.p_max if cfg.p_max is not None else float(p.max())
        if p_max <= 0:
            p_max = 1.0
        w = p / p_max
    else:
        w = np.ones_like(p)
    edges_b = np.linspace(cfg.birth_range[0], cfg.birth_range[1], res + 1)
    edges_p = np.linspace(cfg.persistence_range[0], cfg.persistence_range[1], res + 1)
    cdf_b = ndtr((edges_b[None, :] - b[:, None]) / cfg.bandwidth)
    cdf_p = ndtr((edges_p[None, :] - p[:, None]) / cfg.bandwidth)
    mass_b = np.diff(cdf_b, axis=1)
    mass_p = np.diff(cdf_p, axis=1)
    grid = np.einsum("k,ki,kj->ij", w, mass_p, mass_b)
    return grid.reshape(-1)


def adcock_carlsson(diagram: Diagram, d_max: float | None = None) -> np.ndarray:
    """The four polynomial diagram coordinates, in fixed order:

    sum b*(d-b), sum (d_max-d)*(d-b), sum b^2*(d-b)^4, sum (d_max-d)^2*(d-b)^4
    """
    if not diagram.points:
        return np.zeros(4)
    b, d = _sorted_births_deaths(diagram)
    if not (np.isfinite(b).all() and np.isfinite(d).all()):
        raise ValueError("diagram has non-finite points")
    top = float(d.max())
    if d_max is None:
        d_max = top
    elif d_max < top:
        raise ValueError(f"d_max {d_max} below max death {top}")
    p = d - b
    slack = d_max - d
    return np.array(
        [
            np.sum(b * p),
            np.sum(slack * p),
            np.sum(b**2 * p**4),
            np.sum(slack**2 * p**4),
        ]
    )


def clamp_overflow(values) -> np.ndarray:
    """Replace entries beyond the largest finite 32-bit float, sign-preserving."""
    arr = np.asarray(values, dtype=float)
    if np.isnan(arr).any():
        raise ValueError("NaN in feature vector")
    return np.clip(arr, -F32_MAX, F32_MAX)


def vectorize_entry(diagrams, configs) -> FeatureVector:
    """Concatenate per-diagram vectors in (source, degree) order and clamp.

    `configs` maps (source, degree) keys to a PIConfig or ACConfig; a missing
    or duplicate key is an error so train/test layouts always align.
    """
    by_key: dict[tuple[str, int], Diagram] = {}
    for dg in diagrams:
        key = (dg.source, dg.degree)
        if key in by_key:
            raise ValueError(f"duplicate diagram key {key[0]}/{key[1]}")
        by_key[key] = dg
    parts: list[np.ndarray] = []
    layout: list[LayoutSlot] = []
    offset = 0
    for key in sorted(by_key):
        cfg = configs.get(key)
        if cfg is None:
            raise ValueError(f"missing vectorizer config for {key[0]}/{key[1]}")
        if isinstance(cfg, PIConfig):
            vec, method = persistence_image(by_key[key], cfg), "pi"
        elif isinstance(cfg, ACConfig):
            vec, method = adcock_carlsson(by_key[key], cfg.d_max), "ac"
        else:
            raise TypeError(f"unsupported config type {type(cfg)!r}")
        layout.append(
            LayoutSlot(
                source=key[0], degree=key[1], method=method,
                length=len(vec), offset=offset,
            )
        )
        parts.append(vec)
        offset += len(vec)
    raw = np.concatenate(parts) if parts else np.zeros(0)
    n_clamped = int(np.count_nonzero(np.abs(raw) > F32_MAX))
    return FeatureVector(
        values=clamp_overflow(raw), layout=tuple(layout), n_clamped=n_clamped
    )


# ---------------------------------------------------------------------------
# Feature matrix CSV + layout sidecar
# ---------------------------------------------------------------------------


def write_feature_csv(path, vectors, labels) -> None:
    """One row per entry, features then a trailing label column."""
    vectors = list(vectors)
    labels = list(labels)
    if len(vectors) != len(labels):
        raise ValueError("one label per feature vector required")
    if not vectors:
        raise ValueError("no feature vectors to write")
    layout = vectors[0].layout
    for i, fv in enumerate(vectors):
        if fv.layout != layout:
            raise ValueError(f"layout mismatch between entries 0 and {i}")
    width = len(vectors[0].values)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(width)] + ["label"])
        for fv, label in zip(vectors, labels):
            writer.writerow([repr(float(x)) for x in fv.values] + [label])


def read_feature_csv(path) -> tuple[np.ndarray, list[str]]:
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
    return np.array(rows, dtype=float), labels


def _key_name(slot: LayoutSlot) -> str:
    return f"{slot.source}/{slot.degree}"


def write_layout_sidecar(path, layout, configs, *, n_entries: int, clamp_count: int) -> None:
    """Record the concatenation layout and per-diagram hyperparameters."""
    parser = configparser.ConfigParser()
    parser["features"] = {
        "n_entries": str(n_entries),
        "n_features": str(sum(s.length for s in layout)),
        "clamp_count": str(clamp_count),
        "keys": ",".join(_key_name(s) for s in layout),
    }
    for slot in layout:
        section = f"key:{_key_name(slot)}"
        cfg = configs[(slot.source, slot.degree)]
        entries = {
            "method": slot.method,
            "offset": str(slot.offset),
            "length": str(slot.length),
        }
        if isinstance(cfg, PIConfig):
            entries.update(
                resolution=str(cfg.resolution),
                bandwidth=repr(cfg.bandwidth),
                birth_min=repr(cfg.birth_range[0]),
                birth_max=repr(cfg.birth_range[1]),
                pers_min=repr(cfg.persistence_range[0]),
                pers_max=repr(cfg.persistence_range[1]),
                weight=cfg.weight,
            )
            if cfg.p_max is not None:
                entries["p_max"] = repr(cfg.p_max)
        else:
            entries["d_max"] = "auto" if cfg.d_max is None else repr(cfg.d_max)
        parser[section] = entries
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)
