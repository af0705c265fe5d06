"""Seeded synthetic point-cloud dataset: five labeled shapes in R^3.

The shape scales are chosen so every ideal shape has diameter close to 2
(circle and sphere radius 1, torus radii 0.7/0.3, cluster centers at +-0.9 on
the x axis, uniform cube with half-side 1/sqrt(3)), keeping the classes
geometrically comparable. All randomness is derived from integer seeds via
SeedSequence, so datasets are pure functions of their arguments.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .builders import load_point_cloud, save_point_cloud

SHAPES = ("circle", "two_clusters", "uniform", "sphere", "torus")

TORUS_R = 0.7
TORUS_r = 0.3
CLUSTER_OFFSET = 0.9
CLUSTER_SIGMA = 0.1
UNIFORM_HALF_SIDE = 3**-0.5  # cube diameter 2


@dataclass(frozen=True)
class ShapeSpec:
    shape: str
    n_points: int = 50
    noise_mu: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if self.noise_mu < 0:
            raise ValueError("noise_mu must be >= 0")


@dataclass(frozen=True)
class DatasetEntry:
    index: int
    label: str
    seed: int
    points: np.ndarray


def ideal_diameter(shape: str) -> float:
    """Largest distance between points of the ideal (noise-free) shape."""
    return {
        "circle": 2.0,
        "two_clusters": 2 * CLUSTER_OFFSET,
        "uniform": 2 * 3**0.5 * UNIFORM_HALF_SIDE,
        "sphere": 2.0,
        "torus": 2 * (TORUS_R + TORUS_r),
    }[shape]


def _derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _ideal_sample(shape: str, n: int, rng: np.random.Generator) -> np.ndarray:
    if shape == "circle":
        theta = rng.uniform(0.0, 2 * np.pi, n)
        return np.column_stack([np.cos(theta), np.sin(theta), np.zeros(n)])
    if shape == "two_clusters":
        half = n // 2
        centers = np.repeat(
            [[-CLUSTER_OFFSET, 0.0, 0.0], [CLUSTER_OFFSET, 0.0, 0.0]],
            [half, n - half],
            axis=0,
        )
        return centers + rng.normal(0.0, CLUSTER_SIGMA, (n, 3))
    if shape == "uniform":
        return rng.uniform(-UNIFORM_HALF_SIDE, UNIFORM_HALF_SIDE, (n, 3))
    if shape == "sphere":
        v = rng.normal(size=(n, 3))
        while True:
            norms = np.linalg.norm(v, axis=1)
            bad = norms == 0
            if not bad.any():
                break
            v[bad] = rng.normal(size=(int(bad.sum()), 3))
        return v / norms[:, None]
    theta = rng.uniform(0.0, 2 * np.pi, n)
    phi = rng.uniform(0.0, 2 * np.pi, n)
    ring = TORUS_R + TORUS_r * np.cos(phi)
    return np.column_stack(
        [ring * np.cos(theta), ring * np.sin(theta), TORUS_r * np.sin(phi)]
    )


def perturb(cloud, mu: float, seed: int) -> np.ndarray:
    """Displace each point along a uniform random direction by Uniform(0, mu).

    Directions come from normalized 3-D Gaussians (exactly uniform on the
    sphere); zero draws are rejected, so displacement norms are strictly
    inside (0, mu). mu=0 is the identity.
    """
    pts = np.asarray(cloud, dtype=float)
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if mu == 0:
        return pts.copy()
    rng = np.random.default_rng(seed)
    n, d = pts.shape
    dirs = rng.normal(size=(n, d))
    while True:
        norms = np.linalg.norm(dirs, axis=1)
        bad = norms == 0
        if not bad.any():
            break
        dirs[bad] = rng.normal(size=(int(bad.sum()), d))
    mags = rng.uniform(0.0, mu, n)
    while True:
        bad = mags == 0
        if not bad.any():
            break
        mags[bad] = rng.uniform(0.0, mu, int(bad.sum()))
    return pts + dirs / norms[:, None] * mags[:, None]


def sample_shape(spec: ShapeSpec) -> np.ndarray:
    """Sample a cloud on the ideal shape, then apply the spec's noise."""
    placement_rng = np.random.default_rng(_derive_seed(spec.seed, 0))
    pts = _ideal_sample(spec.shape, spec.n_points, placement_rng)
    if spec.noise_mu == 0:
        return pts
    return perturb(pts, spec.noise_mu, _derive_seed(spec.seed, 1))


def generate_shape_dataset(
    per_class: int, mu: float, seed: int, n_points: int = 50
) -> list[DatasetEntry]:
    """Balanced labeled dataset: per_class clouds for each of the five shapes.

    Entry seeds are derived from (seed, entry index), so any entry can be
    regenerated independently of the others.
    """
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    entries = []
    index = 0
    for shape in SHAPES:
        for _ in range(per_class):
            entry_seed = _derive_seed(seed, index)
            spec = ShapeSpec(shape=shape, n_points=n_points, noise_mu=mu, seed=entry_seed)
            entries.append(
                DatasetEntry(index=index, label=shape, seed=entry_seed,
                             points=sample_shape(spec))
            )
            index += 1
    return entries


# ---------------------------------------------------------------------------
# On-disk dataset: manifest + one cloud CSV per entry
# ---------------------------------------------------------------------------

MANIFEST_NAME = "manifest.ini"


def write_shape_dataset(
    out_dir, entries, *, per_class: int, mu: float, seed: int, n_points: int = 50
) -> Path:
    out = Path(out_dir)
    clouds = out / "clouds"
    clouds.mkdir(parents=True, exist_ok=True)
    parser = configparser.ConfigParser()
    parser["dataset"] = {
        "suite": "shapes",
        "per_class": str(per_class),
        "noise_mu": repr(float(mu)),
        "seed": str(seed),
        "n_points": str(n_points),
        "n_entries": str(len(entries)),
        "shapes": ",".join(SHAPES),
    }
    for entry in entries:
        name = f"entry_{entry.index:04d}.csv"
        save_point_cloud(clouds / name, entry.points)
        parser[f"entry:{entry.index:04d}"] = {
            "file": f"clouds/{name}",
            "label": entry.label,
            "seed": str(entry.seed),
        }
    manifest = out / MANIFEST_NAME
    with open(manifest, "w", encoding="utf-8") as fh:
        parser.write(fh)
    return manifest


def read_manifest(path) -> tuple[dict, list[dict]]:
    """Parse a dataset manifest into its header dict and entry dicts."""
    manifest = Path(path)
    if manifest.is_dir():
        manifest = manifest / MANIFEST_NAME
    parser = configparser.ConfigParser()
    if not parser.read(manifest, encoding="utf-8"):
        raise ValueError(f"cannot read manifest {manifest}")
    if "dataset" not in parser:
        raise ValueError(f"{manifest}: missing [dataset] section")
    header = dict(parser["dataset"])
    entries = []
    for section in parser.sections():
        if not section.startswith("entry:"):
            continue
        rec = dict(parser[section])
        rec["id"] = section.split(":", 1)[1]
        rec["path"] = str(manifest.parent / rec["file"])
        entries.append(rec)
    entries.sort(key=lambda r: r["id"])
    return header, entries


def load_entry_points(entry: dict) -> np.ndarray:
    return load_point_cloud(entry["path"])
