"""Figures from experiment outputs: metric bar charts and image-grid heatmaps.

Heatmap grids (class-difference images, principal-component weight images)
use one color scale normalized by the minimum and maximum values across all
panels and kinds, so magnitudes are comparable between diagram types.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_cv_bars(summary_csv, out_path, title: str | None = None) -> Path:
    """Grouped bar chart of per-kind metric means with std error bars."""
    rows = []
    with open(summary_csv, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append(row)
    if not rows:
        raise ValueError(f"{summary_csv}: no result rows to plot")
    kinds = [r["kind"] for r in rows]
    means = [float(r["mean"]) for r in rows]
    stds = [float(r["std"]) for r in rows]
    fig, ax = plt.subplots(figsize=(1.2 + len(kinds), 3.2))
    ax.bar(kinds, means, yerr=stds, capsize=4, color="tab:blue")
    ax.set_ylabel(rows[0]["metric"])
    ax.set_ylim(0, 1.05)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def _collect_images(arrays: dict, prefix: str) -> dict[str, dict[str, np.ndarray]]:
    """arrays.npz entries '<prefix>__<kind>__<key>' -> {kind: {key: image}}."""
    out: dict[str, dict[str, np.ndarray]] = {}
    for name, arr in arrays.items():
        if not name.startswith(prefix + "__"):
            continue
        _, kind, key = name.split("__", 2)
        if arr.ndim != 2:
            continue
        out.setdefault(kind, {})[key] = arr
    return out


def plot_image_grid(arrays_npz, prefix: str, out_path) -> Path:
    """One row per kind, one column per diagram key, shared min-max scale."""
    with np.load(arrays_npz) as data:
        arrays = {k: data[k] for k in data.files}
    grids = _collect_images(arrays, prefix)
    if not grids:
        raise ValueError(f"{arrays_npz}: no '{prefix}' image series found")
    kinds = sorted(grids)
    keys = sorted(next(iter(grids.values())))
    vmin = min(img.min() for by_key in grids.values() for img in by_key.values())
    vmax = max(img.max() for by_key in grids.values() for img in by_key.values())
    fig, axes = plt.subplots(
        len(kinds), len(keys),
        figsize=(1.6 * len(keys) + 1, 1.8 * len(kinds) + 0.5),
        squeeze=False,
    )
    for r, kind in enumerate(kinds):
        for c, key in enumerate(keys):
            ax = axes[r][c]
            img = grids[kind].get(key)
            if img is None:
                raise ValueError(f"kind {kind} missing image series {key}")
            im = ax.imshow(img, vmin=vmin, vmax=vmax, cmap="RdBu_r", origin="lower")
            ax.set_xticks([])
            ax.set_yticks([])
            if r == 0:
                ax.set_title(key, fontsize=7)
            if c == 0:
                ax.set_ylabel(kind, fontsize=9)
    fig.colorbar(im, ax=[a for row in axes for a in row], shrink=0.8)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def plot_importance_bars(importance_csv, out_path) -> Path:
    """Permutation importance per principal component, one panel per kind."""
    rows = []
    with open(importance_csv, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{importance_csv}: no importance rows to plot")
    kinds = sorted({r["kind"] for r in rows})
    fig, axes = plt.subplots(len(kinds), 1, figsize=(6, 2.2 * len(kinds)),
                             squeeze=False)
    for i, kind in enumerate(kinds):
        sub = [r for r in rows if r["kind"] == kind]
        comps = [int(r["component"]) + 1 for r in sub]
        means = [float(r["importance_mean"]) for r in sub]
        stds = [float(r["importance_std"]) for r in sub]
        ax = axes[i][0]
        ax.bar(comps, means, yerr=stds, capsize=2, color="tab:orange")
        ax.set_ylabel(f"{kind}")
        ax.set_xlabel("principal component")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def emit_plots(results_dir, out_dir) -> list[Path]:
    """Render every known result file in `results_dir`; error if none exist."""
    results = Path(results_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    summary = results / "summary.csv"
    if summary.exists():
        written.append(plot_cv_bars(summary, out / "metric_bars.png",
                                    title=results.name))
    importance = results / "importance.csv"
    if importance.exists():
        written.append(plot_importance_bars(importance, out / "importance.png"))
    arrays = results / "arrays.npz"
    if arrays.exists():
        with np.load(arrays) as data:
            names = set(data.files)
        if any(n.startswith("diffimg__") for n in names):
            written.append(plot_image_grid(arrays, "diffimg",
                                           out / "class_difference.png"))
        if any(n.startswith("pcimg__") for n in names):
            written.append(plot_image_grid(arrays, "pcimg", out / "pc_weights.png"))
    if not written:
        raise ValueError(
            f"{results}: nothing to plot (expected summary.csv, importance.csv "
            "or arrays.npz)"
        )
    return written
