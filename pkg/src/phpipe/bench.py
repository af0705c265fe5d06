"""Per-stage timing of the diagram pipeline, split by diagram kind.

Stages: build (filtration construction), boundary (matrix assembly), reduce
(fully-reduced kind only; the unreduced kinds skip reduction and report 0 by
construction), extract (pair extraction) and vectorize (persistence image of
the value diagrams). Pair counts and the peak column population reached while
reducing are recorded alongside, so the cost of vectorizing larger unreduced
diagrams is observable next to the cost of reduction.
"""

from __future__ import annotations

import csv
import resource
import statistics
import time
from dataclasses import dataclass, fields

from .core import FilteredComplex, boundary_matrix
from .diagrams import (
    KINDS,
    extract_pairs,
    fr_pairs_from_reduced,
    reduce_with_stats,
    to_value_diagrams,
)
from .vectorize import PIConfig, persistence_image


@dataclass(frozen=True)
class BenchRecord:
    entry: str
    kind: str
    repeat: int
    build_s: float
    boundary_s: float
    reduce_s: float
    extract_s: float
    vectorize_s: float
    n_cells: int
    n_pairs: int
    peak_col_nnz: int
    n_col_adds: int
    max_rss_kb: int  # best-effort, process-wide high-water mark


STAGES = ("build_s", "boundary_s", "reduce_s", "extract_s", "vectorize_s")


def bench_entry(
    entry_id: str,
    build,
    kinds=KINDS,
    *,
    pi_cfg: PIConfig | None = None,
    repeats: int = 1,
    source: str = "bench",
) -> list[BenchRecord]:
    """Time every stage for one entry; `build` is a zero-arg complex builder."""
    cfg = pi_cfg or PIConfig()
    records = []
    for rep in range(repeats):
        t0 = time.perf_counter()
        cx: FilteredComplex = build()
        t_build = time.perf_counter() - t0

        t0 = time.perf_counter()
        matrix = boundary_matrix(cx)
        t_boundary = time.perf_counter() - t0

        for kind in kinds:
            if kind == "fr":
                t0 = time.perf_counter()
                reduced, stats = reduce_with_stats(matrix)
                t_reduce = time.perf_counter() - t0
                t0 = time.perf_counter()
                pairs = fr_pairs_from_reduced(reduced)
                t_extract = time.perf_counter() - t0
                peak, adds = stats.peak_col_nnz, stats.n_col_adds
            else:
                t_reduce = 0.0
                t0 = time.perf_counter()
                pairs = extract_pairs(matrix, kind)
                t_extract = time.perf_counter() - t0
                peak = max(matrix.column_nnz(), default=0)
                adds = 0

            t0 = time.perf_counter()
            diagrams = to_value_diagrams(pairs, cx, source=source)
            for dg in diagrams:
                persistence_image(dg, cfg)
            t_vectorize = time.perf_counter() - t0

            records.append(
                BenchRecord(
                    entry=entry_id,
                    kind=kind,
                    repeat=rep,
                    build_s=t_build,
                    boundary_s=t_boundary,
                    reduce_s=t_reduce,
                    extract_s=t_extract,
                    vectorize_s=t_vectorize,
                    n_cells=len(cx),
                    n_pairs=len(pairs.pairs),
                    peak_col_nnz=peak,
                    n_col_adds=adds,
                    max_rss_kb=resource.getrusage(resource.RUSAGE_SELF).ru_maxrss,
                )
            )
    return records


def write_bench_csv(path, records) -> None:
    names = [f.name for f in fields(BenchRecord)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for rec in records:
            writer.writerow([getattr(rec, name) for name in names])


def summarize(records) -> dict[str, dict[str, tuple[float, float]]]:
    """Per kind and stage: (mean, std) over all records of that kind."""
    grouped: dict[str, list[BenchRecord]] = {}
    for rec in records:
        grouped.setdefault(rec.kind, []).append(rec)
    out: dict[str, dict[str, tuple[float, float]]] = {}
    for kind, recs in grouped.items():
        stats = {}
        for stage in STAGES:
            vals = [getattr(r, stage) for r in recs]
            mean = statistics.fmean(vals)
            std = statistics.pstdev(vals) if len(vals) > 1 else 0.0
            stats[stage] = (mean, std)
        stats["n_pairs"] = (
            statistics.fmean([r.n_pairs for r in recs]),
            statistics.pstdev([r.n_pairs for r in recs]) if len(recs) > 1 else 0.0,
        )
        stats["peak_col_nnz"] = (
            max(r.peak_col_nnz for r in recs),
            0.0,
        )
        out[kind] = stats
    return out


def format_table(records) -> str:
    """Human-readable per-kind table of stage means and deviations."""
    summary = summarize(records)
    cols = ["kind"] + [s.removesuffix("_s") for s in STAGES] + ["pairs", "peak_cols"]
    lines = ["  ".join(f"{c:>12}" for c in cols)]
    for kind in sorted(summary):
        stats = summary[kind]
        row = [f"{kind:>12}"]
        for stage in STAGES:
            mean, std = stats[stage]
            row.append(f"{mean * 1e3:8.2f}ms" + (f"+-{std * 1e3:.2f}" if std else "    "))
        row.append(f"{stats['n_pairs'][0]:12.1f}")
        row.append(f"{stats['peak_col_nnz'][0]:12.0f}")
        lines.append("  ".join(row))
    return "\n".join(lines)
