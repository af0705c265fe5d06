"""Persistence pairs from boundary matrices, reduced and unreduced.

Four multisets of (birth index, death index) pairs are supported:

  fr   pairs (low(R_j), j) of the fully reduced matrix R, plus the essential
       (never-dying) positive indices
  l1   pairs (low(M_j), j) over every nonzero column of the raw matrix
  nnb  the l1 pairs restricted to columns with beta(M_j) != -1
  ap   the l1 pairs restricted to columns with beta(M_j) == low(M_j), which
       are already reduced and therefore guaranteed fr pairs

low(M_j) is the largest row of a 1 in column j (-1 for a zero column).
beta(M_j) is the smallest row of a 1 in column j whose row is zero in every
earlier column (-1 if none); such a 1 can never be cancelled by left-to-right
reduction, so the column is necessarily negative.

The unreduced kinds never touch or copy-reduce columns; only `reduce`
performs column additions (tracked by the core perf counter).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from . import core
from .core import BoundaryMatrix, FilteredComplex

KINDS = ("fr", "l1", "nnb", "ap")


@dataclass(frozen=True)
class IndexPairSet:
    """Pairs (birth index, death index, degree) of one diagram kind.

    `degree` is the dimension of the birth cell. `essentials` holds the
    unpaired positive indices and is populated for kind "fr" only.
    """

    kind: str
    pairs: tuple[tuple[int, int, int], ...]
    essentials: tuple[int, ...] = ()

    def death_indices(self) -> set[int]:
        return {j for _, j, _ in self.pairs}


@dataclass(frozen=True)
class Diagram:
    """Value-form diagram of one homology degree: points are (birth, death)."""

    points: tuple[tuple[float, float], ...]
    degree: int
    source: str = ""

    def persistences(self) -> list[float]:
        return [d - b for b, d in self.points]


@dataclass(frozen=True)
class ReduceStats:
    n_col_adds: int
    peak_col_nnz: int


def low(matrix: BoundaryMatrix, j: int) -> int:
    """Largest row index of a 1 in column j, or -1 for a zero column."""
    if not 0 <= j < matrix.n:
        raise IndexError(f"column {j} out of range for n={matrix.n}")
    col = matrix.columns[j]
    return col[-1] if col else -1


def first_row_occurrence(matrix: BoundaryMatrix) -> list[int]:
    """For each row, the first column containing a 1 in it (-1 if none)."""
    occ = [-1] * matrix.n
    for j, col in enumerate(matrix.columns):
        for r in col:
            if occ[r] == -1:
                occ[r] = j
    return occ


def beta(matrix: BoundaryMatrix, j: int, first_occ: list[int] | None = None) -> int:
    """Smallest row of a 1 in column j whose row is zero in all earlier columns."""
    if not 0 <= j < matrix.n:
        raise IndexError(f"column {j} out of range for n={matrix.n}")
    occ = first_occ if first_occ is not None else first_row_occurrence(matrix)
    for r in matrix.columns[j]:
        if occ[r] == j:
            return r
    return -1


def reduce_with_stats(matrix: BoundaryMatrix) -> tuple[BoundaryMatrix, ReduceStats]:
    """Left-to-right standard reduction on a private copy of the matrix.

    Columns are added (mod 2) into column j while its low collides with an
    earlier column's low. The working copy packs each column into a Python
    int bitset, so an addition is one XOR; the result is converted back to
    sorted index tuples. Returns the reduced matrix and addition/fill stats.
    """
    n = matrix.n
    out = list(matrix.columns)
    peak = max((len(c) for c in out), default=0)
    bits: dict[int, int] = {}

    def as_bits(k: int) -> int:
        b = bits.get(k)
        if b is None:
            b = 0
            for r in out[k]:
                b |= 1 << r
            bits[k] = b
        return b

    pivot: dict[int, int] = {}
    adds = 0
    for j in range(n):
        sparse = out[j]
        if not sparse:
            continue
        if pivot.get(sparse[-1]) is None:
            pivot[sparse[-1]] = j
            continue
        col = as_bits(j)
        while col:
            lo = col.bit_length() - 1
            k = pivot.get(lo)
            if k is None:
                pivot[lo] = j
                break
            col ^= as_bits(k)
            adds += 1
            nnz = col.bit_count()
            if nnz > peak:
                peak = nnz
        bits[j] = col
        rows = []
        while col:
            lo = col.bit_length() - 1
            rows.append(lo)
            col ^= 1 << lo
        rows.reverse()
        out[j] = tuple(rows)

    core._perf["n_col_adds"] += adds
    reduced = BoundaryMatrix(n=n, columns=tuple(out), degree=matrix.degree)
    return reduced, ReduceStats(n_col_adds=adds, peak_col_nnz=peak)


def reduce(matrix: BoundaryMatrix) -> BoundaryMatrix:
    """Standard reduction; nonzero output columns have pairwise-distinct lows."""
    reduced, _ = reduce_with_stats(matrix)
    return reduced


def fr_pairs_from_reduced(reduced: BoundaryMatrix) -> IndexPairSet:
    """Pairs and essentials read off an already-reduced matrix."""
    pairs = []
    lows = set()
    for j, col in enumerate(reduced.columns):
        if col:
            i = col[-1]
            lows.add(i)
            pairs.append((i, j, reduced.degree[i]))
    essentials = tuple(
        i for i, col in enumerate(reduced.columns) if not col and i not in lows
    )
    return IndexPairSet(kind="fr", pairs=tuple(pairs), essentials=essentials)


def extract_pairs(matrix: BoundaryMatrix, kind: str) -> IndexPairSet:
    """Index pairs of the requested kind; only "fr" reduces (on a copy)."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if kind == "fr":
        reduced, _ = reduce_with_stats(matrix)
        return fr_pairs_from_reduced(reduced)
    if kind == "l1":
        pairs = tuple(
            (col[-1], j, matrix.degree[col[-1]])
            for j, col in enumerate(matrix.columns)
            if col
        )
        return IndexPairSet(kind="l1", pairs=pairs)
    occ = first_row_occurrence(matrix)
    pairs = []
    for j, col in enumerate(matrix.columns):
        if not col:
            continue
        b = beta(matrix, j, occ)
        if b == -1:
            continue
        if kind == "nnb" or b == col[-1]:
            pairs.append((col[-1], j, matrix.degree[col[-1]]))
    return IndexPairSet(kind=kind, pairs=tuple(pairs))


def _emitted_degrees(cx: FilteredComplex) -> list[int]:
    top = cx.max_dim()
    return list(range(top)) if top >= 1 else [0]


def to_value_diagrams(
    pairs: IndexPairSet,
    cx: FilteredComplex,
    *,
    ephemeral: str = "drop",
    essential: str = "drop",
    cap: float | None = None,
    source: str = "",
) -> list[Diagram]:
    """Map index pairs to (birth value, death value) diagrams per degree.

    Pairs with equal birth and death values (compared exactly) are removed
    when ephemeral="drop". Essentials are dropped or emitted as (birth, cap);
    a cap below some essential birth is an error.
    """
    if ephemeral not in ("keep", "drop"):
        raise ValueError("ephemeral must be 'keep' or 'drop'")
    if essential not in ("drop", "cap"):
        raise ValueError("essential must be 'drop' or 'cap'")
    if essential == "cap" and cap is None:
        raise ValueError("essential='cap' needs a cap value")

    values = cx.values()
    by_degree: dict[int, list[tuple[float, float]]] = {
        deg: [] for deg in _emitted_degrees(cx)
    }
    for i, j, deg in pairs.pairs:
        b, d = values[i], values[j]
        if ephemeral == "drop" and b == d:
            continue
        by_degree.setdefault(deg, []).append((b, d))
    if essential == "cap":
        for i in pairs.essentials:
            b = values[i]
            if cap < b:
                raise ValueError(f"cap {cap} below birth value {b} of cell {i}")
            by_degree.setdefault(cx.cells[i].dim, []).append((b, float(cap)))
    return [
        Diagram(points=tuple(sorted(pts)), degree=deg, source=source)
        for deg, pts in sorted(by_degree.items())
    ]


# ---------------------------------------------------------------------------
# Diagram CSV
# ---------------------------------------------------------------------------

DIAGRAM_CSV_HEADER = ["source", "degree", "birth", "death", "birth_index", "death_index"]


def write_diagram_csv(
    path,
    rows_per_complex,
    *,
    ephemeral: str = "drop",
    essential: str = "drop",
    cap: float | None = None,
    append: bool = False,
) -> int:
    """Write value+index rows for (source, pairs, complex) triples.

    Infinite death values are only legal when explicitly requested via
    cap=inf. Essential rows carry death_index=-1. Returns the row count.
    """
    if essential != "cap" and cap is not None:
        raise ValueError("cap is only meaningful with essential='cap'")
    mode = "a" if append else "w"
    count = 0
    with open(path, mode, newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if not append:
            writer.writerow(DIAGRAM_CSV_HEADER)
        for source, pairs, cx in rows_per_complex:
            values = cx.values()
            for i, j, deg in pairs.pairs:
                b, d = values[i], values[j]
                if ephemeral == "drop" and b == d:
                    continue
                writer.writerow([source, deg, repr(b), repr(d), i, j])
                count += 1
            if essential == "cap":
                for i in pairs.essentials:
                    b = values[i]
                    if cap < b:
                        raise ValueError(f"cap {cap} below birth value {b}")
                    writer.writerow(
                        [source, cx.cells[i].dim, repr(b), repr(float(cap)), i, -1]
                    )
                    count += 1
    return count


def read_diagram_csv(path, *, allow_inf: bool = False) -> dict[tuple[str, int], Diagram]:
    """Read a diagram CSV into one Diagram per (source, degree) key."""
    grouped: dict[tuple[str, int], list[tuple[float, float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != DIAGRAM_CSV_HEADER:
            raise ValueError(f"{path}: unexpected diagram CSV header {header}")
        for no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6:
                raise ValueError(f"{path}: line {no}: expected 6 columns")
            source, deg, b, d = row[0], int(row[1]), float(row[2]), float(row[3])
            if not allow_inf and (math.isinf(b) or math.isinf(d)):
                raise ValueError(f"{path}: line {no}: infinite value not allowed here")
            grouped.setdefault((source, deg), []).append((b, d))
    return {
        key: Diagram(points=tuple(sorted(pts)), degree=key[1], source=key[0])
        for key, pts in grouped.items()
    }
