"""Filtered complexes and Z2 boundary matrices.

A cell is identified by its sorted vertex tuple. For simplicial complexes the
vertices are point indices; for cubical complexes they are corner ids in an
(H+1) x (W+1) vertex grid, linearized row-major. Codimension-1 faces are
recovered by vertex-subset lookup, which covers both cell species: the facets
of a k-simplex are its k+1 drop-one-vertex subsets, and the faces of a d-cube
are the (d-1)-cubes of the complex whose corner set is contained in the
cube's corner set (diagonal vertex pairs are never cells, so presence lookup
is unambiguous).

Complexes and matrices are immutable after construction; every operation here
is pure, so instances are safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

SIMPLICIAL = "simplicial"
CUBICAL = "cubical"

ORDER_KEY = "(f, dim, vertices)"

# Diagnostic counter for mod-2 column additions. Unreduced diagram extraction
# must leave this untouched; reduction bumps it once per XOR.
_perf = {"n_col_adds": 0}


def column_add_count() -> int:
    return _perf["n_col_adds"]


@dataclass(frozen=True, order=True)
class Cell:
    """One cell of a filtered complex: `f` is its filtration value."""

    id: int
    dim: int
    vertices: tuple[int, ...]
    f: float


@dataclass(frozen=True)
class FilteredComplex:
    """Cells in filtration order (non-decreasing f, faces before cofaces)."""

    cells: tuple[Cell, ...]
    kind: str = SIMPLICIAL
    order_key: str = ORDER_KEY
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        lookup = {(c.dim, c.vertices): i for i, c in enumerate(self.cells)}
        object.__setattr__(self, "_index", lookup)

    def __len__(self) -> int:
        return len(self.cells)

    def position(self, dim: int, vertices: tuple[int, ...]) -> int | None:
        return self._index.get((dim, vertices))

    def max_dim(self) -> int:
        return max((c.dim for c in self.cells), default=0)

    def values(self) -> list[float]:
        return [c.f for c in self.cells]


@dataclass(frozen=True)
class BoundaryMatrix:
    """Sparse Z2 matrix: per column a strictly ascending tuple of row indices.

    Column j holds the codimension-1 faces of cell j; `degree[j]` is the
    dimension of cell j. Strict upper-triangularity (all rows < column index)
    is checked at construction.
    """

    n: int
    columns: tuple[tuple[int, ...], ...]
    degree: tuple[int, ...]

    def __post_init__(self):
        if len(self.columns) != self.n or len(self.degree) != self.n:
            raise ValueError("column/degree count does not match n")
        for j, col in enumerate(self.columns):
            if any(col[i] >= col[i + 1] for i in range(len(col) - 1)):
                raise ValueError(f"column {j} is not strictly ascending")
            if col and col[-1] >= j:
                raise ValueError(f"column {j} is not strictly upper-triangular")

    def column_nnz(self) -> list[int]:
        return [len(c) for c in self.columns]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]


def _simplicial_facets(vertices: tuple[int, ...]) -> list[tuple[int, ...]]:
    if len(vertices) <= 1:
        return []
    return [vertices[:i] + vertices[i + 1 :] for i in range(len(vertices))]


def _cell_shape_error(cell: Cell, kind: str) -> str | None:
    if list(cell.vertices) != sorted(set(cell.vertices)):
        return f"cell {cell.vertices}: vertices not sorted/unique"
    expected = cell.dim + 1 if kind == SIMPLICIAL else 2**cell.dim
    if len(cell.vertices) != expected:
        return (
            f"cell {cell.vertices}: dim {cell.dim} needs {expected} vertices, "
            f"has {len(cell.vertices)}"
        )
    return None


def _face_positions(cx: FilteredComplex, cell: Cell) -> tuple[list[int], int]:
    """Positions of the codim-1 faces found in `cx`, plus the required count."""
    if cell.dim == 0:
        return [], 0
    if cx.kind == SIMPLICIAL:
        required = cell.dim + 1
        found = []
        for facet in _simplicial_facets(cell.vertices):
            pos = cx.position(cell.dim - 1, facet)
            if pos is not None:
                found.append(pos)
        return found, required
    required = 2 * cell.dim
    size = 2 ** (cell.dim - 1)
    found = []
    for sub in itertools.combinations(cell.vertices, size):
        pos = cx.position(cell.dim - 1, sub)
        if pos is not None:
            found.append(pos)
    return found, required


def validate_complex(cx: FilteredComplex) -> ValidationReport:
    """Check closure, ordering and filtration monotonicity; never raises."""
    violations: list[str] = []
    seen: dict[tuple[int, tuple[int, ...]], int] = {}
    for i, cell in enumerate(cx.cells):
        err = _cell_shape_error(cell, cx.kind)
        if err:
            violations.append(err)
            continue
        key = (cell.dim, cell.vertices)
        if key in seen:
            violations.append(f"duplicate cell {cell.vertices} (dim {cell.dim})")
        seen[key] = i

    for i in range(len(cx.cells) - 1):
        if cx.cells[i].f > cx.cells[i + 1].f:
            violations.append(
                f"filtration not monotone: position {i} has f="
                f"{cx.cells[i].f} > {cx.cells[i + 1].f} at position {i + 1}"
            )

    for j, cell in enumerate(cx.cells):
        if cell.dim == 0 or _cell_shape_error(cell, cx.kind):
            continue
        found, required = _face_positions(cx, cell)
        if len(found) < required:
            violations.append(
                f"missing face: cell {cell.vertices} (dim {cell.dim}) has "
                f"{len(found)} of {required} faces"
            )
        for pos in found:
            face = cx.cells[pos]
            if pos >= j:
                violations.append(
                    f"face after coface: {face.vertices} at {pos} follows "
                    f"{cell.vertices} at {j}"
                )
            if face.f > cell.f:
                violations.append(
                    f"filtration not monotone: face {face.vertices} f={face.f} "
                    f"exceeds coface {cell.vertices} f={cell.f}"
                )
    return ValidationReport(not violations, tuple(violations))


def sort_filtration(cells, kind: str = SIMPLICIAL, validate: bool = True) -> FilteredComplex:
    """Order cells by (f, dim, vertices) and validate the result.

    The tie-break is deterministic and face-respecting: faces have f at most
    the coface's f and strictly smaller dimension, so they always land
    earlier. Cell ids are reassigned to filtration positions. Raises
    ValueError on non-closed or non-monotone input. Builders whose output is
    closed and monotone by construction may pass validate=False.
    """
    ordered = sorted(cells, key=lambda c: (c.f, c.dim, c.vertices))
    relabeled = tuple(
        Cell(id=i, dim=c.dim, vertices=tuple(c.vertices), f=float(c.f))
        for i, c in enumerate(ordered)
    )
    cx = FilteredComplex(cells=relabeled, kind=kind)
    if validate:
        report = validate_complex(cx)
        if not report.ok:
            raise ValueError("invalid complex:\n" + "\n".join(report.violations))
    return cx


def boundary_matrix(cx: FilteredComplex) -> BoundaryMatrix:
    """Boundary matrix of an ordered complex: column j = faces of cell j."""
    columns: list[tuple[int, ...]] = []
    for cell in cx.cells:
        found, required = _face_positions(cx, cell)
        if len(found) != required:
            raise ValueError(
                f"corrupted complex: cell {cell.vertices} (dim {cell.dim}) "
                f"has {len(found)} of {required} faces"
            )
        columns.append(tuple(sorted(found)))
    return BoundaryMatrix(
        n=len(cx.cells),
        columns=tuple(columns),
        degree=tuple(c.dim for c in cx.cells),
    )


def add_columns(a, b) -> tuple[int, ...]:
    """Mod-2 sum of two sorted sparse columns: their symmetric difference."""
    _perf["n_col_adds"] += 1
    out: list[int] = []
    i, j = 0, 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        elif a[i] > b[j]:
            out.append(b[j])
            j += 1
        else:
            i += 1
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)
