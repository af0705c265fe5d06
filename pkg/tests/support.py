"""Shared construction helpers for the test suite."""

from __future__ import annotations

from phpipe.core import Cell, sort_filtration


def triangle_cells():
    """Filled triangle: vertices at f=0, edges at f=1, the 2-cell at f=2."""
    cells = [Cell(0, 2, (0, 1, 2), 2.0)]
    cells += [Cell(0, 1, e, 1.0) for e in [(1, 2), (0, 2), (0, 1)]]
    cells += [Cell(0, 0, (v,), 0.0) for v in (2, 1, 0)]
    return cells


def make_complex(raw_cells, kind="simplicial"):
    """Sort (dim, vertices, f) triples into a complex."""
    return sort_filtration(
        [Cell(0, dim, tuple(verts), f) for dim, verts, f in raw_cells], kind=kind
    )
