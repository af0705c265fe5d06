from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from phpipe.core import boundary_matrix

from support import triangle_cells, make_complex  # noqa: E402


@pytest.fixture
def triangle_complex():
    return make_complex([(c.dim, c.vertices, c.f) for c in triangle_cells()])


@pytest.fixture
def triangle_matrix(triangle_complex):
    return boundary_matrix(triangle_complex)
