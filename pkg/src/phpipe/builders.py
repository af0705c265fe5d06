"""Filtration builders: Rips complexes, cubical sweeps, height graphs, file I/O.

All builders return a validated, filtration-ordered FilteredComplex. Point
clouds are float arrays of shape (n, d); images are 2-D float arrays addressed
row-major as (row, col).
"""

from __future__ import annotations

import gzip
import struct

import numpy as np
from scipy.spatial.distance import squareform, pdist

from .core import CUBICAL, SIMPLICIAL, Cell, FilteredComplex, sort_filtration

SWEEP_DIRECTIONS = ("N", "S", "E", "W")

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class ComplexFormatError(ValueError):
    """Raised when an exchange-format file cannot be parsed or validated."""


def as_point_cloud(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("point cloud must be a non-empty (n, d) array")
    if not np.isfinite(pts).all():
        raise ValueError("point cloud contains non-finite coordinates")
    return pts


def as_image_grid(grid) -> np.ndarray:
    img = np.asarray(grid, dtype=float)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("image grid must be a non-empty 2-D array")
    if not np.isfinite(img).all():
        raise ValueError("image grid contains non-finite values")
    return img


# ---------------------------------------------------------------------------
# Vietoris-Rips
# ---------------------------------------------------------------------------


def build_rips(points, max_dim: int, threshold: float | None = None) -> FilteredComplex:
    """Rips complex up to `max_dim` with simplex diameter <= threshold.

    Vertices get f=0; a higher simplex gets the largest length among its
    1-faces. `threshold=None` means the largest pairwise distance, which
    yields the complete complex.
    """
    pts = as_point_cloud(points)
    if pts.shape[0] == 1:
        dm = np.zeros((1, 1))
    else:
        dm = squareform(pdist(pts))
    return build_rips_from_distances(dm, max_dim, threshold)


def build_rips_from_distances(
    dm, max_dim: int, threshold: float | None = None
) -> FilteredComplex:
    """Rips complex from a symmetric distance matrix with zero diagonal."""
    d = np.asarray(dm, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
        raise ValueError("distance matrix must be square and non-empty")
    if (d < 0).any():
        raise ValueError("distance matrix has negative entries")
    if not np.allclose(d, d.T):
        raise ValueError("distance matrix is not symmetric")
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    n = d.shape[0]
    if threshold is None:
        threshold = float(d.max())
    elif threshold <= 0:
        raise ValueError("threshold must be positive")

    cells = [Cell(id=i, dim=0, vertices=(i,), f=0.0) for i in range(n)]
    if max_dim == 0 or n == 1:
        return sort_filtration(cells, kind=SIMPLICIAL, validate=False)

    adj = d <= threshold
    np.fill_diagonal(adj, False)
    iu, ju = np.triu_indices(n, k=1)
    keep = adj[iu, ju]
    frontier: list[tuple[tuple[int, ...], float]] = list(
        zip(
            (tuple(p) for p in np.column_stack([iu[keep], ju[keep]]).tolist()),
            d[iu[keep], ju[keep]].tolist(),
        )
    )
    cells.extend(Cell(id=0, dim=1, vertices=v, f=f) for v, f in frontier)

    # Extend each simplex by a later vertex adjacent to all of its vertices;
    # the new diameter only involves the new vertex's distances.
    for dim in range(2, max_dim + 1):
        nxt: list[tuple[tuple[int, ...], float]] = []
        for verts, f in frontier:
            mask = adj[verts[0]]
            for u in verts[1:]:
                mask = mask & adj[u]
            cand = np.nonzero(mask)[0]
            cand = cand[cand > verts[-1]]
            if cand.size == 0:
                continue
            diams = np.maximum(f, d[np.ix_(list(verts), cand)].max(axis=0))
            nxt.extend(
                (verts + (v,), dm) for v, dm in zip(cand.tolist(), diams.tolist())
            )
        cells.extend(Cell(id=0, dim=dim, vertices=v, f=f) for v, f in nxt)
        frontier = nxt
    return sort_filtration(cells, kind=SIMPLICIAL, validate=False)


# ---------------------------------------------------------------------------
# Cubical complexes from images
# ---------------------------------------------------------------------------


def build_cubical_lower_star(grid) -> FilteredComplex:
    """Cubical complex of an image: pixels are 2-cells carrying their value.

    Every lower-dimensional cube takes the minimum value over the pixels it
    touches, so faces never exceed cofaces. Corner ids live in the
    (H+1) x (W+1) vertex grid, row-major.
    """
    img = as_image_grid(grid)
    h, w = img.shape
    stride = w + 1

    def vid(r: int, c: int) -> int:
        return r * stride + c

    verts: dict[int, float] = {}
    edges: dict[tuple[int, int], float] = {}
    squares: list[tuple[tuple[int, ...], float]] = []

    def absorb(store, key, value):
        prev = store.get(key)
        if prev is None or value < prev:
            store[key] = value

    for r in range(h):
        for c in range(w):
            v = float(img[r, c])
            tl, tr = vid(r, c), vid(r, c + 1)
            bl, br = vid(r + 1, c), vid(r + 1, c + 1)
            squares.append(((tl, tr, bl, br), v))
            for a, b in ((tl, tr), (bl, br), (tl, bl), (tr, br)):
                absorb(edges, (a, b), v)
            for corner in (tl, tr, bl, br):
                absorb(verts, corner, v)

    cells = [Cell(id=0, dim=0, vertices=(i,), f=f) for i, f in verts.items()]
    cells.extend(Cell(id=0, dim=1, vertices=k, f=f) for k, f in edges.items())
    cells.extend(Cell(id=0, dim=2, vertices=v, f=f) for v, f in squares)
    return sort_filtration(cells, kind=CUBICAL, validate=False)


def sweep_image(grid, direction: str, activity_threshold: float = 0.0) -> np.ndarray:
    """Directional filtration values for an image.

    Active pixels (intensity > activity_threshold) get their normalized
    distance from the edge the sweep enters at (direction N sweeps top to
    bottom, W sweeps left to right, and so on); inactive pixels get 1.0, so
    all values land in [0, 1].
    """
    img = as_image_grid(grid)
    h, w = img.shape
    if h < 2 or w < 2:
        raise ValueError("sweep needs at least a 2x2 image")
    if direction not in SWEEP_DIRECTIONS:
        raise ValueError(f"direction must be one of {SWEEP_DIRECTIONS}")
    rows = np.arange(h, dtype=float)[:, None]
    cols = np.arange(w, dtype=float)[None, :]
    if direction == "N":
        dist = np.broadcast_to(rows / (h - 1), img.shape)
    elif direction == "S":
        dist = np.broadcast_to((h - 1 - rows) / (h - 1), img.shape)
    elif direction == "W":
        dist = np.broadcast_to(cols / (w - 1), img.shape)
    else:
        dist = np.broadcast_to((w - 1 - cols) / (w - 1), img.shape)
    out = np.where(img > activity_threshold, dist, 1.0)
    return out.astype(float)


# ---------------------------------------------------------------------------
# Height-filtered graphs
# ---------------------------------------------------------------------------


def build_height_graph(points, edges, axis: int = 0) -> FilteredComplex:
    """1-complex with vertices filtered by a coordinate and edges by max end."""
    pts = as_point_cloud(points)
    if not 0 <= axis < pts.shape[1]:
        raise ValueError(f"axis {axis} out of range for {pts.shape[1]}-d points")
    n = pts.shape[0]
    heights = pts[:, axis]
    cells = [Cell(id=i, dim=0, vertices=(i,), f=float(heights[i])) for i in range(n)]
    for a, b in edges:
        a, b = int(a), int(b)
        if not (0 <= a < n and 0 <= b < n) or a == b:
            raise ValueError(f"edge ({a}, {b}) references missing vertices")
        lo, hi = min(a, b), max(a, b)
        cells.append(
            Cell(id=0, dim=1, vertices=(lo, hi), f=float(max(heights[a], heights[b])))
        )
    return sort_filtration(cells, kind=SIMPLICIAL)


# ---------------------------------------------------------------------------
# Exchange format
# ---------------------------------------------------------------------------


def export_complex(cx: FilteredComplex, path) -> None:
    """Write a complex in the text exchange format (one cell per line)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"phc v1 {cx.kind}\n")
        for cell in cx.cells:
            verts = " ".join(str(v) for v in cell.vertices)
            fh.write(f"{cell.dim} {cell.f!r} {verts}\n")


def import_complex(path) -> FilteredComplex:
    """Read, sort and validate a complex from the text exchange format."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ComplexFormatError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 3 or header[0] != "phc" or header[1] != "v1":
        raise ComplexFormatError(f"{path}: line 1: bad header {lines[0]!r}")
    kind = header[2]
    if kind not in (SIMPLICIAL, CUBICAL):
        raise ComplexFormatError(f"{path}: line 1: unknown complex kind {kind!r}")
    cells = []
    for no, line in enumerate(lines[1:], start=2):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) < 3:
            raise ComplexFormatError(f"{path}: line {no}: expected 'dim f v0 ...'")
        try:
            dim = int(parts[0])
            f = float(parts[1])
            verts = tuple(int(v) for v in parts[2:])
        except ValueError as exc:
            raise ComplexFormatError(f"{path}: line {no}: {exc}") from None
        if dim < 0 or list(verts) != sorted(set(verts)):
            raise ComplexFormatError(
                f"{path}: line {no}: vertices must be ascending and unique"
            )
        cells.append(Cell(id=0, dim=dim, vertices=verts, f=f))
    try:
        return sort_filtration(cells, kind=kind)
    except ValueError as exc:
        raise ComplexFormatError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# Point-cloud / image file readers
# ---------------------------------------------------------------------------


def load_point_cloud(path) -> np.ndarray:
    """CSV with one point per row."""
    try:
        pts = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return as_point_cloud(pts)


def save_point_cloud(path, points) -> None:
    pts = as_point_cloud(points)
    np.savetxt(path, pts, delimiter=",", fmt="%.17g")


def load_image_csv(path) -> np.ndarray:
    """CSV grid of intensities, one image row per line."""
    try:
        img = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return as_image_grid(img)


def _open_maybe_gzip(path):
    if str(path).endswith(".gz"):
        return gzip.open(path, "rb")
    return open(path, "rb")


def load_idx_images(path) -> np.ndarray:
    """IDX ubyte image file (big-endian header) -> uint8 array (n, H, W)."""
    with _open_maybe_gzip(path) as fh:
        head = fh.read(16)
        if len(head) < 16:
            raise ValueError(f"{path}: truncated IDX header")
        magic, n, h, w = struct.unpack(">IIII", head)
        if magic != IDX_IMAGES_MAGIC:
            raise ValueError(f"{path}: bad IDX image magic {magic:#010x}")
        data = fh.read(n * h * w)
    if len(data) != n * h * w:
        raise ValueError(f"{path}: truncated IDX payload")
    return np.frombuffer(data, dtype=np.uint8).reshape(n, h, w)


def load_idx_labels(path) -> np.ndarray:
    """IDX ubyte label file -> uint8 array (n,)."""
    with _open_maybe_gzip(path) as fh:
        head = fh.read(8)
        if len(head) < 8:
            raise ValueError(f"{path}: truncated IDX header")
        magic, n = struct.unpack(">II", head)
        if magic != IDX_LABELS_MAGIC:
            raise ValueError(f"{path}: bad IDX label magic {magic:#010x}")
        data = fh.read(n)
    if len(data) != n:
        raise ValueError(f"{path}: truncated IDX payload")
    return np.frombuffer(data, dtype=np.uint8)


def save_idx_images(path, images) -> None:
    arr = np.asarray(images, dtype=np.uint8)
    if arr.ndim != 3:
        raise ValueError("images must be (n, H, W)")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, *arr.shape))
        fh.write(arr.tobytes())


def save_idx_labels(path, labels) -> None:
    arr = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, arr.shape[0]))
        fh.write(arr.tobytes())
