"""phpipe: persistence diagrams, reduced and unreduced, plus vectorization."""

from .core import (
    BoundaryMatrix,
    Cell,
    FilteredComplex,
    ValidationReport,
    add_columns,
    boundary_matrix,
    column_add_count,
    sort_filtration,
    validate_complex,
)
from .builders import (
    build_cubical_lower_star,
    build_height_graph,
    build_rips,
    build_rips_from_distances,
    export_complex,
    import_complex,
    sweep_image,
)
from .diagrams import (
    Diagram,
    IndexPairSet,
    beta,
    extract_pairs,
    low,
    reduce,
    reduce_with_stats,
    to_value_diagrams,
)
from .vectorize import (
    ACConfig,
    FeatureVector,
    PIConfig,
    adcock_carlsson,
    clamp_overflow,
    persistence_image,
    vectorize_entry,
)
from .synth import ShapeSpec, generate_shape_dataset, perturb, sample_shape

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
