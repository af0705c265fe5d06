from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from harness_support import run_phcli  # noqa: E402


@pytest.fixture(scope="session")
def shape_features(tmp_path_factory):
    """Small end-to-end FR+L1 feature matrices built through the real CLI."""
    root = tmp_path_factory.mktemp("shape_pipeline")
    data = root / "data"
    run_phcli("dataset", "shapes", "--per-class", "6", "--noise", "0.0",
              "--seed", "11", "--n-points", "24", "-o", data)
    dg = root / "dg"
    run_phcli("diagram", data / "manifest.ini", "--kind", "fr,l1",
              "--max-dim", "2", "-o", dg)
    cfg = root / "pi.ini"
    cfg.write_text(
        "[default]\nmethod = pi\nresolution = 6\nbandwidth = 0.15\n"
        "birth_min = 0\nbirth_max = 2\npers_min = 0\npers_max = 2\n"
        "weight = linear\n"
    )
    vec = root / "vec"
    run_phcli("vectorize", dg, "--config", cfg, "-o", vec)
    return {
        "fr": vec / "features_fr.csv",
        "l1": vec / "features_l1.csv",
    }
