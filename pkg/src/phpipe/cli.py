"""phcli: dataset generation, diagram computation, vectorization and benchmarks.

Exit codes: 0 success, 1 runtime/I-O failure, 2 usage error. Entry processing
is a parallel map over independent inputs ("--threads", overridden by the
PHCLI_THREADS environment variable); worker count changes wall time only,
never any output byte.
"""

from __future__ import annotations

import configparser
import functools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import bench as bench_mod
from . import builders, synth
from .core import boundary_matrix
from .diagrams import (
    KINDS,
    Diagram,
    extract_pairs,
    read_diagram_csv,
    write_diagram_csv,
)
from .vectorize import (
    ACConfig,
    PIConfig,
    vectorize_entry,
    write_feature_csv,
    write_layout_sidecar,
)

INDEX_NAME = "diagrams.ini"


def _cli_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, OSError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _thread_count(requested: int) -> int:
    env = os.environ.get("PHCLI_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise click.ClickException(f"PHCLI_THREADS must be an integer, got {env!r}")
    return max(1, requested)


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


@click.group()
def main():
    """Persistence diagrams (reduced and unreduced) from filtered complexes."""


# ---------------------------------------------------------------------------
# dataset
# ---------------------------------------------------------------------------


@main.command("dataset")
@click.argument("suite", type=click.Choice(["shapes"]))
@click.option("--per-class", type=click.IntRange(min=1), default=200, show_default=True)
@click.option("--noise", type=click.FloatRange(min=0.0), default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n-points", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False), required=True)
@_cli_errors
def cmd_dataset(suite, per_class, noise, seed, n_points, out_dir):
    """Generate a labeled synthetic dataset (manifest + cloud CSVs)."""
    entries = synth.generate_shape_dataset(per_class, noise, seed, n_points=n_points)
    manifest = synth.write_shape_dataset(
        out_dir, entries, per_class=per_class, mu=noise, seed=seed, n_points=n_points
    )
    click.echo(f"wrote {len(entries)} clouds and {manifest}")


# ---------------------------------------------------------------------------
# diagram
# ---------------------------------------------------------------------------


def _parse_kinds(text: str) -> list[str]:
    kinds = [k.strip().lower() for k in text.split(",") if k.strip()]
    for k in kinds:
        if k not in KINDS:
            raise click.BadParameter(f"unknown diagram kind {k!r} (choose from {KINDS})")
    if not kinds:
        raise click.BadParameter("at least one diagram kind required")
    return kinds


def _parse_essential(text: str) -> tuple[str, float | None]:
    if text == "drop":
        return "drop", None
    if text.startswith("cap:"):
        value = text.split(":", 1)[1]
        cap = math.inf if value == "inf" else float(value)
        return "cap", cap
    raise click.BadParameter("essential must be 'drop' or 'cap:<value>'")


def _parse_sweep_directions(spec: str) -> list[str]:
    if spec == "all":
        return list(builders.SWEEP_DIRECTIONS)
    dirs = [d.strip().upper() for d in spec.split(",") if d.strip()]
    for d in dirs:
        if d not in builders.SWEEP_DIRECTIONS:
            raise click.BadParameter(f"unknown sweep direction {d!r}")
    return dirs


def _resolve_filtration(filtration: str, input_path: Path) -> str:
    if filtration != "auto":
        return filtration
    name = input_path.name
    if name.endswith(".phc"):
        return "complex"
    if input_path.is_dir() or name == synth.MANIFEST_NAME:
        return "rips"
    if ".idx" in name or "ubyte" in name:
        return "sweep:all"
    return "rips"


def _iter_entries(input_path: Path, filtration: str, labels_path, limit, offset):
    """Yield (entry_id, label, loader) with loader() -> raw input array/path.

    limit/offset select an entry window for multi-entry inputs (dataset
    manifests, IDX image files).
    """

    def window(items):
        stop = None if limit is None else offset + limit
        yield from items[offset:stop]

    if filtration == "complex":
        yield input_path.stem, "", lambda p=input_path: p
        return
    if input_path.is_dir() or input_path.name == synth.MANIFEST_NAME:
        _, entries = synth.read_manifest(input_path)
        for rec in window(entries):
            yield (
                f"entry_{rec['id']}",
                rec.get("label", ""),
                functools.partial(synth.load_entry_points, rec),
            )
        return
    name = input_path.name
    if ".idx" in name or "ubyte" in name:
        images = builders.load_idx_images(input_path)
        labels = None
        if labels_path:
            labels = builders.load_idx_labels(labels_path)
            if len(labels) != len(images):
                raise ValueError("label count does not match image count")
        for i in window(range(len(images))):
            label = str(int(labels[i])) if labels is not None else ""
            yield f"img_{i:05d}", label, functools.partial(lambda k: images[k], i)
        return
    if filtration.startswith("sweep"):
        yield input_path.stem, "", lambda p=input_path: builders.load_image_csv(p)
        return
    yield input_path.stem, "", lambda p=input_path: builders.load_point_cloud(p)


def _build_complexes(raw, filtration, *, max_dim, threshold, activity_threshold,
                     edges, axis):
    """One (source, complex) per filtration the entry feeds."""
    if filtration == "complex":
        return [("complex", builders.import_complex(raw))]
    if filtration == "rips":
        return [("rips", builders.build_rips(raw, max_dim, threshold))]
    if filtration.startswith("sweep"):
        spec = filtration.split(":", 1)[1] if ":" in filtration else "all"
        img = np.asarray(raw, dtype=float)
        out = []
        for d in _parse_sweep_directions(spec):
            values = builders.sweep_image(img, d, activity_threshold)
            out.append((f"sweep:{d}", builders.build_cubical_lower_star(values)))
        return out
    if filtration.startswith("height"):
        axis_spec = filtration.split(":", 1)[1] if ":" in filtration else str(axis)
        if edges is None:
            raise ValueError("height filtration needs --edges")
        edge_list = np.loadtxt(edges, delimiter=",", dtype=int, ndmin=2)
        return [("height", builders.build_height_graph(raw, edge_list, int(axis_spec)))]
    raise ValueError(f"unknown filtration {filtration!r}")


@main.command("diagram")
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.option("--kind", "kinds_text", default="fr", show_default=True,
              help="comma list from fr,l1,nnb,ap")
@click.option("--filtration", default="auto", show_default=True,
              help="rips | sweep:<dirs|all> | height:<axis> | complex")
@click.option("--max-dim", type=click.IntRange(min=0), default=2, show_default=True)
@click.option("--threshold", type=float, default=None,
              help="Rips scale cutoff (default: max pairwise distance)")
@click.option("--activity-threshold", type=float, default=0.0, show_default=True)
@click.option("--drop-ephemeral/--keep-ephemeral", default=True, show_default=True)
@click.option("--essential", "essential_text", default="drop", show_default=True,
              help="drop | cap:<value|inf>")
@click.option("--edges", type=click.Path(exists=True), default=None,
              help="edge list CSV for height filtrations")
@click.option("--labels", "labels_path", type=click.Path(exists=True), default=None)
@click.option("--limit", type=click.IntRange(min=1), default=None)
@click.option("--offset", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False), required=True)
@_cli_errors
def cmd_diagram(input_path, kinds_text, filtration, max_dim, threshold,
                activity_threshold, drop_ephemeral, essential_text, edges,
                labels_path, limit, offset, threads, out_dir):
    """Compute diagrams for clouds, images, or exchange-format complexes."""
    kinds = _parse_kinds(kinds_text)
    essential, cap = _parse_essential(essential_text)
    ephemeral = "drop" if drop_ephemeral else "keep"
    filtration = _resolve_filtration(filtration, input_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    entries = list(_iter_entries(input_path, filtration, labels_path, limit, offset))
    if not entries:
        raise ValueError("no entries found in input")

    def process(item):
        entry_id, label, loader = item
        complexes = _build_complexes(
            loader(), filtration, max_dim=max_dim, threshold=threshold,
            activity_threshold=activity_threshold, edges=edges, axis=0,
        )
        keys = []
        per_kind = {}
        for kind in kinds:
            rows = []
            for source, cx in complexes:
                matrix = boundary_matrix(cx)
                rows.append((source, extract_pairs(matrix, kind), cx))
            per_kind[kind] = rows
        for source, cx in complexes:
            top = cx.max_dim()
            for deg in range(top) if top >= 1 else [0]:
                keys.append(f"{source}/{deg}")
        files = {}
        counts = {}
        for kind in kinds:
            path = out / f"{entry_id}.{kind}.csv"
            write_diagram_csv(
                path, per_kind[kind],
                ephemeral=ephemeral, essential=essential, cap=cap,
            )
            files[kind] = path.name
            for source, pairs, cx in per_kind[kind]:
                values = cx.values()
                for i, j, deg in pairs.pairs:
                    if ephemeral == "drop" and values[i] == values[j]:
                        continue
                    counts[(kind, deg)] = counts.get((kind, deg), 0) + 1
        return entry_id, label, keys, files, counts

    results = _pmap(process, entries, _thread_count(threads))

    parser = configparser.ConfigParser()
    parser["diagrams"] = {
        "input": str(input_path),
        "filtration": filtration,
        "kinds": ",".join(kinds),
        "ephemeral": ephemeral,
        "essential": essential_text,
        "n_entries": str(len(results)),
        "keys": ",".join(results[0][2]),
    }
    totals: dict[tuple[str, int], int] = {}
    for entry_id, label, keys, files, counts in results:
        section = {"label": label, "keys": ",".join(keys)}
        section.update(files)
        parser[f"entry:{entry_id}"] = section
        for key, n in counts.items():
            totals[key] = totals.get(key, 0) + n
    index_path = out / INDEX_NAME
    with open(index_path, "w", encoding="utf-8") as fh:
        parser.write(fh)
    for kind in kinds:
        degs = sorted(d for k, d in totals if k == kind)
        parts = [f"degree {d}: {totals[(kind, d)]}" for d in degs] or ["no pairs"]
        click.echo(f"pairs[{kind}] " + ", ".join(parts))
    click.echo(f"wrote {len(results)} entries to {index_path}")


# ---------------------------------------------------------------------------
# vectorize
# ---------------------------------------------------------------------------


def _config_for_key(parser: configparser.ConfigParser, key: str):
    if not parser.has_section(key) and not parser.has_section("default"):
        raise ValueError(f"config has neither a [default] nor a [{key}] section")
    merged = dict(parser["default"]) if parser.has_section("default") else {}
    if parser.has_section(key):
        merged.update(parser[key])
    method = merged.get("method", "pi").lower()
    if method == "pi":
        return PIConfig(
            resolution=int(merged.get("resolution", 10)),
            bandwidth=float(merged.get("bandwidth", 0.1)),
            birth_range=(
                float(merged.get("birth_min", 0.0)),
                float(merged.get("birth_max", 1.0)),
            ),
            persistence_range=(
                float(merged.get("pers_min", 0.0)),
                float(merged.get("pers_max", 1.0)),
            ),
            weight=merged.get("weight", "linear"),
            p_max=float(merged["p_max"]) if "p_max" in merged else None,
        )
    if method == "ac":
        d_max = merged.get("d_max", "auto")
        return ACConfig(d_max=None if d_max == "auto" else float(d_max))
    raise ValueError(f"config for {key} has unknown method {method!r}")


def _read_index(index_path: Path):
    parser = configparser.ConfigParser()
    if not parser.read(index_path, encoding="utf-8"):
        raise ValueError(f"cannot read diagrams index {index_path}")
    if "diagrams" not in parser:
        raise ValueError(f"{index_path}: missing [diagrams] section")
    head = dict(parser["diagrams"])
    entries = []
    for section in parser.sections():
        if section.startswith("entry:"):
            rec = dict(parser[section])
            rec["id"] = section.split(":", 1)[1]
            entries.append(rec)
    entries.sort(key=lambda r: r["id"])
    return head, entries


@main.command("vectorize")
@click.argument("index_path", type=click.Path(exists=True, path_type=Path))
@click.option("--config", "config_path", type=click.Path(exists=True), required=True,
              help="INI of vectorizer hyperparameters ([default] + per-key sections)")
@click.option("--kind", "kinds_text", default=None,
              help="subset of the kinds present in the index")
@click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False), required=True)
@_cli_errors
def cmd_vectorize(index_path, config_path, kinds_text, threads, out_dir):
    """Turn diagram CSVs into a feature matrix CSV plus a layout sidecar."""
    if index_path.is_dir():
        index_path = index_path / INDEX_NAME
    head, entries = _read_index(index_path)
    if not entries:
        raise ValueError("diagrams index has no entries")
    index_kinds = head.get("kinds", "").split(",")
    kinds = _parse_kinds(kinds_text) if kinds_text else index_kinds
    for kind in kinds:
        if kind not in index_kinds:
            raise ValueError(f"kind {kind!r} not present in index ({index_kinds})")

    cfg_parser = configparser.ConfigParser()
    if not cfg_parser.read(config_path, encoding="utf-8"):
        raise ValueError(f"cannot read config {config_path}")

    expected_keys = entries[0].get("keys", "").split(",")
    for rec in entries:
        got = rec.get("keys", "").split(",")
        if got != expected_keys:
            missing = sorted(set(expected_keys) ^ set(got))
            raise ValueError(
                f"entry {rec['id']}: diagram keys differ from first entry "
                f"(mismatch: {','.join(missing)})"
            )

    def parse_key(name: str) -> tuple[str, int]:
        source, _, deg = name.rpartition("/")
        return source, int(deg)

    configs = {parse_key(k): _config_for_key(cfg_parser, k) for k in expected_keys}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = index_path.parent

    def entry_vector(args):
        rec, kind = args
        if kind not in rec:
            raise ValueError(f"entry {rec['id']}: no diagram file for kind {kind!r}")
        found = read_diagram_csv(base / rec[kind])
        diagrams = []
        for name in expected_keys:
            key = parse_key(name)
            dg = found.get(key)
            if dg is None:
                dg = Diagram(points=(), degree=key[1], source=key[0])
            diagrams.append(dg)
        unexpected = set(found) - {parse_key(k) for k in expected_keys}
        if unexpected:
            src, deg = sorted(unexpected)[0]
            raise ValueError(f"entry {rec['id']}: unexpected diagram key {src}/{deg}")
        return vectorize_entry(diagrams, configs)

    threads_n = _thread_count(threads)
    for kind in kinds:
        vectors = _pmap(entry_vector, [(rec, kind) for rec in entries], threads_n)
        labels = [rec.get("label", "") for rec in entries]
        features_path = out / f"features_{kind}.csv"
        write_feature_csv(features_path, vectors, labels)
        clamp_total = sum(v.n_clamped for v in vectors)
        write_layout_sidecar(
            out / f"features_{kind}.layout.ini",
            vectors[0].layout,
            configs,
            n_entries=len(vectors),
            clamp_count=clamp_total,
        )
        click.echo(
            f"{features_path}: {len(vectors)} rows x {len(vectors[0].values)} features"
            f" (+label), {clamp_total} clamped"
        )


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


@main.command("bench")
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.option("--kind", "kinds_text", default="fr,l1,nnb,ap", show_default=True)
@click.option("--filtration", default="auto", show_default=True)
@click.option("--max-dim", type=click.IntRange(min=0), default=2, show_default=True)
@click.option("--threshold", type=float, default=None)
@click.option("--repeats", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--limit", type=click.IntRange(min=1), default=None,
              help="bench at most this many entries")
@click.option("--pi-resolution", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--pi-bandwidth", type=click.FloatRange(min=0, min_open=True), default=0.1,
              show_default=True)
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False), required=True)
@_cli_errors
def cmd_bench(input_path, kinds_text, filtration, max_dim, threshold, repeats,
              limit, pi_resolution, pi_bandwidth, out_dir):
    """Time pipeline stages per entry and diagram kind."""
    kinds = _parse_kinds(kinds_text)
    filtration = _resolve_filtration(filtration, input_path)
    entries = list(_iter_entries(input_path, filtration, None, limit, 0))
    cfg = PIConfig(resolution=pi_resolution, bandwidth=pi_bandwidth)
    records = []
    for entry_id, _, loader in entries:
        raw = loader()
        build = functools.partial(
            _build_one_complex, raw, filtration,
            max_dim=max_dim, threshold=threshold,
        )
        records.extend(
            bench_mod.bench_entry(entry_id, build, kinds, pi_cfg=cfg, repeats=repeats)
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "bench_entries.csv"
    bench_mod.write_bench_csv(csv_path, records)
    click.echo(bench_mod.format_table(records))
    click.echo(f"wrote {csv_path}")


def _build_one_complex(raw, filtration, *, max_dim, threshold):
    built = _build_complexes(
        raw, filtration, max_dim=max_dim, threshold=threshold,
        activity_threshold=0.0, edges=None, axis=0,
    )
    return built[0][1]


# ---------------------------------------------------------------------------
# export-complex
# ---------------------------------------------------------------------------


@main.command("export-complex")
@click.argument("input_path", type=click.Path(exists=True, path_type=Path))
@click.option("--filtration", default="auto", show_default=True,
              help="rips | sweep:<dir> | complex")
@click.option("--max-dim", type=click.IntRange(min=0), default=2, show_default=True)
@click.option("--threshold", type=float, default=None)
@click.option("--activity-threshold", type=float, default=0.0, show_default=True)
@click.option("-o", "--out", "out_path", type=click.Path(dir_okay=False), required=True)
@_cli_errors
def cmd_export_complex(input_path, filtration, max_dim, threshold,
                       activity_threshold, out_path):
    """Build a filtered complex from an input and write the exchange format."""
    filtration = _resolve_filtration(filtration, input_path)
    if filtration == "complex":
        cx = builders.import_complex(input_path)
    elif filtration.startswith("sweep"):
        spec = filtration.split(":", 1)[1] if ":" in filtration else "N"
        dirs = _parse_sweep_directions(spec)
        if len(dirs) != 1:
            raise ValueError("export-complex needs exactly one sweep direction")
        img = builders.load_image_csv(input_path)
        cx = builders.build_cubical_lower_star(
            builders.sweep_image(img, dirs[0], activity_threshold)
        )
    else:
        cloud = builders.load_point_cloud(input_path)
        cx = builders.build_rips(cloud, max_dim, threshold)
    builders.export_complex(cx, out_path)
    click.echo(f"wrote {len(cx)} cells to {out_path}")


if __name__ == "__main__":
    main()
