"""phml: run experiments described by an INI spec file."""

from __future__ import annotations

import functools
from pathlib import Path

import click

from .cv import run_cv_experiment, write_cv_report
from .importance import feature_importance_experiment, write_importance_report
from .plots import emit_plots
from .specfile import load_spec


def _cli_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, OSError, AssertionError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


@click.group()
def main():
    """Random-forest experiments over diagram feature matrices."""


@main.command("cv")
@click.argument("spec_path", type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False), required=True)
@_cli_errors
def cmd_cv(spec_path, out_dir):
    """Cross-validated metric per diagram kind."""
    spec = load_spec(spec_path)
    results = run_cv_experiment(spec)
    report = write_cv_report(results, spec, out_dir)
    for kind, res in results.items():
        click.echo(f"{kind}: {res.metric} = {res.mean:.4f} +- {res.std:.4f}")
    click.echo(f"wrote {report}")


@main.command("importance")
@click.argument("spec_path", type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False), required=True)
@_cli_errors
def cmd_importance(spec_path, out_dir):
    """PCA + permutation feature-importance comparison between kinds."""
    spec = load_spec(spec_path)
    report = feature_importance_experiment(spec)
    path = write_importance_report(report, out_dir)
    for kind, rep in report.per_kind.items():
        pair = "" if rep.pair_accuracy is None else f"  pair acc {rep.pair_accuracy:.3f}"
        click.echo(f"{kind}: acc {rep.accuracy:.3f}{pair}  top PC{rep.top_component + 1}")
    click.echo(f"wrote {path}")


@main.command("plots")
@click.argument("results_dir", type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False), required=True)
@_cli_errors
def cmd_plots(results_dir, out_dir):
    """Render bar charts and heatmaps for result files."""
    for path in emit_plots(results_dir, out_dir):
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
