"""Command line interface.

Exit codes for ``recover``: 0 converged, 2 finished without convergence
(outputs are still written), 1 input error.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import apps, palette as palette_mod, report, synth
from .colormapping import read_field, read_image, write_field, write_image
from .metrics import EVAL_COLUMNS, evaluate_corpus
from .recovery import OptimizerConfig, RecoveryError, RecoveryResult, recover as run_recovery
from .serialize import dump_json, load_json, round_floats
from .spline import load_colormap, save_colormap


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Recover, adjust, and transfer colormaps of scalar-field images."""


@main.command(name="recover")
@click.option("--input", "input_path", required=True, help="Input visualization PNG.")
@click.option("--out-cmap", required=True, help="Recovered colormap JSON path.")
@click.option("--out-field", required=True, help="Recovered field CSV path.")
@click.option("--iters", type=int, default=None, help="Optimization iterations.")
@click.option("--lr", type=float, default=None, help="Learning rate.")
@click.option("--seed", type=int, default=None, help="Seed recorded in the run config.")
@click.option("--trace", "trace_path", default=None,
              help="Write one loss-report JSON object per iteration, plus a figure.")
@click.option("--config", "config_path", default=None, help="Optimizer config JSON file.")
def recover_command(input_path, out_cmap, out_field, iters, lr, seed, trace_path, config_path):
    """Recover colormap and field from a single visualization image."""
    try:
        image = read_image(input_path)
    except FileNotFoundError:
        _fail(f"input image not found: {input_path}")
    except Exception as exc:  # noqa: BLE001
        _fail(f"cannot decode input image {input_path}: {exc}")

    config_data = {}
    if config_path is not None:
        try:
            config_data = load_json(config_path)
        except Exception as exc:  # noqa: BLE001
            _fail(f"cannot read config {config_path}: {exc}")
    if iters is not None:
        config_data["iterations"] = iters
    if lr is not None:
        config_data["learning_rate"] = lr
    if seed is not None:
        config_data["seed"] = seed
    try:
        config = OptimizerConfig.from_dict(config_data)
    except (TypeError, ValueError) as exc:
        _fail(f"bad optimizer config: {exc}")

    try:
        result = run_recovery(image, config)
    except RecoveryError as exc:
        _fail(str(exc))

    save_colormap(result.cmap, out_cmap)
    write_field(result.field, out_field)
    if trace_path is not None:
        with open(trace_path, "w") as fh:
            for entry in result.trace:
                fh.write(json.dumps(round_floats(entry.to_dict())) + "\n")
        report.save_trace_figure(result.trace, report.figure_path_for(trace_path))
    click.echo(
        f"recovered {result.cmap.n_points} control points in {len(result.trace)} iterations "
        f"(converged: {result.converged}, direction: {result.direction})"
    )
    sys.exit(0 if result.converged else 2)


def _load_result_dir(result_dir: str) -> RecoveryResult:
    directory = Path(result_dir)
    cmap_path = directory / "cmap.json"
    field_path = directory / "field.csv"
    if not field_path.exists():
        _fail(f"no field.csv in result directory {result_dir}")
    if not cmap_path.exists():
        _fail(f"no cmap.json in result directory {result_dir}")
    return RecoveryResult(
        cmap=load_colormap(cmap_path),
        field=read_field(field_path),
        trace=[],
        converged=True,
        direction="canonical",
    )


@main.command()
@click.option("--result", "result_dir", required=True,
              help="Directory with a recovery's cmap.json and field.csv.")
@click.option("--cmap", "cmap_path", required=True, help="Replacement colormap JSON.")
@click.option("--out", "out_path", required=True, help="Output PNG.")
def recolor(result_dir, cmap_path, out_path):
    """Re-render a recovered field under a different colormap."""
    result = _load_result_dir(result_dir)
    try:
        new_cmap = load_colormap(cmap_path)
    except Exception as exc:  # noqa: BLE001
        _fail(f"cannot load colormap {cmap_path}: {exc}")
    write_image(apps.adjust(result, new_cmap), out_path)
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--cmap", "cmap_path", required=True, help="Colormap JSON.")
@click.option("--field", "field_path", required=True, help="Field CSV to render.")
@click.option("--out", "out_path", required=True, help="Output PNG.")
def transfer(cmap_path, field_path, out_path):
    """Render new data under a (recovered) colormap."""
    try:
        cmap = load_colormap(cmap_path)
        field = read_field(field_path)
    except Exception as exc:  # noqa: BLE001
        _fail(str(exc))
    write_image(apps.transfer(cmap, field), out_path)
    click.echo(f"wrote {out_path}")


@main.command(name="synth")
@click.option("--cmaps", "cmap_dir", required=True,
              help="Directory of colormap JSON/CSV files, or 'bundled'.")
@click.option("--specs", "specs_path", required=True, help="JSON list of field specs.")
@click.option("--out", "out_dir", required=True, help="Corpus output directory.")
def synth_command(cmap_dir, specs_path, out_dir):
    """Render a synthetic (image, colormap, field) corpus with a manifest."""
    if cmap_dir == "bundled":
        cmaps = synth.bundled_colormaps()
    else:
        if not Path(cmap_dir).is_dir():
            _fail(f"not a directory: {cmap_dir}")
        cmaps = synth.load_colormap_library(cmap_dir)
    try:
        spec_data = load_json(specs_path)
        specs = [synth.FieldSpec.from_dict(d) for d in spec_data]
    except Exception as exc:  # noqa: BLE001
        _fail(f"cannot read field specs {specs_path}: {exc}")
    try:
        manifest = synth.make_corpus(cmaps, specs, out_dir)
    except ValueError as exc:
        _fail(str(exc))
    click.echo(f"wrote {len(manifest['entries'])} corpus entries to {out_dir}")


@main.command(name="eval")
@click.option("--manifest", "manifest_path", required=True, help="Corpus manifest JSON.")
@click.option("--results", "results_dir", required=True,
              help="Directory with <id>/cmap.json recovery results.")
@click.option("--out", "out_path", required=True, help="Output CSV.")
@click.option("--figure/--no-figure", default=True,
              help="Also render a summary figure next to the CSV.")
def eval_command(manifest_path, results_dir, out_path, figure):
    """Score recovered colormaps against corpus ground truth."""
    try:
        manifest = load_json(manifest_path)
    except Exception as exc:  # noqa: BLE001
        _fail(f"cannot read manifest {manifest_path}: {exc}")
    manifest_dir = Path(manifest_path).parent
    rows, mean_row, skipped = evaluate_corpus(manifest, manifest_dir, results_dir)
    for entry_id in skipped:
        click.echo(f"missing result for {entry_id}; skipped", err=True)
    with open(out_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=EVAL_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(round_floats(row))
        if mean_row is not None:
            writer.writerow(round_floats(mean_row))
    if figure and rows:
        pairs = []
        for entry in manifest["entries"]:
            result_path = Path(results_dir) / entry["id"] / "cmap.json"
            if result_path.exists():
                pairs.append(
                    (entry["id"], load_colormap(manifest_dir / entry["cmap"]),
                     load_colormap(result_path))
                )
        report.save_eval_figure(rows, pairs, report.figure_path_for(out_path, "_summary"))
    click.echo(f"wrote {len(rows)} rows to {out_path}")


@main.command(name="palette")
@click.option("--result", "result_dir", required=True,
              help="Directory with a recovery's cmap.json and field.csv.")
@click.option("--eps", type=float, default=0.02, help="DBSCAN value-space radius.")
@click.option("--min-pts", type=int, default=None, help="DBSCAN density threshold.")
@click.option("--out", "out_path", required=True, help="Output palette JSON.")
def palette_command(result_dir, eps, min_pts, out_path):
    """Extract a discrete palette from a recovery result."""
    result = _load_result_dir(result_dir)
    params = palette_mod.DbscanParams(eps=eps, min_pts=min_pts)
    try:
        pal = palette_mod.extract_palette(result, params)
    except palette_mod.PaletteError as exc:
        _fail(str(exc))
    dump_json(pal.to_dict(), out_path)
    click.echo(f"wrote {len(pal.entries)} palette entries to {out_path}")


@main.command(name="colormaps")
@click.option("--out", "out_dir", required=True, help="Directory for the bundled library.")
def colormaps_command(out_dir):
    """Export the bundled colormap library as JSON files."""
    paths = synth.export_bundled_colormaps(out_dir)
    click.echo(f"wrote {len(paths)} colormaps to {out_dir}")


@main.command()
@click.option("--port", type=int, default=8077, help="Listen port.")
@click.option("--host", default="127.0.0.1", help="Bind address.")
@click.option("--workdir", required=True, help="Directory for persisted job results.")
def serve(port, host, workdir):
    """Run the HTTP recovery service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(workdir), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
