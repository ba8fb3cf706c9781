"""Command line interface.

Exit codes: 0 on success (including batches with isolated per-image
failures), 2 for manifest problems, 3 for configuration problems.
"""

import csv
import json
import sys
from pathlib import Path

import click

from ._version import __version__
from .config import load_config
from .curation import CurationConfig, threshold_probmap, topology_filter
from .errors import BadThreshold, ConfigError, FundusQuantError, ManifestError
from .manifest import load_manifest, load_pairs
from .pipeline import run_batch
from .pngio import read_mask, read_probmap, write_mask
from .report import from_json
from .segmetrics import METRICS, MetricResult, aggregate, hd95, micro_average

EXIT_MANIFEST = 2
EXIT_CONFIG = 3


def _fail(err: FundusQuantError) -> "SystemExit":
    click.echo(f"error [{err.code}]: {err}", err=True)
    if isinstance(err, ManifestError):
        return SystemExit(EXIT_MANIFEST)
    if isinstance(err, ConfigError):
        return SystemExit(EXIT_CONFIG)
    return SystemExit(1)


@click.group()
@click.version_option(version=__version__, prog_name="fundusquant")
def main():
    """Quantitative retinal biomarkers from segmentation masks."""


@main.command()
@click.option("--manifest", "-m", required=True, type=click.Path(), help="Image manifest (JSON or CSV).")
@click.option("--config", "-c", "config_path", type=click.Path(), default=None,
              help="TOML config; FUNDUSQUANT_CONFIG is the fallback.")
@click.option("--out", "-o", required=True, type=click.Path(), help="Output directory.")
@click.option("--workers", "-w", default=1, show_default=True, help="Parallel worker processes.")
@click.option("--overlays", is_flag=True, help="Also render per-image overlays.")
def quantify(manifest, config_path, out, workers, overlays):
    """Run the biomarker pipeline over a manifest of images."""
    try:
        cfg = load_config(config_path)
    except ConfigError as e:
        raise _fail(e)
    try:
        summary = run_batch(manifest, cfg, out, workers=max(1, workers), overlays=overlays)
    except ManifestError as e:
        raise _fail(e)
    click.echo(f"{summary['n_ok']}/{summary['n_images']} images quantified, "
               f"{summary['n_failed']} failed; reports in {out}")


METRICS_CSV_COLUMNS = ("dataset", "image_id", "class", "metric", "value", "status")


def _metric_row(pair, name: str, res: MetricResult) -> dict:
    return {
        "dataset": pair.dataset,
        "image_id": pair.image_id,
        "class": pair.class_name,
        "metric": name,
        "value": "" if res.value is None else json.dumps(res.value),
        "status": res.status if res.ok else f"undefined({res.reason})",
    }


@main.command()
@click.option("--pairs", "-p", required=True, type=click.Path(),
              help="Pairs manifest (JSON with a 'pairs' array, or CSV).")
@click.option("--out", "-o", required=True, type=click.Path(), help="Long-form CSV output path.")
@click.option("--micro", is_flag=True,
              help="Add micro-averaged summary rows (hd95 stays macro; it has no pooled form).")
def metrics(pairs, out, micro):
    """Segmentation quality metrics (dsc, jac, precision, hd95, cldice)."""
    try:
        pair_list = load_pairs(pairs)
    except ManifestError as e:
        raise _fail(e)
    rows = []
    per_group: dict = {}
    arrays: dict = {}
    try:
        for pair in pair_list:
            pred = read_mask(pair.pred)
            gt = read_mask(pair.gt)
            group = (pair.dataset, pair.class_name)
            arrays.setdefault(group, []).append((pred, gt))
            for name, fn in METRICS.items():
                res = fn(pred, gt, scale=pair.um_per_px or 1.0) if name == "hd95" else fn(pred, gt)
                rows.append(_metric_row(pair, name, res))
                per_group.setdefault((group, name), []).append(res)
    except FundusQuantError as e:
        raise _fail(e)

    for (group, name), results in sorted(per_group.items()):
        dataset, class_name = group
        try:
            agg = aggregate(results)
            value = json.dumps(agg.mean)
            status = f"ok(n={agg.n_ok},undefined={agg.n_undefined})"
        except FundusQuantError as e:
            value = ""
            status = f"undefined({e.code})"
        rows.append({"dataset": dataset, "image_id": "__macro__", "class": class_name,
                     "metric": name, "value": value, "status": status})
        if micro and name != "hd95":
            res = micro_average(name, arrays[group])
            rows.append({"dataset": dataset, "image_id": "__micro__", "class": class_name,
                         "metric": name,
                         "value": "" if res.value is None else json.dumps(res.value),
                         "status": res.status if res.ok else f"undefined({res.reason})"})

    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRICS_CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    click.echo(f"{len(pair_list)} pairs scored; CSV written to {out}")


@main.command()
@click.option("--manifest", "-m", required=True, type=click.Path(),
              help="Manifest whose entries carry probmaps.")
@click.option("--threshold", "-t", default=0.75, show_default=True,
              help="Confidence cut (strictly greater-than).")
@click.option("--config", "-c", "config_path", type=click.Path(), default=None,
              help="TOML config for the topology rules.")
@click.option("--out", "-o", required=True, type=click.Path(), help="Output directory.")
def curate(manifest, threshold, config_path, out):
    """Threshold probability maps and keep only topology-clean hard masks."""
    try:
        cfg = load_config(config_path)
        entries = load_manifest(manifest)
        if not 0.0 < threshold < 1.0:
            raise BadThreshold(f"threshold must lie in (0, 1), got {threshold}")
    except (ConfigError, ManifestError, BadThreshold) as e:
        raise _fail(e)
    cur = cfg.curation
    rule_cfg = CurationConfig(
        min_largest_frac=cur.min_largest_frac,
        min_component_area=cur.min_component_area,
        max_components=cur.max_components,
        spur_len=cur.spur_len,
        max_spurs=cur.max_spurs,
    )
    out_dir = Path(out)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)
    records = []
    n_accepted = 0
    try:
        for entry in sorted(entries, key=lambda e: e.image_id):
            for class_name in sorted(entry.probmaps):
                prob = read_probmap(entry.probmaps[class_name])
                mask = threshold_probmap(prob, threshold)
                verdict = topology_filter(mask, rule_cfg)
                record = {"image_id": entry.image_id, "class": class_name,
                          "threshold": threshold, **verdict.to_dict()}
                records.append(record)
                if verdict.accepted:
                    n_accepted += 1
                    name = f"{entry.image_id}_{class_name.lower().replace(' ', '_')}.png"
                    write_mask(str(out_dir / "masks" / name), mask)
    except FundusQuantError as e:
        raise _fail(e)
    (out_dir / "verdicts.json").write_text(
        json.dumps({"threshold": threshold, "records": records}, indent=2) + "\n",
        encoding="utf-8")
    click.echo(f"{n_accepted}/{len(records)} probability maps accepted; "
               f"masks and verdicts in {out}")


@main.command()
@click.option("--manifest", "-m", required=True, type=click.Path(), help="Image manifest.")
@click.option("--reports", "-r", required=True, type=click.Path(),
              help="Directory holding <image_id>.json reports.")
@click.option("--config", "-c", "config_path", type=click.Path(), default=None)
@click.option("--out", "-o", required=True, type=click.Path(), help="Output directory.")
def overlay(manifest, reports, config_path, out):
    """Render color overlays for images that already have reports."""
    from .overlay import render_overlay
    try:
        cfg = load_config(config_path)
        entries = load_manifest(manifest)
    except (ConfigError, ManifestError) as e:
        raise _fail(e)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    n = 0
    try:
        for entry in sorted(entries, key=lambda e: e.image_id):
            report_path = Path(reports) / f"{entry.image_id}.json"
            if not report_path.exists():
                continue
            rep = from_json(report_path.read_text(encoding="utf-8"))
            render_overlay(entry, rep, str(out_dir / f"{entry.image_id}.png"), cfg=cfg)
            n += 1
    except FundusQuantError as e:
        raise _fail(e)
    click.echo(f"{n} overlays written to {out}")


if __name__ == "__main__":
    main()
