"""Command-line pipeline: synth/ingest -> train/tune -> evaluate ->
explain/importance/pdp/whatif/counterfactual -> serve/export-report.

Every subcommand wraps one engine operation and writes its artifacts
(CSV/JSON, with SVG renderings beside them) into an output directory.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

import click
import numpy as np

from .counterfactual import CfRequest, GaConfig, render_diff_markdown, solve_counterfactual, what_if_sweep
from .errors import StrStudioError
from .explain import gain_importance, global_shap_importance, pdp, shap_values
from .explain.dependence import default_grid_for
from .gbdt import TrainConfig, grid_search, rmse, train
from .ingest import (
    SyntheticConfig,
    apply_taxonomy,
    assemble_dataset,
    encode,
    export_dataset,
    fit_encoder,
    generate_synthetic_catalog,
    import_dataset,
    load_inventory,
    load_products,
    load_sales,
    load_stores,
    load_taxonomy,
    reference_category_sizes,
    save_catalog,
    split,
)
from .ingest.types import LAUNCH_WEEK_FEATURE, PRICE_FEATURE
from . import report as report_mod
from .service import create_app, load_engine_state
from .service.views import catalog_summary, product_view
from .uncertainty import (
    fit_distribution_estimator,
    load_estimator,
    prediction_interval,
    predict_distribution,
    save_estimator,
)

DEFAULT_SPLIT = (0.6, 0.2, 0.2)


def _load_config(path) -> dict:
    if path is None:
        return {}
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return json.loads(text)
    try:
        import tomllib  # py311+
    except ModuleNotFoundError:
        import tomli as tomllib
    return tomllib.loads(text)


def _data_dir_option(required=True):
    return click.option(
        "--data-dir",
        envvar="STR_STUDIO_DATA",
        required=required,
        type=click.Path(path_type=Path),
        help="Directory with the catalog CSVs (env fallback: STR_STUDIO_DATA).",
    )


def _train_config(section: dict, seed: int) -> TrainConfig:
    allowed = {f.name for f in dataclass_fields(TrainConfig)}
    kwargs = {k: v for k, v in section.items() if k in allowed}
    kwargs.setdefault("seed", seed)
    return TrainConfig(**kwargs)


@click.group()
def cli():
    """Explainable sell-through-rate forecasting workbench."""


@cli.command()
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option(
    "--profile",
    default="small",
    show_default=True,
    type=click.Choice(["small", "paper-categories"]),
    help="paper-categories mirrors the 8 Spring-Summer category sizes (4630 products).",
)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
def synth(out, seed, profile, config_path):
    """Generate a synthetic catalog with known ground truth."""
    section = _load_config(config_path).get("synth", {})
    if profile == "paper-categories":
        section.setdefault("category_sizes", reference_category_sizes())
    allowed = {f.name for f in dataclass_fields(SyntheticConfig)}
    cfg = SyntheticConfig(**{k: v for k, v in section.items() if k in allowed})
    products, sales, inventory, stores, truth = generate_synthetic_catalog(cfg, seed=seed)
    paths = save_catalog(out, products, sales, inventory, stores)
    truth_rows = [
        [pid, sold, received, repr(t)] for pid, (sold, received, t) in sorted(truth.realized.items())
    ]
    report_mod.write_csv(Path(out) / "truth.csv", ["product_id", "sold_4w", "received_4w", "str"], truth_rows)
    click.echo(f"wrote {len(products)} products, {len(sales)} sales rows to {out}")
    for name, p in paths.items():
        click.echo(f"  {name}: {p}")


@cli.command()
@_data_dir_option()
@click.option("--out", type=click.Path(path_type=Path), help="Defaults to the data dir.")
@click.option("--taxonomy", type=click.Path(exists=True, path_type=Path))
@click.option("--horizon", default=4, show_default=True, type=int)
@click.option("--season-year", type=int, default=None)
def ingest(data_dir, out, taxonomy, horizon, season_year):
    """Load the four databases and build the encoded STR dataset."""
    out = out or data_dir
    products = load_products(data_dir / "products.csv")
    if taxonomy:
        products = apply_taxonomy(products, load_taxonomy(taxonomy))
    sales = load_sales(data_dir / "sales.csv")
    inventory = load_inventory(data_dir / "inventory.csv")
    load_stores(data_dir / "stores.csv")  # validated even though unused here
    schema = fit_encoder(products)
    dataset = assemble_dataset(products, sales, inventory, schema, horizon=horizon, season_year=season_year)
    export_dataset(dataset, Path(out) / "dataset.csv")
    if dataset.exclusions:
        rows = [[e.product_id, e.reason] for e in dataset.exclusions]
        report_mod.write_csv(Path(out) / "exclusions.csv", ["product_id", "reason"], rows)
    click.echo(
        f"dataset: {len(dataset)} rows, d={schema.d} features, {len(dataset.exclusions)} excluded"
    )


@cli.command("train")
@_data_dir_option()
@click.option("--model-dir", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
@click.option("--clamp-unit/--no-clamp-unit", default=True, show_default=True,
              help="Clamp prediction intervals to [0, 1] (STR targets).")
def train_cmd(data_dir, model_dir, seed, config_path, clamp_unit):
    """Train the distribution estimator (base + error models)."""
    config = _load_config(config_path)
    dataset = import_dataset(data_dir / "dataset.csv")
    split_cfg = config.get("split", {})
    fractions = tuple(split_cfg.get("fractions", DEFAULT_SPLIT))
    split_seed = split_cfg.get("seed", seed)
    train_base, train_error, test = split(dataset, fractions, split_seed)
    base_cfg = _train_config(config.get("train", {}).get("base", {"n_rounds": 150, "max_depth": 4,
                                                                  "learning_rate": 0.08}), seed)
    error_cfg = _train_config(config.get("train", {}).get("error", {"n_rounds": 100, "max_depth": 3,
                                                                    "learning_rate": 0.08}), seed)
    estimator = fit_distribution_estimator(train_base, train_error, base_cfg, error_cfg, clamp_unit=clamp_unit)
    save_estimator(estimator, model_dir)

    test_rmse = rmse(estimator.base_model, test)
    X, y, _ = test.matrices()
    hits = 0
    for i in range(len(y)):
        lo, hi = prediction_interval(estimator, X[i], 0.9)
        hits += int(lo <= y[i] <= hi)
    meta = {
        "split": {"fractions": list(fractions), "seed": split_seed},
        "sizes": {"train_base": len(train_base), "train_error": len(train_error), "test": len(test)},
        "test_rmse": test_rmse,
        "coverage_90": hits / len(y),
        "base_config": base_cfg.to_dict(),
        "error_config": error_cfg.to_dict(),
    }
    (Path(model_dir) / "train_meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    click.echo(f"test RMSE {test_rmse:.4f}, 90% interval coverage {meta['coverage_90']:.3f}")


@cli.command()
@_data_dir_option()
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--k-folds", default=3, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
def tune(data_dir, out, k_folds, seed, config_path):
    """Grid-search hyperparameters with k-fold CV; writes cv_report.json."""
    config = _load_config(config_path)
    dataset = import_dataset(data_dir / "dataset.csv")
    grid = config.get("grid")  # None -> default grid
    cv = grid_search(dataset, grid, k_folds=k_folds, seed=seed)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "cv_report.json").write_text(cv.to_json() + "\n", encoding="utf-8")
    best = cv.entries[cv.chosen_index]
    click.echo(f"evaluated {len(cv.entries)} grid points")
    click.echo(f"chosen: {best.config.to_dict()} (mean RMSE {best.mean_rmse:.4f})")


@cli.command()
@_data_dir_option()
@click.option("--model-dir", required=True, type=click.Path(path_type=Path))
@click.option("--out", type=click.Path(path_type=Path))
def evaluate(data_dir, model_dir, out):
    """Held-out RMSE and interval coverage for a trained estimator."""
    meta = json.loads((Path(model_dir) / "train_meta.json").read_text(encoding="utf-8"))
    dataset = import_dataset(data_dir / "dataset.csv")
    estimator = load_estimator(model_dir)
    _, _, test = split(dataset, tuple(meta["split"]["fractions"]), meta["split"]["seed"])
    test_rmse = rmse(estimator.base_model, test)
    X, y, _ = test.matrices()
    hits = sum(
        1 for i in range(len(y)) if prediction_interval(estimator, X[i], 0.9)[0] <= y[i] <= prediction_interval(estimator, X[i], 0.9)[1]
    )
    result = {"test_rmse": test_rmse, "coverage_90": hits / len(y), "n_test": len(y)}
    click.echo(json.dumps(result, indent=2))
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / "evaluation.json").write_text(json.dumps(result, indent=2) + "\n", encoding="utf-8")


def _load_state(data_dir, model_dir):
    return load_engine_state(data_dir, model_dir)


@cli.command()
@_data_dir_option()
@click.option("--model-dir", required=True, type=click.Path(path_type=Path))
@click.option("--product-id", required=True)
@click.option("--out", required=True, type=click.Path(path_type=Path))
def explain(data_dir, model_dir, product_id, out):
    """Local SHAP explanation for one product (CSV + waterfall SVG)."""
    state = _load_state(data_dir, model_dir)
    product = state.products.get(product_id)
    if product is None:
        raise click.ClickException(f"unknown product '{product_id}'")
    instance = encode(product, state.schema)
    attribution = shap_values(state.base_model, instance)
    names = state.schema.feature_names
    from .ingest.encoding import decode_instance

    decoded = decode_instance(state.schema, instance.values)
    values = [decoded[n] for n in names]
    csv_path, svg_path = report_mod.attribution_outputs(attribution, names, values, out, stem=f"explain_{product_id}")
    payload = attribution.to_dict()
    payload["feature_names"] = names
    (Path(out) / f"explain_{product_id}.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    click.echo(f"prediction {attribution.predicted:.4f} (catalog average {attribution.base_value:.4f})")
    click.echo(f"wrote {csv_path} and {svg_path}")


@cli.command()
@_data_dir_option()
@click.option("--model-dir", required=True, type=click.Path(path_type=Path))
@click.option("--method", default="mean_abs_shap", show_default=True,
              type=click.Choice(["gain", "mean_abs_shap"]))
@click.option("--out", required=True, type=click.Path(path_type=Path))
def importance(data_dir, model_dir, method, out):
    """Global feature importance (CSV + bar chart SVG)."""
    state = _load_state(data_dir, model_dir)
    if method == "gain":
        rep = gain_importance(state.base_model)
    else:
        rep = global_shap_importance(state.base_model, state.dataset)
    csv_path, svg_path = report_mod.importance_outputs(rep, state.schema.feature_names, out, stem=f"importance_{method}")
    click.echo(f"wrote {csv_path} and {svg_path}")


@cli.command("pdp")
@_data_dir_option()
@click.option("--model-dir", required=True, type=click.Path(path_type=Path))
@click.option("--feature", required=True)
@click.option("--points", default=20, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(path_type=Path))
def pdp_cmd(data_dir, model_dir, feature, points, out):
    """Partial dependence curve for one feature (CSV + SVG)."""
    state = _load_state(data_dir, model_dir)
    idx = state.schema.index_of(feature)
    spec = state.schema.features[idx]
    grid = default_grid_for(state.dataset, idx, points=points)
    curve = pdp(state.base_model, state.dataset, idx, grid)
    labels = [spec.label_of(int(v)) for v in curve.grid] if spec.kind == "categorical" else None
    csv_path, svg_path = report_mod.pdp_outputs(curve, out, labels=labels)
    click.echo(f"wrote {csv_path} and {svg_path}")


@cli.command()
@_data_dir_option()
@click.option("--model-dir", required=True, type=click.Path(path_type=Path))
@click.option("--product-id", required=True)
@click.option("--feature", required=True)
@click.option("--values", default=None, help="Comma-separated candidates; defaults to the full grid.")
@click.option("--out", required=True, type=click.Path(path_type=Path))
def whatif(data_dir, model_dir, product_id, feature, values, out):
    """Sweep one feature of a product; forecasts with 90% intervals."""
    state = _load_state(data_dir, model_dir)
    product = state.products.get(product_id)
    if product is None:
        raise click.ClickException(f"unknown product '{product_id}'")
    instance = encode(product, state.schema)
    idx = state.schema.index_of(feature)
    spec = state.schema.features[idx]
    if values is None:
        grid = default_grid_for(state.dataset, idx)
    elif spec.kind == "categorical":
        grid = [float(spec.codes[label.strip()]) for label in values.split(",")]
    else:
        grid = [float(v) for v in values.split(",")]
    points = what_if_sweep(state.estimator, instance, idx, grid, state.schema)
    if spec.kind == "categorical":
        for p in points:
            p["label"] = spec.label_of(int(p["value"]))
    csv_path, svg_path = report_mod.sweep_outputs(points, spec.name, out, stem=f"whatif_{product_id}_{spec.name}")
    click.echo(f"wrote {csv_path} and {svg_path}")


@cli.command()
@_data_dir_option()
@click.option("--model-dir", required=True, type=click.Path(path_type=Path))
@click.option("--request", "request_path", type=click.Path(exists=True, path_type=Path),
              help="JSON request file; overrides the individual flags.")
@click.option("--product-id")
@click.option("--target", type=float)
@click.option("--epsilon", default=0.02, show_default=True, type=float)
@click.option("--freeze", multiple=True, help="Feature glob(s) to hold fixed, e.g. 'color_*'.")
@click.option("--mutable", multiple=True, help="Feature glob(s) allowed to change (overrides default).")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--generations", default=200, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(path_type=Path))
def counterfactual(data_dir, model_dir, request_path, product_id, target, epsilon, freeze,
                   mutable, seed, generations, out):
    """Search a minimal attribute change reaching a target STR."""
    import fnmatch

    state = _load_state(data_dir, model_dir)
    if request_path:
        req_doc = json.loads(Path(request_path).read_text(encoding="utf-8"))
        product_id = req_doc.get("product_id", product_id)
        target = req_doc.get("target", target)
        epsilon = req_doc.get("epsilon", epsilon)
        freeze = tuple(req_doc.get("frozen_features", [])) or freeze
        mutable = tuple(req_doc.get("mutable_features", [])) or mutable
        seed = req_doc.get("seed", seed)
        generations = req_doc.get("generations", generations)
    if product_id is None or target is None:
        raise click.ClickException("--product-id and --target are required (or a --request file)")
    product = state.products.get(product_id)
    if product is None:
        raise click.ClickException(f"unknown product '{product_id}'")
    instance = encode(product, state.schema)

    names = state.schema.feature_names
    if mutable:
        selected = [i for i, n in enumerate(names) if any(fnmatch.fnmatch(n, pat) for pat in mutable)]
    else:
        selected = [i for i, n in enumerate(names) if n != LAUNCH_WEEK_FEATURE]
    if freeze:
        selected = [i for i in selected if not any(fnmatch.fnmatch(names[i], pat) for pat in freeze)]

    negligible = {}
    if PRICE_FEATURE in names:
        negligible[names.index(PRICE_FEATURE)] = 0.001
    req = CfRequest(
        instance=instance,
        target=target,
        mutable_features=selected,
        schema=state.schema,
        epsilon=epsilon,
        ga=GaConfig(seed=seed, generations=generations),
        negligible=negligible,
    )
    result = solve_counterfactual(state.estimator, req)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"counterfactual_{product_id}.json").write_text(result.to_json() + "\n", encoding="utf-8")
    markdown = render_diff_markdown(result)
    (out / f"counterfactual_{product_id}.md").write_text(markdown, encoding="utf-8")
    click.echo(markdown)
    status = "feasible" if result.feasible else "NOT feasible"
    click.echo(f"{status}: forecast {result.predicted:.4f} vs target {target:.4f} "
               f"(distance {result.distance:.3f})")


@cli.command()
@_data_dir_option()
@click.option("--model-dir", required=True, type=click.Path(path_type=Path))
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(data_dir, model_dir, port, host):
    """Run the workbench HTTP API."""
    import uvicorn

    state = _load_state(data_dir, model_dir)
    app = create_app(state)
    uvicorn.run(app, host=host, port=port)


@cli.command("export-report")
@_data_dir_option()
@click.option("--model-dir", required=True, type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--top-features", default=3, show_default=True, type=int)
def export_report(data_dir, model_dir, out, top_features):
    """Bundle importance, PDP curves and sample explanations into Markdown+SVG."""
    state = _load_state(data_dir, model_dir)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    names = state.schema.feature_names
    lines = ["# Sell-through forecast report", ""]
    lines.append(f"Catalog: {len(state.products)} products, {len(state.dataset)} modeled rows.")
    lines.append("")

    groups = catalog_summary(state, "category")
    report_mod.histogram_outputs(groups, out)
    lines += ["## STR distribution by category", "", "![summary](summary.svg)", ""]
    lines.append("| category | products | mean STR | median STR |")
    lines.append("|---|---|---|---|")
    for g in groups:
        mean_s = "-" if g["mean_str"] is None else f"{g['mean_str']:.3f}"
        med_s = "-" if g["median_str"] is None else f"{g['median_str']:.3f}"
        lines.append(f"| {g['group']} | {g['count']} | {mean_s} | {med_s} |")
    lines.append("")

    shap_rep = global_shap_importance(state.base_model, state.dataset)
    gain_rep = gain_importance(state.base_model)
    report_mod.importance_outputs(shap_rep, names, out, stem="importance_mean_abs_shap")
    report_mod.importance_outputs(gain_rep, names, out, stem="importance_gain")
    lines += [
        "## Feature importance",
        "",
        "Mean |SHAP| (default view) and split-gain (advanced view):",
        "",
        "![shap importance](importance_mean_abs_shap.svg)",
        "",
        "![gain importance](importance_gain.svg)",
        "",
    ]

    lines += ["## Partial dependence", ""]
    for idx in shap_rep.ranking()[:top_features]:
        spec = state.schema.features[idx]
        grid = default_grid_for(state.dataset, idx)
        curve = pdp(state.base_model, state.dataset, idx, grid)
        labels = [spec.label_of(int(v)) for v in curve.grid] if spec.kind == "categorical" else None
        report_mod.pdp_outputs(curve, out, labels=labels)
        lines.append(f"![pdp {spec.name}](pdp_{spec.name}.svg)")
        lines.append("")

    strs = state.str_by_product()
    if strs:
        ranked = sorted(strs.items(), key=lambda kv: (-kv[1], kv[0]))
        picks = [("best seller", ranked[0][0]), ("worst seller", ranked[-1][0])]
        lines += ["## Sample product explanations", ""]
        from .ingest.encoding import decode_instance

        for label, pid in picks:
            product = state.products[pid]
            instance = encode(product, state.schema)
            attribution = shap_values(state.base_model, instance)
            decoded = decode_instance(state.schema, instance.values)
            report_mod.attribution_outputs(
                attribution, names, [decoded[n] for n in names], out, stem=f"explain_{pid}"
            )
            lines.append(f"### {label}: {pid} (STR {strs[pid]:.3f})")
            lines.append("")
            lines.append(f"![explanation {pid}](explain_{pid}.svg)")
            lines.append("")

    (out / "report.md").write_text("\n".join(lines), encoding="utf-8")
    click.echo(f"wrote {out / 'report.md'} plus figures")


def main():
    try:
        cli(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(1)
    except StrStudioError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
