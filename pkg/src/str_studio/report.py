"""Figure and table rendering for the CLI report path.

Every chart is written next to its delimited data file: the CSV is the
authoritative output, the SVG a rendering of the same numbers.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .counterfactual.search import _sig4
from .explain import Attribution, ImportanceReport, PdpCurve

FIG_SIZE = (7.0, 4.2)


def _finish(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def importance_outputs(report: ImportanceReport, names, out_dir, stem="importance"):
    order = report.ranking()
    rows = [[names[i], repr(float(report.scores[i])), repr(float(report.raw[i]))] for i in order]
    csv_path = write_csv(Path(out_dir) / f"{stem}.csv", ["feature", "score", "raw"], rows)

    fig, ax = plt.subplots(figsize=FIG_SIZE)
    top = order[:15][::-1]
    ax.barh([names[i] for i in top], [report.scores[i] for i in top], color="#4878cf")
    ax.set_xlabel(f"normalized importance ({report.method})")
    ax.set_title("Feature importance")
    svg_path = _finish(fig, Path(out_dir) / f"{stem}.svg")
    return csv_path, svg_path


def pdp_outputs(curve: PdpCurve, out_dir, labels=None, stem=None):
    stem = stem or f"pdp_{curve.feature_name or curve.feature_index}"
    ticks = labels if labels is not None else [repr(float(v)) for v in curve.grid]
    rows = [
        [ticks[i], repr(float(curve.grid[i])), repr(float(curve.averaged_predictions[i]))]
        for i in range(len(curve.grid))
    ]
    csv_path = write_csv(Path(out_dir) / f"{stem}.csv", ["value", "encoded", "mean_prediction"], rows)

    fig, ax = plt.subplots(figsize=FIG_SIZE)
    if labels is not None:
        ax.bar(range(len(labels)), curve.averaged_predictions, color="#4878cf")
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=30, ha="right")
    else:
        ax.plot(curve.grid, curve.averaged_predictions, marker="o", color="#4878cf")
    ax.set_xlabel(curve.feature_name or f"feature {curve.feature_index}")
    ax.set_ylabel("mean prediction")
    ax.set_title(f"Partial dependence: {curve.feature_name}")
    svg_path = _finish(fig, Path(out_dir) / f"{stem}.svg")
    return csv_path, svg_path


def attribution_outputs(attribution: Attribution, names, values, out_dir, stem="attribution"):
    """Waterfall-style horizontal bar chart ordered by |phi|."""
    phi = attribution.contributions
    order = np.argsort(-np.abs(phi), kind="stable")
    rows = []
    for i in order:
        value = values[i]
        rows.append([names[i], "" if value is None else str(value), repr(float(phi[i]))])
    csv_path = write_csv(Path(out_dir) / f"{stem}.csv", ["feature", "value", "phi"], rows)

    shown = [i for i in order if phi[i] != 0][:15] or list(order[:5])
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ys = range(len(shown))
    colors = ["#d1495b" if phi[i] < 0 else "#2e8b57" for i in shown]
    ax.barh(list(ys), [phi[i] for i in shown], color=colors)
    ax.set_yticks(list(ys))
    labels = []
    for i in shown:
        value = values[i]
        labels.append(names[i] if value is None else f"{names[i]} = {value}")
    ax.set_yticklabels(labels)
    ax.invert_yaxis()
    ax.axvline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("contribution to forecast")
    ax.set_title(
        f"base {attribution.base_value:.4f} → forecast {attribution.predicted:.4f}"
    )
    svg_path = _finish(fig, Path(out_dir) / f"{stem}.svg")
    return csv_path, svg_path


def sweep_outputs(points: list[dict], feature_name, out_dir, stem=None):
    stem = stem or f"whatif_{feature_name}"
    has_interval = points and "lo" in points[0]
    header = ["value", "prediction"] + (["lo", "hi"] if has_interval else []) + ["is_original"]
    rows = []
    for p in points:
        label = p.get("label", _sig4(p["value"]))
        row = [label, repr(float(p["prediction"]))]
        if has_interval:
            row += [repr(float(p["lo"])), repr(float(p["hi"]))]
        row.append("yes" if p["is_original"] else "")
        rows.append(row)
    csv_path = write_csv(Path(out_dir) / f"{stem}.csv", header, rows)

    fig, ax = plt.subplots(figsize=FIG_SIZE)
    xs = range(len(points))
    preds = [p["prediction"] for p in points]
    if has_interval:
        lo = [p["prediction"] - p["lo"] for p in points]
        hi = [p["hi"] - p["prediction"] for p in points]
        ax.errorbar(list(xs), preds, yerr=[lo, hi], fmt="o", capsize=3, color="#4878cf")
    else:
        ax.plot(list(xs), preds, marker="o", color="#4878cf")
    for i, p in enumerate(points):
        if p["is_original"]:
            ax.scatter([i], [p["prediction"]], color="#d1495b", zorder=3, label="current")
            ax.legend()
            break
    ax.set_xticks(list(xs))
    ax.set_xticklabels([p.get("label", _sig4(p["value"])) for p in points], rotation=30, ha="right")
    ax.set_xlabel(feature_name)
    ax.set_ylabel("forecast")
    ax.set_title(f"What-if sweep: {feature_name}")
    svg_path = _finish(fig, Path(out_dir) / f"{stem}.svg")
    return csv_path, svg_path


def histogram_outputs(summary_groups: list[dict], out_dir, stem="summary"):
    rows = []
    for g in summary_groups:
        rows.append(
            [
                g["group"],
                g["count"],
                "" if g["mean_str"] is None else repr(g["mean_str"]),
                "" if g["median_str"] is None else repr(g["median_str"]),
            ]
        )
    csv_path = write_csv(Path(out_dir) / f"{stem}.csv", ["group", "count", "mean_str", "median_str"], rows)

    fig, ax = plt.subplots(figsize=FIG_SIZE)
    width = 0.8 / max(1, len(summary_groups))
    centers = np.arange(10)
    for gi, g in enumerate(summary_groups):
        counts = g["histogram"]["counts"]
        ax.bar(centers + gi * width, counts, width=width, label=g["group"])
    ax.set_xticks(centers + 0.4 - width / 2)
    ax.set_xticklabels([f"{b / 10:.1f}" for b in range(10)])
    ax.set_xlabel("STR bin")
    ax.set_ylabel("products")
    ax.set_title("STR distribution by group")
    if len(summary_groups) <= 10:
        ax.legend(fontsize=8)
    svg_path = _finish(fig, Path(out_dir) / f"{stem}.svg")
    return csv_path, svg_path
