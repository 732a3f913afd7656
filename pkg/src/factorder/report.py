"""Rendering of evaluation results: console tables, CSV files, figures.

Reports always come in machine-readable form (JSON plus delimited CSV);
a per-position accuracy figure is rendered next to them so downstream
tooling never scrapes the human table.
"""

from __future__ import annotations

import csv
import io
import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .domain import atomic_write_text
from .evaluation import ComparisonReport, EvaluationReport


def format_accuracy_table(report: EvaluationReport) -> str:
    lines = [
        f"scheme: {report.scheme['scheme']}  folds: {report.k}  "
        f"instances: {report.instance_count}  positions: {report.n}",
        f"{'position':>8}  {'mean':>8}  {'std':>8}",
    ]
    for position in range(report.n):
        lines.append(
            f"{position + 1:>8}  {report.mean_per_position[position]:>8.4f}  "
            f"{report.std_per_position[position]:>8.4f}"
        )
    metrics = report.sequence_metrics
    lines.append(
        "sequence: exact_match {exact_match:.4f}  kendall_tau {kendall_tau:.4f}  "
        "swap_edit_distance {swap_edit_distance:.4f}".format(**metrics)
    )
    return "\n".join(lines)


def format_comparison_table(comparison: ComparisonReport) -> str:
    name_a = comparison.report_a.scheme["scheme"]
    name_b = comparison.report_b.scheme["scheme"]
    lines = [
        f"paired two-tailed t-test, alpha = {comparison.alpha}",
        f"{'position':>8}  {name_a:>12}  {name_b:>12}  {'t':>9}  {'p':>10}  verdict",
    ]
    for position, test in enumerate(comparison.tests):
        mean_a = comparison.report_a.mean_per_position[position]
        mean_b = comparison.report_b.mean_per_position[position]
        verdict = "significant" if test.significant else "-"
        if test.degenerate_variance:
            verdict += " (degenerate variance)"
        lines.append(
            f"{position + 1:>8}  {mean_a:>12.4f}  {mean_b:>12.4f}  "
            f"{test.t:>9.3f}  {test.p:>10.2e}  {verdict}"
        )
    return "\n".join(lines)


def accuracy_csv(report: EvaluationReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["scheme", "fold", "position", "accuracy"])
    name = report.scheme["scheme"]
    for fold, row in enumerate(report.fold_position_accuracy):
        for position, accuracy in enumerate(row):
            writer.writerow([name, fold, position + 1, f"{accuracy:.6f}"])
    return buffer.getvalue()


def comparison_csv(comparison: ComparisonReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["position", "mean_a", "mean_b", "t", "df", "p", "significant"])
    for position, test in enumerate(comparison.tests):
        writer.writerow(
            [
                position + 1,
                f"{comparison.report_a.mean_per_position[position]:.6f}",
                f"{comparison.report_b.mean_per_position[position]:.6f}",
                f"{test.t:.6g}",
                test.df,
                f"{test.p:.6g}",
                int(test.significant),
            ]
        )
    return buffer.getvalue()


def render_accuracy_figure(curves: list[tuple[str, list[float]]], path: str, title: str = "") -> None:
    """Per-position accuracy, one line per scheme, saved as an image."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    positions = range(1, len(curves[0][1]) + 1)
    for label, means in curves:
        ax.plot(positions, means, marker="o", label=label)
    ax.set_xlabel("position")
    ax.set_ylabel("accuracy")
    ax.set_xticks(list(positions))
    ax.set_ylim(-0.02, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    tmp = path + ".tmp"
    try:
        fig.savefig(tmp, dpi=150, format=os.path.splitext(path)[1].lstrip(".") or "png")
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.unlink(tmp)


def write_report_files(report: EvaluationReport, json_path: str) -> list[str]:
    """JSON report plus CSV and figure siblings; returns written paths."""
    stem, _ = os.path.splitext(json_path)
    csv_path = stem + ".csv"
    png_path = stem + ".png"
    atomic_write_text(json_path, json.dumps(report.to_json_dict(), indent=2) + "\n")
    atomic_write_text(csv_path, accuracy_csv(report))
    render_accuracy_figure(
        [(report.scheme["scheme"], report.mean_per_position)],
        png_path,
        title=f"{report.scheme['scheme']}, {report.k}-fold cross-validation",
    )
    return [json_path, csv_path, png_path]


def write_comparison_files(comparison: ComparisonReport, json_path: str) -> list[str]:
    stem, _ = os.path.splitext(json_path)
    csv_path = stem + ".csv"
    png_path = stem + ".png"
    atomic_write_text(json_path, json.dumps(comparison.to_json_dict(), indent=2) + "\n")
    atomic_write_text(csv_path, comparison_csv(comparison))
    render_accuracy_figure(
        [
            (comparison.report_a.scheme["scheme"], comparison.report_a.mean_per_position),
            (comparison.report_b.scheme["scheme"], comparison.report_b.mean_per_position),
        ],
        png_path,
        title=f"{comparison.report_a.scheme['scheme']} vs {comparison.report_b.scheme['scheme']}",
    )
    return [json_path, csv_path, png_path]
