import csv
import io
import json

import pytest

from factorder import (
    PlannerConfig,
    compare_schemes,
    cross_validate,
    generate_dataset,
    generate_domain,
    stratified_folds,
)
from factorder.report import (
    accuracy_csv,
    comparison_csv,
    format_accuracy_table,
    format_comparison_table,
    render_accuracy_figure,
    write_comparison_files,
    write_report_files,
)


@pytest.fixture(scope="module")
def evaluated():
    spec = generate_domain(8, "fixed-priority", seed=3, sequence_length=4)
    dataset = generate_dataset(spec, 120)
    folds = stratified_folds(dataset, 5, seed=2)
    report = cross_validate(dataset, PlannerConfig(4, "majority"), folds)
    comparison = compare_schemes(
        dataset, PlannerConfig(4, "decision-tree"), PlannerConfig(4, "majority"), folds
    )
    return report, comparison


def test_accuracy_table_mentions_scheme_and_positions(evaluated):
    report, _ = evaluated
    table = format_accuracy_table(report)
    assert "majority" in table
    assert "position" in table
    assert f"{report.mean_per_position[0]:.4f}" in table
    assert "exact_match" in table


def test_comparison_table_shows_verdicts(evaluated):
    _, comparison = evaluated
    table = format_comparison_table(comparison)
    assert "decision-tree" in table and "majority" in table
    assert "alpha = 0.005" in table
    assert "significant" in table or "-" in table


def test_accuracy_csv_parses_back(evaluated):
    report, _ = evaluated
    rows = list(csv.DictReader(io.StringIO(accuracy_csv(report))))
    assert len(rows) == report.k * report.n
    assert {row["scheme"] for row in rows} == {"majority"}
    first = rows[0]
    assert float(first["accuracy"]) == pytest.approx(
        report.fold_position_accuracy[0][0]
    )


def test_comparison_csv_parses_back(evaluated):
    _, comparison = evaluated
    rows = list(csv.DictReader(io.StringIO(comparison_csv(comparison))))
    assert len(rows) == 4
    assert [int(r["position"]) for r in rows] == [1, 2, 3, 4]


def test_report_files_written_alongside(tmp_path, evaluated):
    report, _ = evaluated
    json_path = tmp_path / "out" / "report.json"
    json_path.parent.mkdir()
    paths = write_report_files(report, str(json_path))
    assert [p.rsplit(".", 1)[1] for p in paths] == ["json", "csv", "png"]
    data = json.loads(json_path.read_text())
    assert data["format_version"] == 1
    png = json_path.with_suffix(".png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(png) > 1000


def test_comparison_files_written(tmp_path, evaluated):
    _, comparison = evaluated
    paths = write_comparison_files(comparison, str(tmp_path / "cmp.json"))
    assert all((tmp_path / name).exists() for name in ("cmp.json", "cmp.csv", "cmp.png"))
    data = json.loads((tmp_path / "cmp.json").read_text())
    assert len(data["per_position_tests"]) == 4


def test_figure_renderer_accepts_multiple_curves(tmp_path):
    path = tmp_path / "curves.png"
    render_accuracy_figure(
        [("a", [1.0, 0.8, 0.9]), ("b", [1.0, 0.6, 0.7])], str(path), title="demo"
    )
    assert path.exists() and path.stat().st_size > 1000
    assert not (tmp_path / "curves.png.tmp").exists()
