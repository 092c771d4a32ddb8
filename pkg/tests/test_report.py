"""Report persistence and rendering: write/read round-trips, table content
at display precision, schema guards and figure output."""

import os

import numpy as np
import pytest
import yaml

from geomextremes import (
    ExperimentPlan,
    ReportError,
    WeibullLimit,
    build_model,
    empirical_survival,
    read_report,
    render_figures,
    render_tables,
    run_experiment,
    unit_square,
    weibull_survival,
    write_report,
)

MODEL = build_model("gilbert_voronoi", unit_square())


@pytest.fixture(scope="module")
def report():
    plan = ExperimentPlan(
        model=MODEL,
        grid=(40.0, 80.0, 160.0),
        replications=25,
        m_list=(1, 2),
        y_grid=(0.0, 0.5, 1.0, 1.5, 2.0),
        master_seed=21,
    )
    return run_experiment(plan)


def test_write_read_round_trip(report, tmp_path):
    path = tmp_path / "report.yaml"
    written = write_report(report, path)
    assert written[0] == str(path)
    back = read_report(path)
    assert back == report
    # volatile execution details survive the trip too, in their own block
    assert back.metadata == report.metadata
    text = path.read_text()
    assert "volatile:" in text and "wall_time_seconds" in text


def test_write_report_emits_tables_alongside(report, tmp_path):
    written = write_report(report, tmp_path / "report.yaml")
    tables = [p for p in written if p.endswith(".csv")]
    assert len(tables) == 6  # three grid values, two orders
    assert os.path.exists(os.path.join(tmp_path, "survival_t40_m1.csv"))
    assert os.path.exists(os.path.join(tmp_path, "survival_t160_m2.csv"))


def test_table_rows_match_recomputed_survival(report, tmp_path):
    paths = render_tables(report, tmp_path)
    entry = report.results[0]
    path = os.path.join(tmp_path, "survival_t40_m1.csv")
    assert path in paths
    lines = open(path).read().splitlines()
    assert lines[0] == "y,empirical_survival,limit_survival,gap"
    assert len(lines) == 1 + len(report.y_grid)

    lim = WeibullLimit(report.beta, report.tau, report.gamma)
    for line, y in zip(lines[1:], report.y_grid):
        cy, cemp, cref, cgap = line.split(",")
        assert float(cy) == y
        emp = empirical_survival(
            entry["sample"], entry["infinite_count"], report.replications, y
        )
        ref = weibull_survival(lim, y, 1)
        assert float(cemp) == pytest.approx(emp, rel=1e-11)
        assert float(cref) == pytest.approx(ref, rel=1e-11)
        assert cgap == f"{emp - ref:.12g}"

    # at y = 0 both survivals are 1 exactly
    first = lines[1].split(",")
    assert first[:3] == ["0", "1", "1"]


def test_read_report_schema_and_shape_guards(report, tmp_path):
    path = tmp_path / "report.yaml"
    write_report(report, path)

    data = yaml.safe_load(path.read_text())
    data["schema"] = "geomextremes/report/v0"
    old = tmp_path / "old.yaml"
    old.write_text(yaml.safe_dump(data))
    with pytest.raises(ReportError, match="unsupported schema"):
        read_report(old)

    (tmp_path / "junk.yaml").write_text("just: a mapping\n")
    with pytest.raises(ReportError, match="not a report file"):
        read_report(tmp_path / "junk.yaml")

    data = yaml.safe_load(path.read_text())
    data["unexpected_field"] = 1
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump(data))
    with pytest.raises(ReportError, match="malformed report"):
        read_report(bad)

    with pytest.raises(ReportError, match="cannot read report"):
        read_report(tmp_path / "missing.yaml")


def test_write_report_wraps_os_errors(report, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(ReportError, match="cannot write report"):
        write_report(report, blocker / "report.yaml")


def test_render_figures(report, tmp_path):
    paths = render_figures(report, tmp_path)
    names = {os.path.basename(p) for p in paths}
    expected = {
        f"survival_t{t:g}_m{m}.png" for t in (40, 80, 160) for m in (1, 2)
    }
    if report.rate is not None:
        expected.add("rate.png")
    assert names == expected
    for p in paths:
        assert os.path.getsize(p) > 1000


def test_render_figures_with_empty_sample(tmp_path):
    plan = ExperimentPlan(model=MODEL, grid=(0.05,), replications=2,
                          master_seed=1)
    report = run_experiment(plan)
    assert report.results[0]["sample"] == []
    paths = render_figures(report, tmp_path)
    assert len(paths) == 1 and os.path.getsize(paths[0]) > 1000
