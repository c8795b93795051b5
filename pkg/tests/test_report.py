"""SVG/markdown report generation from campaign CSVs."""

import math

import numpy as np
import pytest

from rcdp import write_report
from rcdp.experiments import CampaignResult, summarize
from rcdp.report import ReportError, load_results


def synthetic_results(tmp_path):
    """Two policies, four replications, hand-checkable numbers."""
    rows = []
    costs = {"alpha": [10.0, 12.0, 11.0, 13.0],
             "beta": [9.0, 9.5, 10.0, 10.5]}
    for pol, cs in costs.items():
        for rep, c in enumerate(cs):
            rows.append(("scen", rep, pol, c, 1.0, 1, True, 8.0, 0))
    result = CampaignResult(rows, summarize(rows, ["alpha", "beta"]))
    result.save(tmp_path)
    return costs


def test_write_report_outputs(tmp_path):
    synthetic_results(tmp_path)
    paths = write_report(tmp_path)
    for key in ("mean_costs", "error_bars", "cost_boxes", "summary_md"):
        assert key in paths
    svg = open(paths["mean_costs"]).read()
    assert svg.startswith("<svg")
    assert "</svg>" in svg


def test_ci_annotation_formula(tmp_path):
    costs = synthetic_results(tmp_path)
    paths = write_report(tmp_path)
    svg = open(paths["mean_costs"]).read()
    for cs in costs.values():
        arr = np.array(cs)
        mean = arr.mean()
        half = 1.96 * arr.std(ddof=1) / math.sqrt(len(arr))
        assert f"{mean:.2f}±{half:.2f}" in svg


def test_box_quartiles_follow_summary(tmp_path):
    costs = synthetic_results(tmp_path)
    reps, summary = load_results(tmp_path)
    by_pol = {row["policy"]: row for row in summary}
    for pol, cs in costs.items():
        assert by_pol[pol]["p25"] == pytest.approx(np.percentile(cs, 25))
        assert by_pol[pol]["p75"] == pytest.approx(np.percentile(cs, 75))
    svg = open(write_report(tmp_path)["cost_boxes"]).read()
    assert "eff=" in svg  # relative-efficiency annotation present


def test_single_policy_does_not_crash(tmp_path):
    rows = [("s", r, "solo", 10.0 + r, 0.0, 0, True, 9.0, 0)
            for r in range(3)]
    CampaignResult(rows, summarize(rows, ["solo"])).save(tmp_path)
    paths = write_report(tmp_path)
    assert open(paths["summary_md"]).read().count("solo") >= 1


def test_markdown_mirrors_summary(tmp_path):
    synthetic_results(tmp_path)
    paths = write_report(tmp_path)
    md = open(paths["summary_md"]).read()
    _, summary = load_results(tmp_path)
    for row in summary:
        assert f"{row['mean_cost']:.4f}" in md


def test_missing_results_dir_is_reported(tmp_path):
    with pytest.raises(ReportError):
        write_report(tmp_path / "nope")


def test_missing_column_is_reported(tmp_path):
    synthetic_results(tmp_path)
    # drop a required column from summary.csv
    lines = (tmp_path / "summary.csv").read_text().splitlines()
    header = lines[0].split(",")
    idx = header.index("sd_cost")
    out = []
    for line in lines:
        parts = line.split(",")
        del parts[idx]
        out.append(",".join(parts))
    (tmp_path / "summary.csv").write_text("\n".join(out) + "\n")
    with pytest.raises(ReportError, match=r"sd_cost.*summary\.csv|summary\.csv.*sd_cost"):
        write_report(tmp_path)
