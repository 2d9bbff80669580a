"""Tests for experiment report writers."""

import csv
import json
import math
from pathlib import Path

import pytest

from nlsgibbs.models import ExperimentReport, SweepKind
from nlsgibbs.writers import CsvReportWriter, JsonReportWriter, get_writer


def _report() -> ExperimentReport:
    report = ExperimentReport(
        "convergence",
        SweepKind.TAU,
        scenario={"k_max": 1},
        config_hash="0123456789abcdef" * 4,
        sweep_values=[2.0, 4.0],
    )
    report.add_point(2.0, "e_Z", 0.125, 0.01, 1.5)
    report.add_point(4.0, "e_Z", 0.0625, 0.01, 3.0)
    report.metrics["max_ratio"] = math.inf
    return report


class TestCsvReportWriter:
    """Test the flat CSV table."""

    def test_header_and_rows(self) -> None:
        """Test the fixed header and one row per point."""
        text = CsvReportWriter().render(_report())
        rows = list(csv.reader(text.splitlines()))

        assert rows[0] == [
            "sweep_value",
            "metric",
            "estimate",
            "std_error",
            "runtime_s",
        ]
        assert rows[1] == ["2.0", "e_Z", "0.125", "0.01", "1.5"]
        assert len(rows) == 3

    def test_floats_round_trip(self) -> None:
        """Test estimates are written with their full precision."""
        report = ExperimentReport("r", SweepKind.ORDER)
        report.add_point(0, "a_m", 1 / 3)

        row = CsvReportWriter().render(report).splitlines()[1].split(",")

        assert float(row[2]) == 1 / 3

    def test_file_name_carries_hash_prefix(self, tmp_path: Path) -> None:
        """Test the output file is named after the report and its scenario."""
        path = CsvReportWriter().write(_report(), tmp_path / "out")

        assert path == tmp_path / "out" / "convergence-0123456789ab.csv"
        assert path.read_text("utf-8").startswith("sweep_value,")

    def test_file_name_without_hash(self, tmp_path: Path) -> None:
        """Test reports without a hash use the bare name."""
        path = CsvReportWriter().write(ExperimentReport("r", SweepKind.TIME), tmp_path)

        assert path.name == "r.csv"


class TestJsonReportWriter:
    """Test the full JSON rendering."""

    def test_contents(self) -> None:
        """Test the rendered document holds points, scenario and metrics."""
        data = json.loads(JsonReportWriter().render(_report()))

        assert data["name"] == "convergence"
        assert data["sweep_kind"] == "tau"
        assert data["scenario"] == {"k_max": 1}
        assert [p["estimate"] for p in data["points"]] == [0.125, 0.0625]

    def test_non_finite_values(self) -> None:
        """Test infinities are written as strings so the output stays JSON."""
        text = JsonReportWriter().render(_report())

        assert "Infinity" not in text
        assert json.loads(text)["metrics"]["max_ratio"] == "inf"


class TestGetWriter:
    """Test writer lookup."""

    @pytest.mark.parametrize(
        "name,cls", [("json", JsonReportWriter), ("csv", CsvReportWriter)]
    )
    def test_known_formats(self, name: str, cls: type) -> None:
        """Test each format name maps to its writer."""
        assert isinstance(get_writer(name), cls)

    def test_unknown_format(self) -> None:
        """Test an unknown format name raises ValueError."""
        with pytest.raises(ValueError, match="unknown report format"):
            get_writer("xml")
