"""Flat CSV table of experiment reports, one estimate per row."""

import csv
import io

from nlsgibbs.models import ExperimentReport
from nlsgibbs.writers.base import ReportWriter

HEADER = ["sweep_value", "metric", "estimate", "std_error", "runtime_s"]


class CsvReportWriter(ReportWriter):
    """Plot-ready table with a fixed header row; UTF-8, decimal point."""

    extension = ".csv"

    def render(self, report: ExperimentReport) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(HEADER)
        for point in report.points:
            writer.writerow(
                [
                    repr(point.sweep_value),
                    point.metric,
                    repr(point.estimate),
                    repr(point.std_error),
                    repr(point.runtime_s),
                ]
            )
        return buffer.getvalue()
