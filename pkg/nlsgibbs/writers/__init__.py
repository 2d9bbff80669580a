"""Report writers."""

from typing import Dict, Type

from nlsgibbs.writers.base import ReportWriter
from nlsgibbs.writers.csv_writer import CsvReportWriter
from nlsgibbs.writers.json_writer import JsonReportWriter

WRITERS: Dict[str, Type[ReportWriter]] = {
    "json": JsonReportWriter,
    "csv": CsvReportWriter,
}


def get_writer(name: str) -> ReportWriter:
    """
    Writer for a format name.

    Raises:
        ValueError: If the format is unknown
    """
    try:
        return WRITERS[name]()
    except KeyError as e:
        raise ValueError(f"unknown report format '{name}'") from e


__all__ = [
    "CsvReportWriter",
    "JsonReportWriter",
    "ReportWriter",
    "WRITERS",
    "get_writer",
]
