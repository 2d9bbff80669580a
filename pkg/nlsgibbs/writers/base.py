"""Base class for experiment report writers."""

from abc import ABC, abstractmethod
from pathlib import Path

from nlsgibbs.models import ExperimentReport


class ReportWriter(ABC):
    """Abstract base class for report writers."""

    extension: str = ""

    @abstractmethod
    def render(self, report: ExperimentReport) -> str:
        """
        Render a report as text.

        Args:
            report: Report to render

        Returns:
            Text in the writer's format
        """
        pass

    def write(self, report: ExperimentReport, directory: Path) -> Path:
        """
        Write a report as <directory>/<name>-<hash prefix><extension>.

        The config hash prefix ties every output file to its scenario.

        Args:
            report: Report to write
            directory: Output directory, created if missing

        Returns:
            Path of the written file
        """
        directory.mkdir(parents=True, exist_ok=True)
        stem = report.name
        if report.config_hash:
            stem = f"{stem}-{report.config_hash[:12]}"
        target = directory / f"{stem}{self.extension}"
        with open(target, "w", encoding="utf-8", newline="") as f:
            f.write(self.render(report))
        return target
