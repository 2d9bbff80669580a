"""Full JSON rendering of experiment reports."""

import json
import math
from typing import Any

from nlsgibbs.models import ExperimentReport
from nlsgibbs.writers.base import ReportWriter


def _finite(value: Any) -> Any:
    """Replace non-finite floats by strings; JSON has no inf or nan."""
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    return value


class JsonReportWriter(ReportWriter):
    """Writes the whole report, scenario and metrics included."""

    extension = ".json"

    def render(self, report: ExperimentReport) -> str:
        return json.dumps(_finite(report.to_dict()), indent=2, sort_keys=True) + "\n"
