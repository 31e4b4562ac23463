"""CSV and JSON rendering of reports."""

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from app.config.logging import LoggingMixin
from app.config.settings import settings


def round_real(value: float, digits: Optional[int] = None) -> float:
    """value rounded to `digits` significant digits (15 by default)."""
    digits = settings.numerics.real_digits if digits is None else digits
    if not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def normalize(value: Any) -> Any:
    """Plain JSON types with reals rounded; numpy scalars and tuples unwrapped."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return round_real(float(value))
    if isinstance(value, Fraction):
        return {"num": value.numerator, "den": value.denominator}
    if isinstance(value, dict):
        return {str(k): normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [normalize(v) for v in value]
    return value


def _csv_cell(value: Any) -> str:
    value = normalize(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_json(payload: Any) -> str:
    return json.dumps(normalize(payload), indent=2, ensure_ascii=False) + "\n"


def render_csv(columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


class ReportWriter(LoggingMixin):
    """Writes one report to a file or to a text stream.

    JSON gets `payload`; CSV gets `rows` restricted to `columns`.
    """

    def __init__(self, output_format: str = "json", output_path: Optional[str] = None):
        super().__init__()
        if output_format not in ("csv", "json"):
            raise ValueError(f"unsupported output format {output_format!r}")
        self.output_format = output_format
        self.output_path = Path(output_path) if output_path else None

    def render(self, payload: Any, columns: Sequence[str], rows: List[Dict[str, Any]]) -> str:
        if self.output_format == "json":
            return render_json(payload)
        return render_csv(columns, rows)

    def write(
        self,
        payload: Any,
        columns: Sequence[str],
        rows: List[Dict[str, Any]],
        stream: Optional[io.TextIOBase] = None,
    ) -> str:
        text = self.render(payload, columns, rows)
        if self.output_path is not None:
            self.output_path.parent.mkdir(parents=True, exist_ok=True)
            self.output_path.write_text(text, encoding="utf-8")
            self.log_info("Report written", path=str(self.output_path), format=self.output_format)
        elif stream is not None:
            stream.write(text)
            stream.flush()
        return text
