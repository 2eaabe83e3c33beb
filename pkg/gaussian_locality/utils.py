"""Utility functions for gaussian-locality artifacts."""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Tuple

import numpy as np

from gaussian_locality.exceptions import OutputError, ValidationError
from gaussian_locality.models import ProbabilityFixture


logger = logging.getLogger(__name__)


# Fixed float format so identical runs give byte-identical CSV.
FLOAT_FORMAT = "{:.10g}"


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars, arrays and complex numbers to JSON-compatible values."""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    return value


def format_value(value: Any) -> str:
    """Render one CSV cell."""
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT.format(float(value))
    return str(value)


def dump_json(data: Any) -> str:
    return json.dumps(to_jsonable(data), indent=2)


def write_json(data: Any, path: Path) -> None:
    """Write JSON to ``path``.

    Raises:
        OutputError: If the file cannot be written
    """
    try:
        path.write_text(dump_json(data) + "\n")
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}", path=path)
    logger.debug(f"Wrote JSON artifact {path}")


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])
    return buffer.getvalue()


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: Path) -> None:
    """Write CSV with fixed float formatting.

    Raises:
        OutputError: If the file cannot be written
    """
    try:
        path.write_text(render_csv(header, rows))
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}", path=path)
    logger.debug(f"Wrote CSV artifact {path}")


def write_fixtures(fixtures: Sequence[ProbabilityFixture], path: Path) -> None:
    """Store probability regression values as a JSON array."""
    write_json([fixture.model_dump() for fixture in fixtures], path)


def read_fixtures(path: Path) -> List[ProbabilityFixture]:
    """Load probability regression values.

    Raises:
        ValidationError: If the file is missing or not a JSON array of fixtures
    """
    if not path.is_file():
        raise ValidationError(f"Fixture file does not exist: {path}", field="fixtures", value=str(path))
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ValidationError(
            f"Invalid JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}",
            field="fixtures",
            value=str(path),
        )
    if not isinstance(data, list):
        raise ValidationError(f"Fixture file {path} must hold a JSON array", field="fixtures")
    return [ProbabilityFixture(**item) for item in data]


def parse_grid(text: str) -> Tuple[int, int]:
    """Parse a ``WxH`` grid size.

    Raises:
        ValidationError: If the text is malformed or a side is below 2
    """
    parts = str(text).lower().split("x")
    try:
        width, height = (int(part) for part in parts)
    except ValueError:
        raise ValidationError(f"Grid must look like WxH, got: {text!r}", field="grid", value=text)
    if width < 2 or height < 2:
        raise ValidationError(f"Grid sides must be at least 2, got: {text!r}", field="grid", value=text)
    return width, height


def parse_complex(text: Any) -> complex:
    """Parse a displacement such as ``0.12``, ``-0.48`` or ``0.1+0.2j``.

    Raises:
        ValidationError: If the text is not a number
    """
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError:
        raise ValidationError(f"Not a displacement: {text!r}", field="alpha", value=text)


def format_duration(seconds: float) -> str:
    """Human-readable duration."""
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes, seconds = divmod(seconds, 60)
    if minutes < 60:
        return f"{int(minutes)}m {seconds:.0f}s"
    hours, minutes = divmod(minutes, 60)
    return f"{int(hours)}h {int(minutes)}m"


def load_candidates(path: Path) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Read candidate noise splittings: a JSON array of {"gamma_A": [[..]], "gamma_B": [[..]]}.

    Raises:
        ValidationError: If the file is missing or malformed
    """
    if not path.is_file():
        raise ValidationError(f"Candidate file does not exist: {path}", field="candidates", value=str(path))
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ValidationError(
            f"Invalid JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}",
            field="candidates",
            value=str(path),
        )
    if not isinstance(data, list):
        raise ValidationError(f"Candidate file {path} must hold a JSON array", field="candidates")
    candidates = []
    for index, item in enumerate(data):
        if not isinstance(item, dict) or "gamma_A" not in item or "gamma_B" not in item:
            raise ValidationError(
                f"Candidate {index} needs gamma_A and gamma_B", field="candidates", value=index
            )
        candidates.append((np.asarray(item["gamma_A"], dtype=float), np.asarray(item["gamma_B"], dtype=float)))
    return candidates
