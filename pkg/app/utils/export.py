import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

from pydantic import BaseModel


def format_value(value: Any) -> str:
    """17 significant digits for floats; everything else as str."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float) or hasattr(value, "dtype"):
        return format(float(value), ".17g")
    if value is None:
        return ""
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def to_json(model: Any) -> str:
    if isinstance(model, BaseModel):
        return model.model_dump_json(indent=2)
    return json.dumps(model, indent=2)


def write_json(path: Path, model: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json(model) + "\n")
    return path
