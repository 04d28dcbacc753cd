import collections.abc
import json
import math
import pathlib
from typing import Any

import numpy as np
import numpy.typing as npt

from .base import DataError, EmptyInputError, FloatArray

COMMENT_PREFIX = "#"


def try_parse_float(value: str | None) -> float | None:
    if value is None:
        return None

    try:
        return float(value)
    except ValueError:
        return None


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def parse_values(lines: collections.abc.Iterable[str], *, source: str = "<input>") -> FloatArray:
    values: list[float] = []
    header_allowed = True
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(COMMENT_PREFIX):
            continue
        # a first row may carry several columns, only the first one is read
        cell = stripped.split(",", 1)[0].strip()
        value = try_parse_float(cell)
        if value is None:
            if header_allowed:
                header_allowed = False
                continue
            raise DataError(f"{source}:{number}: cannot parse {cell!r} as a number")
        header_allowed = False
        values.append(value)
    if not values:
        raise EmptyInputError(f"{source} contains no values")
    result = np.asarray(values, dtype=np.float64)
    if not np.isfinite(result).all():
        raise DataError(f"{source} contains non-finite values")
    return result


def read_values(path: str | pathlib.Path) -> FloatArray:
    path = pathlib.Path(path)
    try:
        with path.open(encoding="utf-8") as file:
            return parse_values(file, source=str(path))
    except UnicodeDecodeError as e:
        raise DataError(f"{path} is not UTF-8 text: {e}") from e


def write_values(path: str | pathlib.Path, values: npt.ArrayLike, *, header: str | None = None) -> None:
    lines = [header] if header is not None else []
    lines.extend(format_float(v) for v in np.asarray(values, dtype=np.float64).reshape(-1))
    pathlib.Path(path).write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")


def write_rows(
    path: str | pathlib.Path, columns: collections.abc.Sequence[str], rows: collections.abc.Iterable[dict[str, Any]]
) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_cell(row.get(column)) for column in columns))
    pathlib.Path(path).write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return format_float(value) if math.isfinite(value) else ""
    return str(value)


def to_jsonable(value: Any) -> Any:
    match value:
        case dict():
            return {str(k): to_jsonable(v) for k, v in value.items()}
        case list() | tuple():
            return [to_jsonable(v) for v in value]
        case np.ndarray():
            return [to_jsonable(v) for v in value.tolist()]
        case None | str():
            return value
        case bool() | np.bool_():
            return bool(value)
        case np.integer() | int():
            return int(value)
        case np.floating() | float():
            return float(value) if math.isfinite(value) else None
        case _:
            return str(value)


def dumps_json(value: Any) -> str:
    return json.dumps(to_jsonable(value), indent=2, sort_keys=False) + "\n"


def write_json(path: str | pathlib.Path, value: Any) -> None:
    pathlib.Path(path).write_text(dumps_json(value), encoding="utf-8")


def read_json(path: str | pathlib.Path) -> Any:
    try:
        return json.loads(pathlib.Path(path).read_text(encoding="utf-8"))
    except ValueError as e:
        # both JSONDecodeError and UnicodeDecodeError
        raise DataError(f"{path} is not a valid JSON document: {e}") from e
