"""Tabular data model: parsing, validation, triple flattening, chart recommendation.

A DataTable is the source of truth behind every rendered chart and every
generated answer. Three interchange formats are supported:

* CSV (RFC 4180): the first row is the header row. If the first column's
  body contains any non-numeric value, that column is treated as the
  category column: its values become row headers and its header is kept as
  ``category_label``. An all-numeric grid keeps every column as data and
  row headers are synthesized as ``r1..rN`` (``positional_rows=True``).
* JSON: ``{"title": ..., "columns": [...], "rows": [{"header": ..., "cells": [...]}]}``
  with optional ``category_label``, ``series_axis`` ("columns"|"rows") and
  ``positional_rows`` keys. Cells may be JSON numbers, strings (re-sniffed
  for numbers/units) or null (empty).
* Markdown: a GitHub-flavored table, optionally preceded by a ``# Title``
  line. Pipes inside cells are escaped as ``\\|``. Category-column
  detection follows the CSV rule.

Numeric-looking strings are parsed as numbers: thousands separators are
dropped and leading currency / trailing (or leading) percent symbols are
stripped and recorded as the cell's ``unit``.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import re
from dataclasses import dataclass, field

from .errors import EmptyTable, NoChartApplicable, ParseError, SchemaError

_CURRENCY = "$€£¥"
_NUMBER_BODY_RE = re.compile(
    r"^(?:\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)$"
)


class CellKind(enum.Enum):
    NUMBER = "number"
    TEXT = "text"
    EMPTY = "empty"


@dataclass(frozen=True)
class Cell:
    """One table cell: a number with an optional unit, a text, or empty."""

    kind: CellKind
    number_value: float | None = None
    text_value: str | None = None
    unit: str = ""

    def __post_init__(self) -> None:
        if self.kind is CellKind.NUMBER and self.number_value is None:
            raise SchemaError("number cell requires number_value")
        if self.kind is CellKind.TEXT and not isinstance(self.text_value, str):
            raise SchemaError("text cell requires text_value")
        if self.kind is CellKind.EMPTY and (
            self.number_value is not None or self.text_value is not None
        ):
            raise SchemaError("empty cell must carry no value")

    @staticmethod
    def number(value: float, unit: str = "") -> "Cell":
        return Cell(CellKind.NUMBER, number_value=float(value), unit=unit)

    @staticmethod
    def text(value: str) -> "Cell":
        return Cell(CellKind.TEXT, text_value=value)

    @staticmethod
    def empty() -> "Cell":
        return Cell(CellKind.EMPTY)

    @property
    def is_number(self) -> bool:
        return self.kind is CellKind.NUMBER

    @property
    def is_empty(self) -> bool:
        return self.kind is CellKind.EMPTY

    def as_text(self) -> str:
        """Render the cell the way the interchange formats write it."""
        if self.kind is CellKind.EMPTY:
            return ""
        if self.kind is CellKind.TEXT:
            return self.text_value or ""
        body = format_number(self.number_value)
        if self.unit == "%":
            return body + "%"
        if self.unit in _CURRENCY:
            if body.startswith("-"):
                return "-" + self.unit + body[1:]
            return self.unit + body
        return body


def format_number(value: float) -> str:
    """Shortest decimal string that round-trips through float()."""
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def sniff_cell(raw: str) -> Cell:
    """Classify a raw string as a number (with unit), text, or empty cell."""
    text = raw.strip()
    if not text:
        return Cell.empty()
    t = text
    negative = False
    if t.startswith("-"):
        negative, t = True, t[1:]
    unit = ""
    if t[:1] in _CURRENCY:
        unit, t = t[0], t[1:]
        if t.startswith("-"):
            if negative:
                return Cell.text(text)
            negative, t = True, t[1:]
    elif t.startswith("%"):
        unit, t = "%", t[1:]
    if t.endswith("%"):
        if unit:
            return Cell.text(text)
        unit, t = "%", t[:-1]
    if not _NUMBER_BODY_RE.match(t):
        return Cell.text(text)
    value = float(t.replace(",", ""))
    return Cell.number(-value if negative else value, unit)


class SeriesAxis(enum.Enum):
    COLUMNS = "columns"
    ROWS = "rows"


class ChartType(enum.Enum):
    PIE = "pie"
    BAR = "bar"
    STACKED_BAR = "stacked_bar"
    GROUPED_BAR = "grouped_bar"
    LINE = "line"
    GROUPED_LINE = "grouped_line"
    SCATTER = "scatter"


GROUPED_TYPES = frozenset(
    {ChartType.STACKED_BAR, ChartType.GROUPED_BAR, ChartType.GROUPED_LINE}
)


def _check_headers(headers: tuple[str, ...], axis: str) -> None:
    for h in headers:
        if not isinstance(h, str) or not h.strip():
            raise SchemaError(f"empty {axis} header")
    if len(set(headers)) != len(headers):
        raise SchemaError(f"duplicate {axis} headers")


@dataclass(frozen=True)
class DataTable:
    """Immutable validated table.

    ``cells`` is a row-major matrix shaped (len(row_headers), len(column_headers)).
    ``positional_rows`` marks synthesized row headers (no real category axis),
    which is what distinguishes a two-series table from scatter data.
    """

    title: str
    column_headers: tuple[str, ...]
    row_headers: tuple[str, ...]
    cells: tuple[tuple[Cell, ...], ...]
    series_axis: SeriesAxis = SeriesAxis.COLUMNS
    category_label: str = ""
    positional_rows: bool = False

    def __post_init__(self) -> None:
        if not self.column_headers or not self.row_headers:
            raise EmptyTable("table needs at least one row and one column")
        _check_headers(self.column_headers, "column")
        _check_headers(self.row_headers, "row")
        if len(self.cells) != len(self.row_headers):
            raise SchemaError("cell matrix height != number of row headers")
        for row in self.cells:
            if len(row) != len(self.column_headers):
                raise SchemaError("ragged cell matrix")

    @property
    def n_rows(self) -> int:
        return len(self.row_headers)

    @property
    def n_cols(self) -> int:
        return len(self.column_headers)

    def cell(self, row: int, col: int) -> Cell:
        return self.cells[row][col]

    def numeric_column_indices(self) -> list[int]:
        """Columns whose non-empty cells are all numeric (and ≥1 is present)."""
        out = []
        for c in range(self.n_cols):
            col = [self.cells[r][c] for r in range(self.n_rows)]
            nums = [x for x in col if x.is_number]
            empties = [x for x in col if x.is_empty]
            if nums and len(nums) + len(empties) == len(col):
                out.append(c)
        return out

    def has_numeric_cell(self) -> bool:
        return any(c.is_number for row in self.cells for c in row)

    def series_view(self) -> tuple[tuple[str, ...], tuple[str, ...], list[list[Cell]]]:
        """(categories, series names, cells[category][series]) per series_axis."""
        if self.series_axis is SeriesAxis.COLUMNS:
            return self.row_headers, self.column_headers, [list(r) for r in self.cells]
        transposed = [
            [self.cells[r][c] for r in range(self.n_rows)] for c in range(self.n_cols)
        ]
        return self.column_headers, self.row_headers, transposed


@dataclass(frozen=True)
class Triple:
    row_key: str
    col_key: str
    value: Cell


@dataclass(frozen=True)
class TableTripleSet:
    """A table flattened to (row key, column key, value) triples."""

    triples: frozenset[Triple]

    def __len__(self) -> int:
        return len(self.triples)


def to_triples(table: DataTable) -> TableTripleSet:
    """One triple per non-empty cell, keyed by (row header, column header)."""
    triples = set()
    for r, row_key in enumerate(table.row_headers):
        for c, col_key in enumerate(table.column_headers):
            cell = table.cells[r][c]
            if not cell.is_empty:
                triples.add(Triple(row_key, col_key, cell))
    return TableTripleSet(frozenset(triples))


@dataclass(frozen=True)
class ChartTypeRecommendation:
    chart_type: ChartType
    confidence_rank: int


def recommend_chart(table: DataTable) -> list[ChartTypeRecommendation]:
    """Rank chart types for a table by a fixed rule set.

    One category axis + one numeric series -> bar, pie (when all values are
    >= 0, at least one is positive, and there are <= 12 categories), line.
    One category axis + several numeric series -> grouped bar, stacked bar
    (non-negative data only), grouped line. Two numeric columns over
    positional rows -> scatter, line.
    """
    categories, _series, matrix = table.series_view()
    n_series = len(_series)
    numeric = []
    for s in range(n_series):
        col = [matrix[i][s] for i in range(len(categories))]
        nums = [c for c in col if c.is_number]
        if nums and all(c.is_number or c.is_empty for c in col):
            numeric.append(s)
    if not numeric:
        raise NoChartApplicable("table has no numeric series")

    values = [
        matrix[i][s].number_value
        for s in numeric
        for i in range(len(categories))
        if matrix[i][s].is_number
    ]
    non_negative = all(v >= 0 for v in values)

    ranked: list[ChartType]
    if table.positional_rows and n_series == 2 and len(numeric) == 2:
        ranked = [ChartType.SCATTER, ChartType.LINE]
    elif len(numeric) == 1:
        pie_ok = (
            non_negative
            and any(v > 0 for v in values)
            and len(categories) <= 12
        )
        ranked = [ChartType.BAR]
        if pie_ok:
            ranked.append(ChartType.PIE)
        ranked.append(ChartType.LINE)
    else:
        ranked = [ChartType.GROUPED_BAR]
        if non_negative:
            ranked.append(ChartType.STACKED_BAR)
        ranked.append(ChartType.GROUPED_LINE)

    return [
        ChartTypeRecommendation(chart_type=t, confidence_rank=i + 1)
        for i, t in enumerate(ranked)
    ]


# --- parsing ---------------------------------------------------------------


def _decode(source: bytes | str) -> str:
    if isinstance(source, bytes):
        try:
            return source.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"source is not valid UTF-8: {e}") from e
    return source


def _grid_to_table(title: str, header: list[str], rows: list[list[str]]) -> DataTable:
    if not header:
        raise EmptyTable("no header row")
    if not rows:
        raise EmptyTable("no data rows")
    width = len(header)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise SchemaError(f"ragged row {i + 1}: {len(row)} cells, expected {width}")

    first_col = [row[0].strip() for row in rows]
    first_col_numeric = all(sniff_cell(v).is_number for v in first_col if v)
    has_category = width >= 2 and not (first_col_numeric and all(first_col))

    if has_category:
        row_headers = tuple(first_col)
        column_headers = tuple(h.strip() for h in header[1:])
        category_label = header[0].strip()
        body = [row[1:] for row in rows]
        positional = False
    else:
        row_headers = tuple(f"r{i + 1}" for i in range(len(rows)))
        column_headers = tuple(h.strip() for h in header)
        category_label = ""
        body = rows
        positional = True

    cells = tuple(tuple(sniff_cell(v) for v in row) for row in body)
    return DataTable(
        title=title,
        column_headers=column_headers,
        row_headers=row_headers,
        cells=cells,
        category_label=category_label,
        positional_rows=positional,
    )


def _parse_csv(text: str) -> DataTable:
    try:
        rows = [row for row in csv.reader(io.StringIO(text)) if row]
    except csv.Error as e:
        raise ParseError(f"malformed CSV: {e}") from e
    if not rows:
        raise EmptyTable("empty CSV input")
    return _grid_to_table("", rows[0], rows[1:])


def _parse_json(text: str) -> DataTable:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e}") from e
    if not isinstance(doc, dict) or "columns" not in doc or "rows" not in doc:
        raise ParseError("JSON table must be an object with 'columns' and 'rows'")
    columns = doc["columns"]
    rows = doc["rows"]
    if not isinstance(columns, list) or not isinstance(rows, list):
        raise ParseError("'columns' and 'rows' must be arrays")

    def to_cell(v: object) -> Cell:
        if v is None:
            return Cell.empty()
        if isinstance(v, bool):
            return Cell.text(str(v))
        if isinstance(v, (int, float)):
            return Cell.number(float(v))
        if isinstance(v, str):
            return sniff_cell(v)
        raise ParseError(f"unsupported cell value: {v!r}")

    headers = []
    cells = []
    for row in rows:
        if not isinstance(row, dict) or "header" not in row or "cells" not in row:
            raise ParseError("each row must be an object with 'header' and 'cells'")
        headers.append(str(row["header"]))
        cells.append(tuple(to_cell(v) for v in row["cells"]))

    axis = SeriesAxis(doc.get("series_axis", "columns"))
    return DataTable(
        title=str(doc.get("title", "")),
        column_headers=tuple(str(c) for c in columns),
        row_headers=tuple(headers),
        cells=tuple(cells),
        series_axis=axis,
        category_label=str(doc.get("category_label", "")),
        positional_rows=bool(doc.get("positional_rows", False)),
    )


_MD_SEP_RE = re.compile(r"^:?-+:?$")


def _split_md_row(line: str) -> list[str]:
    stripped = line.strip()
    if not (stripped.startswith("|") and stripped.endswith("|")):
        raise ParseError(f"markdown table row must be pipe-delimited: {line!r}")
    parts = re.split(r"(?<!\\)\|", stripped[1:-1])
    return [p.replace("\\|", "|").strip() for p in parts]


def _parse_markdown(text: str) -> DataTable:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    title = ""
    if lines and lines[0].lstrip().startswith("#"):
        title = lines[0].lstrip().lstrip("#").strip()
        lines = lines[1:]
    if len(lines) < 2:
        raise EmptyTable("markdown table needs a header and separator row")
    header = _split_md_row(lines[0])
    sep = _split_md_row(lines[1])
    if len(sep) != len(header) or not all(_MD_SEP_RE.match(s) for s in sep):
        raise ParseError("second markdown row must be the -|- separator")
    rows = [_split_md_row(ln) for ln in lines[2:]]
    if not rows:
        raise EmptyTable("markdown table has no data rows")
    return _grid_to_table(title, header, rows)


_PARSERS = {"csv": _parse_csv, "json": _parse_json, "markdown": _parse_markdown}


def parse_table(source: bytes | str, fmt: str) -> DataTable:
    """Parse UTF-8 CSV / JSON / markdown bytes into a validated DataTable."""
    if fmt not in _PARSERS:
        raise ParseError(f"unknown table format {fmt!r}")
    return _PARSERS[fmt](_decode(source))


# --- serialization ----------------------------------------------------------


def _grid_of(table: DataTable) -> tuple[list[str], list[list[str]]]:
    """Flat grid; positional tables omit the synthesized row-header column."""
    if table.positional_rows:
        header = list(table.column_headers)
        rows = [
            [table.cells[r][c].as_text() for c in range(table.n_cols)]
            for r in range(table.n_rows)
        ]
        return header, rows
    header = [table.category_label] + list(table.column_headers)
    rows = []
    for r, row_key in enumerate(table.row_headers):
        rows.append([row_key] + [table.cells[r][c].as_text() for c in range(table.n_cols)])
    return header, rows


def _to_csv(table: DataTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header, rows = _grid_of(table)
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _to_json(table: DataTable) -> str:
    def cell_value(cell: Cell) -> object:
        if cell.is_empty:
            return None
        if cell.is_number and not cell.unit:
            return cell.number_value
        return cell.as_text()

    doc = {
        "title": table.title,
        "category_label": table.category_label,
        "series_axis": table.series_axis.value,
        "positional_rows": table.positional_rows,
        "columns": list(table.column_headers),
        "rows": [
            {
                "header": h,
                "cells": [cell_value(c) for c in table.cells[r]],
            }
            for r, h in enumerate(table.row_headers)
        ],
    }
    return json.dumps(doc, ensure_ascii=False, indent=1)


def _md_escape(text: str) -> str:
    return text.replace("|", "\\|")


def _to_markdown(table: DataTable) -> str:
    header, rows = _grid_of(table)
    lines = []
    if table.title:
        lines.append(f"# {table.title}")
    lines.append("| " + " | ".join(_md_escape(h) for h in header) + " |")
    lines.append("| " + " | ".join("---" for _ in header) + " |")
    for row in rows:
        lines.append("| " + " | ".join(_md_escape(v) for v in row) + " |")
    return "\n".join(lines) + "\n"


_SERIALIZERS = {"csv": _to_csv, "json": _to_json, "markdown": _to_markdown}


def serialize_table(table: DataTable, fmt: str) -> str:
    """Write a DataTable so parse_table(result, fmt) reproduces it."""
    if fmt not in _SERIALIZERS:
        raise ParseError(f"unknown table format {fmt!r}")
    return _SERIALIZERS[fmt](table)
