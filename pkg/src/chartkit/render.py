"""Chart rasterization with exact ground-truth annotations.

Renders a DataTable to an RGBA raster while emitting, for every numeric
cell, a MarkAnnotation whose bbox is computed analytically (float pixels,
no raster quantization), and a TextAnnotation for every piece of text.
Text bboxes are layout boxes (advance width x line height) placed by
anchor, so a tick label's box center sits exactly on the tick's pixel
coordinate; value extraction inverts the axis transform from those tick
annotations alone.

Conventions fixed here and relied on by extraction:

* value axis ranges: bars use [0, 1.1 * max] (all values must be >= 0),
  lines/scatter use the data range padded by 5% on each side (1.0 if flat);
* pie wedges start at 12 o'clock and advance clockwise in data order;
  a wedge's bbox is the analytic bbox of the filled sector;
* zero-value bars get a bbox of height 1e-6 px so the area stays positive;
  extraction snaps extents below 0.01 px back to exactly 0.0.
"""

from __future__ import annotations

import enum
import json
import math
import random
from dataclasses import dataclass, replace
from pathlib import Path

from PIL import Image, ImageDraw, ImageFont

from .errors import (
    NotInvertible,
    RenderOverflow,
    SchemaError,
    UnsupportedCombination,
)
from .tables import (
    Cell,
    ChartType,
    DataTable,
    GROUPED_TYPES,
    format_number,
    recommend_chart,
)

BBox = tuple[float, float, float, float]

_ZERO_MARK_EXTENT = 1e-6
_SNAP_EXTENT_PX = 0.01
_MIN_PLOT_PX = 40.0

_PALETTES = [
    [(31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
     (148, 103, 189), (140, 86, 75), (227, 119, 194), (127, 127, 127)],
    [(0, 63, 92), (188, 80, 144), (255, 166, 0), (88, 80, 141),
     (255, 99, 97), (0, 143, 136), (106, 168, 79), (69, 69, 69)],
    [(38, 70, 83), (42, 157, 143), (233, 196, 106), (244, 162, 97),
     (231, 111, 81), (109, 104, 117), (82, 121, 111), (190, 60, 60)],
    [(55, 76, 128), (219, 83, 117), (252, 194, 68), (80, 160, 90),
     (130, 90, 170), (200, 120, 60), (70, 130, 180), (120, 120, 60)],
]
_BACKGROUNDS = [(255, 255, 255), (252, 252, 248), (248, 250, 252), (250, 248, 250)]

_FONT_PATH: str | None = None


def _font(size: int) -> ImageFont.FreeTypeFont:
    global _FONT_PATH
    if _FONT_PATH is None:
        from matplotlib import font_manager

        _FONT_PATH = font_manager.findfont("DejaVu Sans")
    return ImageFont.truetype(_FONT_PATH, size)


class TextRole(enum.Enum):
    TITLE = "title"
    X_TICK = "x_tick"
    Y_TICK = "y_tick"
    AXIS_LABEL = "axis_label"
    LEGEND_ENTRY = "legend_entry"
    DATA_LABEL = "data_label"


@dataclass(frozen=True)
class ChartSpec:
    """Rendering request. ``legend`` must list the series names exactly
    when the chart type is a grouped/stacked variant and be empty otherwise."""

    chart_type: ChartType
    width_px: int = 640
    height_px: int = 480
    title: str = ""
    axis_labels: tuple[str, str] = ("", "")
    legend: tuple[str, ...] = ()
    style_seed: int = 0
    data_labels: bool = False

    def __post_init__(self) -> None:
        if self.width_px < 128 or self.height_px < 128:
            raise SchemaError("chart size must be at least 128x128 px")
        grouped = self.chart_type in GROUPED_TYPES
        if grouped and not self.legend:
            raise SchemaError(f"{self.chart_type.value} requires a legend")
        if not grouped and self.legend:
            raise SchemaError(f"{self.chart_type.value} must not carry a legend")


@dataclass(frozen=True)
class MarkAnnotation:
    series: str
    category: str
    value: float
    bbox: BBox


@dataclass(frozen=True)
class TextAnnotation:
    content: str
    bbox: BBox
    role: TextRole


@dataclass(frozen=True)
class RenderedChart:
    image: Image.Image
    marks: tuple[MarkAnnotation, ...]
    texts: tuple[TextAnnotation, ...]
    spec: ChartSpec
    source_table_id: str


def spec_for(
    table: DataTable,
    chart_type: ChartType,
    *,
    width_px: int = 640,
    height_px: int = 480,
    style_seed: int = 0,
    data_labels: bool = False,
) -> ChartSpec:
    """Build a valid ChartSpec for a table (fills title, axes, legend)."""
    _categories, series, _matrix = _numeric_grid(table)
    legend: tuple[str, ...] = ()
    if chart_type in GROUPED_TYPES:
        legend = tuple(series)
    x_label = table.category_label
    y_label = series[0] if len(series) == 1 else ""
    if chart_type is ChartType.SCATTER or (
        chart_type is ChartType.LINE and table.positional_rows
    ):
        x_label, y_label = series[0], series[1] if len(series) > 1 else ""
    return ChartSpec(
        chart_type=chart_type,
        width_px=width_px,
        height_px=height_px,
        title=table.title,
        axis_labels=(x_label, y_label),
        legend=legend,
        style_seed=style_seed,
        data_labels=data_labels,
    )


# --- style / layout ---------------------------------------------------------


@dataclass
class _Style:
    palette: list[tuple[int, int, int]]
    background: tuple[int, int, int]
    gridlines: bool
    tick_size: int
    title_size: int
    bar_fraction: float
    marker_radius: float
    line_width: int


def _style_from_seed(seed: int) -> _Style:
    rng = random.Random(seed)
    palette = list(_PALETTES[rng.randrange(len(_PALETTES))])
    rotation = rng.randrange(len(palette))
    palette = palette[rotation:] + palette[:rotation]
    return _Style(
        palette=palette,
        background=_BACKGROUNDS[rng.randrange(len(_BACKGROUNDS))],
        gridlines=rng.random() < 0.7,
        tick_size=rng.choice([11, 12, 13]),
        title_size=rng.choice([15, 16, 17, 18]),
        bar_fraction=rng.uniform(0.55, 0.75),
        marker_radius=rng.uniform(3.0, 5.0),
        line_width=rng.choice([2, 3]),
    )


class _TextLayer:
    """Collects text placements with layout bboxes and draws them."""

    def __init__(self, draw: ImageDraw.ImageDraw):
        self.draw = draw
        self.annotations: list[TextAnnotation] = []

    def measure(self, text: str, size: int) -> tuple[float, float]:
        font = _font(size)
        width = self.draw.textlength(text, font=font)
        ascent, descent = font.getmetrics()
        return float(width), float(ascent + descent)

    def put(
        self,
        text: str,
        size: int,
        role: TextRole,
        *,
        left: float | None = None,
        right: float | None = None,
        center_x: float | None = None,
        top: float | None = None,
        center_y: float | None = None,
        color: tuple[int, int, int] = (40, 40, 40),
    ) -> BBox:
        w, h = self.measure(text, size)
        if center_x is not None:
            x = center_x - w / 2.0
        elif right is not None:
            x = right - w
        else:
            x = float(left or 0.0)
        y = center_y - h / 2.0 if center_y is not None else float(top or 0.0)
        self.draw.text((round(x), round(y)), text, font=_font(size), fill=color)
        bbox = (x, y, w, h)
        self.annotations.append(TextAnnotation(content=text, bbox=bbox, role=role))
        return bbox


def _nice_ticks(vmin: float, vmax: float, target: int = 5) -> list[float]:
    span = vmax - vmin
    if span <= 0:
        raise NotInvertible("value axis has zero span")
    raw = span / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    frac = raw / mag
    if frac <= 1.0:
        step = mag
    elif frac <= 2.0:
        step = 2 * mag
    elif frac <= 5.0:
        step = 5 * mag
    else:
        step = 10 * mag
    first = math.ceil(vmin / step - 1e-9) * step
    ticks = []
    k = 0
    while first + k * step <= vmax + step * 1e-9:
        tick = first + k * step
        # keep labels short and exactly parseable
        ticks.append(float(round(tick, 10)))
        k += 1
    if len(ticks) < 2:
        ticks = [float(round(vmin, 10)), float(round(vmax, 10))]
    return ticks


def _numeric_grid(table: DataTable) -> tuple[tuple[str, ...], tuple[str, ...], list[list[Cell]]]:
    """Categories plus the numeric series only.

    A series is numeric when all its non-empty cells are numbers; a series
    mixing text and numbers cannot be plotted without dropping numeric cells,
    which would break the one-mark-per-numeric-cell contract, so it is
    rejected. Pure text series are ignored."""
    categories, series, matrix = table.series_view()
    keep = []
    for s, name in enumerate(series):
        col = [matrix[i][s] for i in range(len(categories))]
        nums = [c for c in col if c.is_number]
        if nums and all(c.is_number or c.is_empty for c in col):
            keep.append(s)
        elif nums:
            raise UnsupportedCombination(
                f"series {name!r} mixes text and numeric cells"
            )
    if not keep:
        raise UnsupportedCombination("table has no numeric series to plot")
    names = tuple(series[s] for s in keep)
    filtered = [[row[s] for s in keep] for row in matrix]
    return categories, names, filtered


def _series_values(matrix: list[list[Cell]], s: int) -> list[float | None]:
    return [row[s].number_value if row[s].is_number else None for row in matrix]


# --- rendering --------------------------------------------------------------


def render(table: DataTable, spec: ChartSpec, source_table_id: str = "") -> RenderedChart:
    """Rasterize a table as the requested chart with exact annotations."""
    allowed = {r.chart_type for r in recommend_chart(table)}
    if spec.chart_type not in allowed:
        raise UnsupportedCombination(
            f"{spec.chart_type.value} is not recommended for this table"
        )
    style = _style_from_seed(spec.style_seed)
    img = Image.new("RGBA", (spec.width_px, spec.height_px), style.background + (255,))
    draw = ImageDraw.Draw(img)
    layer = _TextLayer(draw)

    top = 8.0
    if spec.title:
        _, th = layer.measure(spec.title, style.title_size)
        layer.put(
            spec.title, style.title_size, TextRole.TITLE,
            center_x=spec.width_px / 2.0, top=top,
        )
        top += th + 6

    if spec.chart_type is ChartType.PIE:
        marks = _render_pie(table, spec, style, draw, layer, top)
    else:
        marks = _render_cartesian(table, spec, style, draw, layer, top)

    chart = RenderedChart(
        image=img,
        marks=tuple(marks),
        texts=tuple(layer.annotations),
        spec=spec,
        source_table_id=source_table_id,
    )
    _validate_chart(chart, table)
    return chart


def _validate_chart(chart: RenderedChart, table: DataTable) -> None:
    _, _, matrix = table.series_view()
    n_numeric = sum(1 for row in matrix for c in row if c.is_number)
    if len(chart.marks) != n_numeric:
        raise SchemaError(
            f"annotation mismatch: {len(chart.marks)} marks for {n_numeric} numeric cells"
        )
    w, h = chart.spec.width_px, chart.spec.height_px
    for m in chart.marks:
        x, y, bw, bh = m.bbox
        if bw * bh <= 0:
            raise SchemaError(f"mark bbox with non-positive area: {m}")
        if x < -0.51 or y < -0.51 or x + bw > w + 0.51 or y + bh > h + 0.51:
            raise RenderOverflow(f"mark bbox out of image bounds: {m.bbox}")
    for t in chart.texts:
        x, y, bw, bh = t.bbox
        if x < -0.51 or y < -0.51 or x + bw > w + 0.51 or y + bh > h + 0.51:
            raise RenderOverflow(f"text {t.content!r} out of image bounds")


def _value_range(spec: ChartSpec, values: list[float]) -> tuple[float, float]:
    bar_like = spec.chart_type in (
        ChartType.BAR, ChartType.GROUPED_BAR, ChartType.STACKED_BAR,
    )
    if bar_like:
        if any(v < 0 for v in values):
            raise UnsupportedCombination("bar charts require non-negative values")
        vmax = max(values, default=0.0)
        return 0.0, 1.1 * vmax if vmax > 0 else 1.0
    mn, mx = min(values), max(values)
    pad = 0.05 * (mx - mn) if mx > mn else 1.0
    return mn - pad, mx + pad


def _render_cartesian(
    table: DataTable,
    spec: ChartSpec,
    style: _Style,
    draw: ImageDraw.ImageDraw,
    layer: _TextLayer,
    top: float,
) -> list[MarkAnnotation]:
    categories, series, matrix = _numeric_grid(table)
    xy_mode = spec.chart_type is ChartType.SCATTER or (
        spec.chart_type is ChartType.LINE and table.positional_rows and len(series) == 2
    )
    if spec.chart_type is ChartType.SCATTER and not xy_mode:
        raise UnsupportedCombination("scatter requires exactly two numeric columns")
    if xy_mode:
        for row in matrix:
            if not (row[0].is_number and row[1].is_number):
                raise UnsupportedCombination("x/y charts require complete numeric pairs")

    if spec.chart_type in (ChartType.BAR, ChartType.LINE) and not xy_mode:
        if len(series) != 1:
            raise UnsupportedCombination(
                f"{spec.chart_type.value} requires a single series"
            )

    all_values = [c.number_value for row in matrix for c in row if c.is_number]
    if spec.chart_type is ChartType.STACKED_BAR:
        sums = []
        for row in matrix:
            sums.append(sum(c.number_value for c in row if c.is_number))
        y_min, y_max = _value_range(spec, all_values)
        y_max = 1.1 * max(sums) if max(sums, default=0.0) > 0 else 1.0
    elif xy_mode:
        y_min, y_max = _value_range(spec, [row[1].number_value for row in matrix])
    else:
        y_min, y_max = _value_range(spec, all_values)

    y_ticks = _nice_ticks(y_min, y_max)
    tick_labels = [format_number(t) for t in y_ticks]
    y_tick_w = max(layer.measure(lbl, style.tick_size)[0] for lbl in tick_labels)
    _, text_h = layer.measure("0", style.tick_size)

    x_axis_label, y_axis_label = spec.axis_labels
    left = 10.0 + y_tick_w + 8.0
    bottom_pad = 10.0 + text_h + 4.0
    if x_axis_label:
        bottom_pad += text_h + 2.0
    header_pad = 0.0
    if y_axis_label:
        header_pad = text_h + 4.0

    right = spec.width_px - 12.0
    legend_w = 0.0
    if spec.legend:
        legend_w = max(layer.measure(s, style.tick_size)[0] for s in spec.legend)
        legend_w += 26.0
        right = spec.width_px - 12.0 - legend_w

    plot_left = left
    plot_right = right
    plot_top = top + header_pad + 6.0
    plot_bottom = spec.height_px - bottom_pad
    plot_w = plot_right - plot_left
    plot_h = plot_bottom - plot_top
    if plot_w < _MIN_PLOT_PX or plot_h < _MIN_PLOT_PX:
        raise RenderOverflow("labels leave no room for the plot area")

    def py(v: float) -> float:
        return plot_bottom - (v - y_min) / (y_max - y_min) * plot_h

    # frame, ticks, gridlines
    axis_color = (110, 110, 110)
    for tick, lbl in zip(y_ticks, tick_labels):
        y = py(tick)
        if style.gridlines:
            draw.line([(plot_left, y), (plot_right, y)], fill=(225, 225, 225), width=1)
        draw.line([(plot_left - 4, y), (plot_left, y)], fill=axis_color, width=1)
        layer.put(lbl, style.tick_size, TextRole.Y_TICK,
                  right=plot_left - 8.0, center_y=y)
    draw.line([(plot_left, plot_top), (plot_left, plot_bottom)], fill=axis_color, width=1)
    draw.line([(plot_left, plot_bottom), (plot_right, plot_bottom)], fill=axis_color, width=1)

    if y_axis_label:
        layer.put(y_axis_label, style.tick_size, TextRole.AXIS_LABEL,
                  left=10.0, top=top + 2.0)
    if x_axis_label:
        layer.put(x_axis_label, style.tick_size, TextRole.AXIS_LABEL,
                  center_x=(plot_left + plot_right) / 2.0,
                  top=spec.height_px - text_h - 6.0)

    if spec.legend:
        ly = plot_top + 4.0
        lx = plot_right + 12.0
        for i, name in enumerate(spec.legend):
            color = style.palette[i % len(style.palette)]
            draw.rectangle([lx, ly + 2, lx + 10, ly + 12], fill=color + (255,))
            layer.put(name, style.tick_size, TextRole.LEGEND_ENTRY,
                      left=lx + 14.0, top=ly)
            ly += text_h + 6.0

    marks: list[MarkAnnotation] = []

    if xy_mode:
        xs = [row[0].number_value for row in matrix]
        x_min, x_max = _value_range(replace(spec, chart_type=ChartType.SCATTER), xs)
        x_ticks = _nice_ticks(x_min, x_max)

        def px(v: float) -> float:
            return plot_left + (v - x_min) / (x_max - x_min) * plot_w

        for tick in x_ticks:
            x = px(tick)
            draw.line([(x, plot_bottom), (x, plot_bottom + 4)], fill=axis_color, width=1)
            layer.put(format_number(tick), style.tick_size, TextRole.X_TICK,
                      center_x=x, top=plot_bottom + 6.0)
        r = style.marker_radius
        color = style.palette[0]
        points = [(px(row[0].number_value), py(row[1].number_value)) for row in matrix]
        if spec.chart_type is ChartType.LINE and len(points) >= 2:
            draw.line([(round(x), round(y)) for x, y in points],
                      fill=color + (255,), width=style.line_width)
        for (x, y), cat, row in zip(points, categories, matrix):
            draw.ellipse([x - r, y - r, x + r, y + r], fill=color + (255,))
            marks.append(MarkAnnotation(series=series[0], category=cat,
                                        value=row[0].number_value,
                                        bbox=(x - r, y - r, 2 * r, 2 * r)))
            marks.append(MarkAnnotation(series=series[1], category=cat,
                                        value=row[1].number_value,
                                        bbox=(x - r, y - r, 2 * r, 2 * r)))
        return marks

    # categorical x axis
    n_cat = len(categories)
    slot_w = plot_w / n_cat

    def slot_center(i: int) -> float:
        return plot_left + (i + 0.5) * slot_w

    for i, cat in enumerate(categories):
        layer.put(cat, style.tick_size, TextRole.X_TICK,
                  center_x=slot_center(i), top=plot_bottom + 6.0)

    if spec.chart_type is ChartType.BAR:
        values = _series_values(matrix, 0)
        bw = slot_w * style.bar_fraction
        color = style.palette[0]
        for i, (cat, v) in enumerate(zip(categories, values)):
            if v is None:
                continue
            x0 = slot_center(i) - bw / 2.0
            y_v = py(v)
            h = plot_bottom - y_v
            draw.rectangle([round(x0), round(y_v), round(x0 + bw), round(plot_bottom)],
                           fill=color + (255,))
            bbox = (x0, y_v, bw, h if h > 0 else _ZERO_MARK_EXTENT)
            marks.append(MarkAnnotation(series=series[0], category=cat, value=v, bbox=bbox))
            if spec.data_labels:
                layer.put(format_number(v), style.tick_size, TextRole.DATA_LABEL,
                          center_x=slot_center(i), top=y_v - text_h - 2.0)

    elif spec.chart_type is ChartType.GROUPED_BAR:
        n_s = len(series)
        group_w = slot_w * 0.8
        bw = group_w / n_s
        for j, name in enumerate(series):
            color = style.palette[j % len(style.palette)]
            for i, cat in enumerate(categories):
                cell = matrix[i][j]
                if not cell.is_number:
                    continue
                v = cell.number_value
                x0 = slot_center(i) - group_w / 2.0 + j * bw
                y_v = py(v)
                h = plot_bottom - y_v
                draw.rectangle([round(x0), round(y_v), round(x0 + bw), round(plot_bottom)],
                               fill=color + (255,))
                bbox = (x0, y_v, bw, h if h > 0 else _ZERO_MARK_EXTENT)
                marks.append(MarkAnnotation(series=name, category=cat, value=v, bbox=bbox))

    elif spec.chart_type is ChartType.STACKED_BAR:
        bw = slot_w * 0.6
        for i, cat in enumerate(categories):
            cum = 0.0
            for j, name in enumerate(series):
                cell = matrix[i][j]
                if not cell.is_number:
                    continue
                v = cell.number_value
                color = style.palette[j % len(style.palette)]
                x0 = slot_center(i) - bw / 2.0
                y_hi = py(cum + v)
                y_lo = py(cum)
                draw.rectangle([round(x0), round(y_hi), round(x0 + bw), round(y_lo)],
                               fill=color + (255,))
                h = y_lo - y_hi
                bbox = (x0, y_hi, bw, h if h > 0 else _ZERO_MARK_EXTENT)
                marks.append(MarkAnnotation(series=name, category=cat, value=v, bbox=bbox))
                cum += v

    elif spec.chart_type in (ChartType.LINE, ChartType.GROUPED_LINE):
        r = style.marker_radius
        for j, name in enumerate(series):
            color = style.palette[j % len(style.palette)]
            pts = []
            for i, cat in enumerate(categories):
                cell = matrix[i][j]
                if not cell.is_number:
                    continue
                v = cell.number_value
                x, y = slot_center(i), py(v)
                pts.append((x, y))
                marks.append(MarkAnnotation(series=name, category=cat, value=v,
                                            bbox=(x - r, y - r, 2 * r, 2 * r)))
            if len(pts) >= 2:
                draw.line([(round(x), round(y)) for x, y in pts],
                          fill=color + (255,), width=style.line_width)
            for x, y in pts:
                draw.ellipse([x - r, y - r, x + r, y + r], fill=color + (255,))
    else:
        raise UnsupportedCombination(f"unsupported chart type {spec.chart_type}")

    return marks


# --- pie --------------------------------------------------------------------

_PIE_START_DEG = -90.0  # 12 o'clock in screen coordinates, clockwise


def _wedge_bbox(cx: float, cy: float, r: float, a0: float, a1: float) -> BBox:
    """Analytic bbox of the filled sector [a0, a1] (degrees, screen coords)."""

    def pt(a: float) -> tuple[float, float]:
        rad = math.radians(a)
        return cx + r * math.cos(rad), cy + r * math.sin(rad)

    pts = [(cx, cy), pt(a0), pt(a1)]
    k = math.ceil(a0 / 90.0 - 1e-12)
    while k * 90.0 <= a1 + 1e-12:
        pts.append(pt(k * 90.0))
        k += 1
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys)


def _render_pie(
    table: DataTable,
    spec: ChartSpec,
    style: _Style,
    draw: ImageDraw.ImageDraw,
    layer: _TextLayer,
    top: float,
) -> list[MarkAnnotation]:
    categories, series, matrix = _numeric_grid(table)
    if len(series) != 1:
        raise UnsupportedCombination("pie requires a single numeric series")
    values = []
    for row in matrix:
        if not row[0].is_number:
            raise UnsupportedCombination("pie requires every cell to be numeric")
        values.append(row[0].number_value)
    if any(v < 0 for v in values):
        raise UnsupportedCombination("pie with negative values")
    if any(v == 0 for v in values):
        raise UnsupportedCombination("pie with zero-value slice")
    total = sum(values)

    _, text_h = layer.measure("0", style.tick_size)
    max_label_w = max(layer.measure(c, style.tick_size)[0] for c in categories)
    area_w = spec.width_px - 20.0
    area_h = spec.height_px - top - 16.0
    cx = spec.width_px / 2.0
    cy = top + area_h / 2.0 + 4.0
    r_limit_x = (area_w / 2.0 - max_label_w - 6.0) / 1.18
    r_limit_y = (area_h / 2.0 - text_h - 6.0) / 1.18
    r = min(0.42 * min(area_w, area_h), r_limit_x, r_limit_y)
    if r < 24.0:
        raise RenderOverflow("pie labels leave no room for the disc")

    marks = []
    a = _PIE_START_DEG
    for i, (cat, v) in enumerate(zip(categories, values)):
        sweep = 360.0 * v / total
        a1 = a + sweep
        color = style.palette[i % len(style.palette)]
        draw.pieslice([cx - r, cy - r, cx + r, cy + r], start=a, end=a1,
                      fill=color + (255,), outline=(255, 255, 255, 255), width=1)
        marks.append(MarkAnnotation(series=series[0], category=cat, value=v,
                                    bbox=_wedge_bbox(cx, cy, r, a, a1)))
        mid = math.radians((a + a1) / 2.0)
        lx = cx + 1.18 * r * math.cos(mid)
        ly = cy + 1.18 * r * math.sin(mid)
        layer.put(cat, style.tick_size, TextRole.X_TICK, center_x=lx, center_y=ly)
        if spec.data_labels:
            dx = cx + 0.6 * r * math.cos(mid)
            dy = cy + 0.6 * r * math.sin(mid)
            pct = format_number(round(100.0 * v / total, 1)) + "%"
            layer.put(pct, style.tick_size, TextRole.DATA_LABEL,
                      center_x=dx, center_y=dy, color=(255, 255, 255))
        a = a1
    return marks


# --- extraction -------------------------------------------------------------


def _tick_transform(chart: RenderedChart, role: TextRole, axis: str):
    """Linear pixel->value map recovered from tick-label annotations."""
    ticks = []
    for t in chart.texts:
        if t.role is not role:
            continue
        try:
            value = float(t.content)
        except ValueError:
            continue
        x, y, w, h = t.bbox
        pixel = y + h / 2.0 if axis == "y" else x + w / 2.0
        ticks.append((value, pixel))
    if len(ticks) < 2:
        raise NotInvertible(f"need at least two numeric {role.value} labels")
    ticks.sort()
    (v0, p0), (v1, p1) = ticks[0], ticks[-1]
    if p0 == p1:
        raise NotInvertible("tick labels coincide in pixel space")

    def invert(pixel: float) -> float:
        return v0 + (pixel - p0) * (v1 - v0) / (p1 - p0)

    units_per_px = abs((v1 - v0) / (p1 - p0))
    return invert, units_per_px


def _pie_geometry(chart: RenderedChart) -> tuple[float, float, float]:
    """Recover (cx, cy, r) from the union of all wedge bboxes (the full disc)."""
    xs0 = min(m.bbox[0] for m in chart.marks)
    ys0 = min(m.bbox[1] for m in chart.marks)
    xs1 = max(m.bbox[0] + m.bbox[2] for m in chart.marks)
    ys1 = max(m.bbox[1] + m.bbox[3] for m in chart.marks)
    # every pie covers 360 degrees in total, so the union is the disc square
    return (xs0 + xs1) / 2.0, (ys0 + ys1) / 2.0, (xs1 - xs0) / 2.0


def _sweep_interval(
    cx: float, cy: float, r: float, observed: BBox,
    *, anchor: float, forward: bool, tol: float = 1e-6,
) -> tuple[float, float]:
    """Feasible sweep interval (degrees) matching the observed sector bbox.

    ``anchor`` is the fixed boundary angle: the start when scanning forward,
    the end when scanning backward. Every bbox edge is monotone in the sweep,
    so each edge constrains the sweep to an interval found by bisection."""

    def bbox_of(s: float) -> BBox:
        if forward:
            return _wedge_bbox(cx, cy, r, anchor, anchor + s)
        return _wedge_bbox(cx, cy, r, anchor - s, anchor)

    def edges(s: float) -> tuple[float, float, float, float]:
        x, y, w, h = bbox_of(s)
        return (-x, -y, x + w, y + h)  # all four non-decreasing in s

    ox, oy, ow, oh = observed
    targets = (-ox, -oy, ox + ow, oy + oh)

    lo_bound, hi_bound = 0.0, 360.0
    for idx in range(4):
        target = targets[idx]
        # smallest s with edge >= target - tol
        lo, hi = 0.0, 360.0
        if edges(hi)[idx] < target - tol:
            raise NotInvertible("observed bbox larger than any sector")
        for _ in range(80):
            mid = (lo + hi) / 2.0
            if edges(mid)[idx] >= target - tol:
                hi = mid
            else:
                lo = mid
        lo_bound = max(lo_bound, hi)
        # largest s with edge <= target + tol
        lo, hi = 0.0, 360.0
        if edges(0.0)[idx] > target + tol:
            raise NotInvertible("observed bbox smaller than any sector")
        for _ in range(80):
            mid = (lo + hi) / 2.0
            if edges(mid)[idx] <= target + tol:
                lo = mid
            else:
                hi = mid
        hi_bound = min(hi_bound, lo)
    if hi_bound < lo_bound - 1e-6:
        raise NotInvertible("wedge bbox matches no sweep")
    return lo_bound, hi_bound


_AMBIGUOUS_DEG = 0.05


def _union_bbox(boxes: list[BBox]) -> BBox:
    x0 = min(b[0] for b in boxes)
    y0 = min(b[1] for b in boxes)
    x1 = max(b[0] + b[2] for b in boxes)
    y1 = max(b[1] + b[3] for b in boxes)
    return x0, y0, x1 - x0, y1 - y0


def _pie_fractions(chart: RenderedChart) -> list[float]:
    """Recover each wedge's angular fraction from the bbox annotations.

    The union of wedge bboxes 0..k equals the bbox of the sector running
    from the fixed start angle to boundary k, a one-parameter family with
    an exact anchor, so boundary recovery never accumulates error. A
    boundary deep in the forward family's saturated zone (past 180 deg) is
    recovered from the complementary union anchored at the exact end angle;
    the two saturated zones are disjoint, so one direction always pins it."""
    cx, cy, r = _pie_geometry(chart)
    n = len(chart.marks)
    boxes = [m.bbox for m in chart.marks]
    end = _PIE_START_DEG + 360.0
    boundaries = [0.0] * n
    boundaries[n - 1] = end
    for k in range(n - 1):
        lo, hi = _sweep_interval(cx, cy, r, _union_bbox(boxes[: k + 1]),
                                 anchor=_PIE_START_DEG, forward=True)
        if hi - lo <= _AMBIGUOUS_DEG:
            boundaries[k] = _PIE_START_DEG + (lo + hi) / 2.0
            continue
        lo, hi = _sweep_interval(cx, cy, r, _union_bbox(boxes[k + 1:]),
                                 anchor=end, forward=False)
        if hi - lo <= _AMBIGUOUS_DEG:
            boundaries[k] = end - (lo + hi) / 2.0
            continue
        raise NotInvertible("wedge boundary ambiguous in both scan directions")
    prev = _PIE_START_DEG
    sweeps = []
    for k in range(n):
        sweeps.append(boundaries[k] - prev)
        prev = boundaries[k]
    return [s / 360.0 for s in sweeps]


def extract_value_from_mark(chart: RenderedChart, mark: MarkAnnotation) -> float:
    """Reconstruct a mark's data value from pixel geometry alone.

    Bars invert the tick-label axis scale against the bar extent; lines and
    scatter invert the vertex position; pies recover each wedge's sweep from
    its bbox and scale the fraction by the chart's total. Extents below
    0.01 px snap to exactly 0.0 (zero-value bars)."""
    try:
        index = chart.marks.index(mark)
    except ValueError:
        raise NotInvertible("mark does not belong to this chart") from None
    kind = chart.spec.chart_type

    if kind in (ChartType.BAR, ChartType.GROUPED_BAR, ChartType.STACKED_BAR):
        _, units_per_px = _tick_transform(chart, TextRole.Y_TICK, "y")
        h = mark.bbox[3]
        if h < _SNAP_EXTENT_PX:
            return 0.0
        return h * units_per_px

    if kind is ChartType.PIE:
        fractions = _pie_fractions(chart)
        total = sum(m.value for m in chart.marks)
        return fractions[index] * total

    if kind in (ChartType.LINE, ChartType.GROUPED_LINE, ChartType.SCATTER):
        x, y, w, h = mark.bbox
        # categorical charts label every mark category on the x axis; x/y
        # charts label numeric ticks instead, so mark categories are absent
        x_tick_contents = {t.content for t in chart.texts if t.role is TextRole.X_TICK}
        categorical = all(m.category in x_tick_contents for m in chart.marks)
        if not categorical and mark.series == chart.spec.axis_labels[0]:
            invert, _ = _tick_transform(chart, TextRole.X_TICK, "x")
            return invert(x + w / 2.0)
        invert, _ = _tick_transform(chart, TextRole.Y_TICK, "y")
        return invert(y + h / 2.0)

    raise NotInvertible(f"no inversion rule for {kind}")


# --- persistence ------------------------------------------------------------


def sidecar_path(image_path: str | Path) -> Path:
    return Path(str(image_path) + ".anno.json")


def chart_to_annotations(chart: RenderedChart) -> dict:
    return {
        "width_px": chart.spec.width_px,
        "height_px": chart.spec.height_px,
        "source_table_id": chart.source_table_id,
        "spec": {
            "chart_type": chart.spec.chart_type.value,
            "width_px": chart.spec.width_px,
            "height_px": chart.spec.height_px,
            "title": chart.spec.title,
            "axis_labels": list(chart.spec.axis_labels),
            "legend": list(chart.spec.legend),
            "style_seed": chart.spec.style_seed,
            "data_labels": chart.spec.data_labels,
        },
        "marks": [
            {
                "series": m.series,
                "category": m.category,
                "value": m.value,
                "bbox": list(m.bbox),
            }
            for m in chart.marks
        ],
        "texts": [
            {"content": t.content, "bbox": list(t.bbox), "role": t.role.value}
            for t in chart.texts
        ],
    }


def save_chart(chart: RenderedChart, image_path: str | Path) -> Path:
    """Write the PNG plus the .anno.json sidecar; returns the sidecar path."""
    path = Path(image_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    chart.image.save(path, format="PNG")
    side = sidecar_path(path)
    side.write_text(
        json.dumps(chart_to_annotations(chart), ensure_ascii=False, indent=1),
        encoding="utf-8",
    )
    return side


def load_annotations(image_path: str | Path) -> dict:
    side = sidecar_path(image_path)
    return json.loads(side.read_text(encoding="utf-8"))
