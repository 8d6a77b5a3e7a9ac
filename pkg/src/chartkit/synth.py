"""Random table generation for exercising the pipeline end to end.

Tables are sized and valued so every recommended chart renders cleanly:
pie values stay positive with at most 8 slices, bar values are
non-negative, category names are short and non-numeric.
"""

from __future__ import annotations

import random

from .tables import Cell, ChartType, DataTable

_CATEGORIES = [
    "Alpha", "Beta", "Gamma", "Delta", "East", "West", "North", "South",
    "Apples", "Pears", "Plums", "Grapes", "Oak", "Pine", "Elm", "Birch",
    "Red", "Blue", "Green", "Amber", "Mon", "Tue", "Wed", "Thu", "Fri",
]
_SERIES = [
    "Sales", "Costs", "Units", "Share", "Score", "Output", "Demand", "Supply",
    "Online", "Retail", "Export", "Local",
]
_TITLES = [
    "Quarterly results", "Regional totals", "Survey outcome", "Usage by group",
    "Annual breakdown", "Market overview", "Daily readings", "Category shares",
]
_AXES = ["Category", "Group", "Region", "Item", "Label"]


def _pick(rng: random.Random, pool: list[str], n: int) -> list[str]:
    return rng.sample(pool, n)


def _value(rng: random.Random, lo: float, hi: float, decimals: int = 1) -> float:
    return round(rng.uniform(lo, hi), decimals)


def random_table(seed: int, chart_type: ChartType) -> DataTable:
    """A table for which ``chart_type`` is among the recommended charts."""
    rng = random.Random(seed)
    title = rng.choice(_TITLES)

    if chart_type is ChartType.SCATTER:
        n = rng.randint(5, 12)
        cols = tuple(_pick(rng, _SERIES, 2))
        cells = tuple(
            (Cell.number(_value(rng, -50, 150)), Cell.number(_value(rng, -40, 180)))
            for _ in range(n)
        )
        return DataTable(
            title=title,
            column_headers=cols,
            row_headers=tuple(f"r{i + 1}" for i in range(n)),
            cells=cells,
            positional_rows=True,
        )

    if chart_type in (ChartType.GROUPED_BAR, ChartType.STACKED_BAR, ChartType.GROUPED_LINE):
        n_cat = rng.randint(3, 6)
        n_series = rng.randint(2, 4)
        cats = _pick(rng, _CATEGORIES, n_cat)
        series = _pick(rng, _SERIES, n_series)
        lo = 0.0 if chart_type is not ChartType.GROUPED_LINE else -60.0
        cells = tuple(
            tuple(Cell.number(_value(rng, lo, 120)) for _ in series) for _ in cats
        )
        return DataTable(
            title=title,
            column_headers=tuple(series),
            row_headers=tuple(cats),
            cells=cells,
            category_label=rng.choice(_AXES),
        )

    # single-series table: bar, pie, line
    n_cat = rng.randint(3, 8)
    cats = _pick(rng, _CATEGORIES, n_cat)
    series = rng.choice(_SERIES)
    if chart_type is ChartType.PIE:
        values = [_value(rng, 8, 100) for _ in cats]
    elif chart_type is ChartType.BAR:
        values = [_value(rng, 0, 150) for _ in cats]
        if rng.random() < 0.2:
            values[rng.randrange(n_cat)] = 0.0
        if max(values) <= 0:
            values[0] = _value(rng, 10, 150)
    else:
        values = [_value(rng, -80, 150) for _ in cats]
    cells = tuple((Cell.number(v),) for v in values)
    return DataTable(
        title=title,
        column_headers=(series,),
        row_headers=tuple(cats),
        cells=cells,
        category_label=rng.choice(_AXES),
    )
