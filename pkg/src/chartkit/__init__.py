"""chartkit: synthesize chart instruction datasets, evaluate predictions, MoE numerics."""

__version__ = "0.1.0"

from .tables import (
    Cell,
    CellKind,
    ChartType,
    ChartTypeRecommendation,
    DataTable,
    SeriesAxis,
    TableTripleSet,
    Triple,
    parse_table,
    recommend_chart,
    serialize_table,
    to_triples,
)

__all__ = [
    "Cell",
    "CellKind",
    "ChartType",
    "ChartTypeRecommendation",
    "DataTable",
    "SeriesAxis",
    "TableTripleSet",
    "Triple",
    "parse_table",
    "recommend_chart",
    "serialize_table",
    "to_triples",
    "__version__",
]
