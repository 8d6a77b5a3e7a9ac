import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chartkit.errors import EmptyTable, NoChartApplicable, ParseError, SchemaError
from chartkit.tables import (
    Cell,
    CellKind,
    ChartType,
    DataTable,
    parse_table,
    recommend_chart,
    serialize_table,
    sniff_cell,
    to_triples,
)


class TestSniffCell:
    @pytest.mark.parametrize(
        "raw,value,unit",
        [
            ("1,234", 1234.0, ""),
            ("45%", 45.0, "%"),
            ("%45", 45.0, "%"),
            ("$3.2", 3.2, "$"),
            ("-$5", -5.0, "$"),
            ("$-5", -5.0, "$"),
            ("3.5", 3.5, ""),
            ("-12", -12.0, ""),
            ("0", 0.0, ""),
            ("1,234.5", 1234.5, ""),
        ],
    )
    def test_numbers(self, raw, value, unit):
        cell = sniff_cell(raw)
        assert cell.kind is CellKind.NUMBER
        assert cell.number_value == value
        assert cell.unit == unit

    @pytest.mark.parametrize("raw", ["hello", "12,34", "Q1 2020", "--5", "$", "4 %"])
    def test_text(self, raw):
        assert sniff_cell(raw).kind is CellKind.TEXT

    def test_empty(self):
        assert sniff_cell("  ").kind is CellKind.EMPTY


class TestParseCsv:
    def test_category_table(self):
        t = parse_table(b"x,y\nA,1\nB,2", "csv")
        assert t.category_label == "x"
        assert t.column_headers == ("y",)
        assert t.row_headers == ("A", "B")
        assert t.cell(0, 0).number_value == 1.0
        assert t.cell(1, 0).number_value == 2.0
        assert not t.positional_rows

    def test_ragged_row_rejected(self):
        with pytest.raises(SchemaError):
            parse_table(b"x,y\nA,1\nB", "csv")

    def test_duplicate_headers_rejected(self):
        with pytest.raises(SchemaError):
            parse_table(b"x,y,y\nA,1,2", "csv")

    def test_duplicate_row_keys_rejected(self):
        with pytest.raises(SchemaError):
            parse_table(b"x,y\nA,1\nA,2", "csv")

    def test_empty_input(self):
        with pytest.raises(EmptyTable):
            parse_table(b"", "csv")
        with pytest.raises(EmptyTable):
            parse_table(b"x,y\n", "csv")

    def test_all_numeric_grid_is_positional(self):
        t = parse_table(b"x,y\n1,2\n3,4", "csv")
        assert t.positional_rows
        assert t.column_headers == ("x", "y")
        assert t.row_headers == ("r1", "r2")
        assert t.cell(1, 0).number_value == 3.0

    def test_bad_utf8(self):
        with pytest.raises(ParseError):
            parse_table(b"\xff\xfe", "csv")


class TestParseMarkdown:
    def test_example_row(self):
        # hand-parse: header cells h1,h2; one data row (a, 3.5); first column
        # non-numeric so "a" is the row key and 3.5 sits in grid cell (0, 1)
        t = parse_table(b"|h1|h2|\n|-|-|\n|a|3.5|", "markdown")
        assert t.n_rows == 1
        assert t.row_headers == ("a",)
        assert t.column_headers == ("h2",)
        assert t.category_label == "h1"
        assert t.cell(0, 0).number_value == 3.5

    def test_title_line(self):
        t = parse_table("# Sales\n|x|y|\n|-|-|\n|A|1|", "markdown")
        assert t.title == "Sales"

    def test_missing_separator(self):
        with pytest.raises(ParseError):
            parse_table(b"|h1|h2|\n|a|3.5|", "markdown")

    def test_escaped_pipe(self):
        t = parse_table("|x|y|\n|-|-|\n|a\\|b|1|", "markdown")
        assert t.row_headers == ("a|b",)


class TestParseJson:
    def test_roundtrip_fields(self):
        doc = (
            '{"title": "T", "columns": ["a", "b"],'
            ' "rows": [{"header": "r", "cells": [1, "x"]}]}'
        )
        t = parse_table(doc, "json")
        assert t.title == "T"
        assert t.cell(0, 0).number_value == 1.0
        assert t.cell(0, 1).text_value == "x"

    def test_null_cell_empty(self):
        doc = '{"columns": ["a"], "rows": [{"header": "r", "cells": [null]}]}'
        t = parse_table(doc, "json")
        assert t.cell(0, 0).is_empty

    def test_malformed(self):
        with pytest.raises(ParseError):
            parse_table("{not json", "json")
        with pytest.raises(ParseError):
            parse_table('{"columns": []}', "json")


class TestTriples:
    def test_all_numeric_2x2(self):
        t = parse_table(b"x,a,b\nP,1,2\nQ,3,4", "csv")
        assert len(to_triples(t)) == 4

    def test_empty_cell_skipped(self):
        t = parse_table(b"x,a,b\nP,1,\nQ,3,4", "csv")
        assert len(to_triples(t)) == 3

    def test_single_column(self):
        t = parse_table(b"x,a\nP,1\nQ,3\nR,5", "csv")
        triples = to_triples(t)
        assert len(triples) == 3
        assert {tr.col_key for tr in triples.triples} == {"a"}

    def test_permutation_invariance(self):
        t1 = parse_table(b"x,a,b\nP,1,2\nQ,3,4", "csv")
        t2 = parse_table(b"x,a,b\nQ,3,4\nP,1,2", "csv")
        t3 = parse_table(b"x,b,a\nP,2,1\nQ,4,3", "csv")
        assert to_triples(t1) == to_triples(t2) == to_triples(t3)


class TestRecommend:
    # enumeration of the rule table
    def test_one_category_one_numeric_positive(self):
        t = parse_table(b"x,y\nA,1\nB,2\nC,3\nD,4\nE,5", "csv")
        kinds = [r.chart_type for r in recommend_chart(t)]
        assert kinds == [ChartType.BAR, ChartType.PIE, ChartType.LINE]
        assert [r.confidence_rank for r in recommend_chart(t)] == [1, 2, 3]

    def test_negative_values_drop_pie(self):
        t = parse_table(b"x,y\nA,-1\nB,2", "csv")
        kinds = [r.chart_type for r in recommend_chart(t)]
        assert kinds == [ChartType.BAR, ChartType.LINE]

    def test_many_rows_drop_pie(self):
        rows = "".join(f"c{i},1\n" for i in range(13))
        t = parse_table(f"x,y\n{rows}".encode(), "csv")
        kinds = [r.chart_type for r in recommend_chart(t)]
        assert ChartType.PIE not in kinds

    def test_multi_series(self):
        t = parse_table(b"x,a,b\nP,1,2\nQ,3,4", "csv")
        kinds = [r.chart_type for r in recommend_chart(t)]
        assert kinds == [
            ChartType.GROUPED_BAR,
            ChartType.STACKED_BAR,
            ChartType.GROUPED_LINE,
        ]

    def test_multi_series_negative_drops_stacked(self):
        t = parse_table(b"x,a,b\nP,1,-2\nQ,3,4", "csv")
        kinds = [r.chart_type for r in recommend_chart(t)]
        assert kinds == [ChartType.GROUPED_BAR, ChartType.GROUPED_LINE]

    def test_two_numeric_columns_scatter(self):
        t = parse_table(b"x,y\n1,2\n3,4\n5,6", "csv")
        kinds = [r.chart_type for r in recommend_chart(t)]
        assert kinds == [ChartType.SCATTER, ChartType.LINE]

    def test_all_text_rejected(self):
        t = parse_table(b"x,y\nA,red\nB,blue", "csv")
        with pytest.raises(NoChartApplicable):
            recommend_chart(t)

    def test_deterministic(self):
        t = parse_table(b"x,y\nA,1\nB,2", "csv")
        assert recommend_chart(t) == recommend_chart(t)


_header = st.text(
    alphabet=st.characters(min_codepoint=33, max_codepoint=126, exclude_characters='|\\#",'),
    min_size=1,
    max_size=8,
).map(str.strip).filter(bool)


@st.composite
def table_grids(draw):
    n_rows = draw(st.integers(1, 5))
    n_cols = draw(st.integers(1, 4))
    cols = draw(
        st.lists(_header, min_size=n_cols, max_size=n_cols, unique=True)
    )
    row_keys = draw(
        st.lists(
            _header.filter(lambda s: sniff_cell(s).kind is CellKind.TEXT),
            min_size=n_rows,
            max_size=n_rows,
            unique=True,
        )
    )
    values = draw(
        st.lists(
            st.lists(
                st.floats(
                    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
                ),
                min_size=n_cols,
                max_size=n_cols,
            ),
            min_size=n_rows,
            max_size=n_rows,
        )
    )
    return cols, row_keys, values


class TestRoundTrip:
    @settings(max_examples=60, deadline=None)
    @given(table_grids())
    def test_csv_json_markdown_roundtrip(self, grid):
        cols, row_keys, values = grid
        lines = ["cat," + ",".join(cols)]
        for key, row in zip(row_keys, values):
            lines.append(key + "," + ",".join(repr(v) for v in row))
        source = "\n".join(lines)
        try:
            base = parse_table(source, "csv")
        except SchemaError:
            return  # e.g. header that sniffs numeric after csv quoting
        for fmt in ("csv", "json", "markdown"):
            again = parse_table(serialize_table(base, fmt), fmt)
            assert again == base, fmt

    def test_positional_roundtrip(self):
        base = parse_table(b"x,y\n1.5,2\n3,4.25", "csv")
        for fmt in ("csv", "json", "markdown"):
            assert parse_table(serialize_table(base, fmt), fmt) == base

    def test_units_roundtrip(self):
        base = parse_table(b"x,price,share\nA,$3.2,45%\nB,-$5,1%", "csv")
        for fmt in ("csv", "json", "markdown"):
            assert parse_table(serialize_table(base, fmt), fmt) == base

    def test_title_and_empty_cells_roundtrip(self):
        src = '{"title": "My chart", "columns": ["a"], "rows": [{"header": "r", "cells": [null]}]}'
        base = parse_table(src, "json")
        for fmt in ("json", "markdown"):
            assert parse_table(serialize_table(base, fmt), fmt) == base


class TestDataTableValidation:
    def test_dims_must_match(self):
        with pytest.raises(SchemaError):
            DataTable(
                title="",
                column_headers=("a", "b"),
                row_headers=("r",),
                cells=((Cell.number(1),),),
            )

    def test_headers_nonempty(self):
        with pytest.raises(SchemaError):
            DataTable(
                title="",
                column_headers=("", "b"),
                row_headers=("r",),
                cells=((Cell.number(1), Cell.number(2)),),
            )
