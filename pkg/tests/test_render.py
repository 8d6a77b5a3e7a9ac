import io
import json
import math

import pytest

from chartkit.errors import RenderOverflow, SchemaError, UnsupportedCombination
from chartkit.render import (
    ChartSpec,
    TextRole,
    extract_value_from_mark,
    load_annotations,
    render,
    save_chart,
    sidecar_path,
    spec_for,
)
from chartkit.synth import random_table
from chartkit.tables import ChartType, parse_table

EPS = 1e-9


def _bar_table(pairs):
    rows = "\n".join(f"{k},{v}" for k, v in pairs)
    return parse_table(f"cat,value\n{rows}".encode(), "csv")


def _png_bytes(chart):
    buf = io.BytesIO()
    chart.image.save(buf, format="PNG")
    return buf.getvalue()


class TestBarGeometry:
    def test_two_to_one_height_ratio(self):
        # oracle: bar height is proportional to value under a shared linear
        # axis scale, so the 20-bar must be exactly twice the 10-bar
        t = _bar_table([("A", 10), ("B", 20)])
        chart = render(t, spec_for(t, ChartType.BAR))
        by_cat = {m.category: m for m in chart.marks}
        ratio = by_cat["B"].bbox[3] / by_cat["A"].bbox[3]
        # 1 px of slack on the tall bar translates to ratio slack of ~1/h
        assert abs(ratio - 2.0) <= 2.0 / by_cat["A"].bbox[3]

    def test_extraction_within_two_percent(self):
        t = _bar_table([("A", 10), ("B", 20), ("C", 55.5)])
        chart = render(t, spec_for(t, ChartType.BAR))
        for m in chart.marks:
            got = extract_value_from_mark(chart, m)
            assert abs(got - m.value) / max(abs(m.value), EPS) <= 0.02

    def test_zero_value_bar(self):
        t = _bar_table([("A", 0), ("B", 20)])
        chart = render(t, spec_for(t, ChartType.BAR))
        zero = next(m for m in chart.marks if m.category == "A")
        assert zero.bbox[3] > 0  # positive area invariant
        assert extract_value_from_mark(chart, zero) == 0.0

    def test_monotone_heights(self):
        t = _bar_table([("A", 5), ("B", 12), ("C", 30), ("D", 31)])
        chart = render(t, spec_for(t, ChartType.BAR))
        heights = {m.category: m.bbox[3] for m in chart.marks}
        assert heights["A"] < heights["B"] < heights["C"] < heights["D"]


class TestPieGeometry:
    def test_quarter_and_three_quarter_sweeps(self):
        t = _bar_table([("A", 25), ("B", 75)])
        chart = render(t, spec_for(t, ChartType.PIE))
        a, b = chart.marks
        assert extract_value_from_mark(chart, a) == pytest.approx(25.0, rel=1e-4)
        assert extract_value_from_mark(chart, b) == pytest.approx(75.0, rel=1e-4)
        # A's wedge spans -90..0 degrees: a quarter-disc bbox, so w == h == r
        assert a.bbox[2] == pytest.approx(a.bbox[3], abs=1e-6)

    def test_large_wedge_residual_path(self):
        # 324-degree wedge has a bbox-ambiguous sweep; the residual rule
        # (360 minus the unambiguous rest) must still recover it
        t = _bar_table([("A", 10), ("B", 90)])
        chart = render(t, spec_for(t, ChartType.PIE))
        for m in chart.marks:
            got = extract_value_from_mark(chart, m)
            assert abs(got - m.value) / m.value <= 0.02

    def test_negative_rejected(self):
        t = _bar_table([("A", -5), ("B", 10)])
        with pytest.raises(UnsupportedCombination):
            render(t, ChartSpec(chart_type=ChartType.PIE))

    def test_zero_slice_rejected(self):
        t = _bar_table([("A", 0), ("B", 10)])
        with pytest.raises(UnsupportedCombination):
            render(t, ChartSpec(chart_type=ChartType.PIE))


class TestDeterminism:
    def test_byte_identical_replay(self):
        t = _bar_table([("A", 10), ("B", 20)])
        spec = spec_for(t, ChartType.BAR, style_seed=42)
        c1, c2 = render(t, spec), render(t, spec)
        assert _png_bytes(c1) == _png_bytes(c2)
        assert c1.marks == c2.marks
        assert c1.texts == c2.texts

    def test_style_seed_changes_pixels(self):
        t = _bar_table([("A", 10), ("B", 20)])
        c1 = render(t, spec_for(t, ChartType.BAR, style_seed=1))
        c2 = render(t, spec_for(t, ChartType.BAR, style_seed=7))
        assert _png_bytes(c1) != _png_bytes(c2)


class TestAnnotations:
    def test_completeness_matches_numeric_cells(self):
        t = parse_table(b"x,a,b\nP,1,2\nQ,3,\nR,5,6", "csv")
        chart = render(t, spec_for(t, ChartType.GROUPED_BAR))
        assert len(chart.marks) == 5

    def test_legend_entries_present(self):
        t = parse_table(b"x,a,b\nP,1,2\nQ,3,4", "csv")
        chart = render(t, spec_for(t, ChartType.GROUPED_BAR))
        legend = {x.content for x in chart.texts if x.role is TextRole.LEGEND_ENTRY}
        assert legend == {"a", "b"}

    def test_marks_within_bounds(self):
        t = _bar_table([("A", 10), ("B", 20)])
        chart = render(t, spec_for(t, ChartType.BAR))
        for m in chart.marks:
            x, y, w, h = m.bbox
            assert 0 <= x and 0 <= y
            assert x + w <= chart.spec.width_px
            assert y + h <= chart.spec.height_px

    def test_no_fully_coincident_text_boxes(self):
        t = parse_table(b"x,a,b\nP,1,2\nQ,3,4", "csv")
        chart = render(t, spec_for(t, ChartType.GROUPED_BAR))
        boxes = [(t2.content, t2.bbox) for t2 in chart.texts]
        seen = {}
        for content, bbox in boxes:
            if bbox in seen:
                assert seen[bbox] == content
            seen[bbox] = content


class TestOtherTypes:
    def test_line_extraction(self):
        t = _bar_table([("A", -12), ("B", 20), ("C", 7.5)])
        chart = render(t, spec_for(t, ChartType.LINE))
        for m in chart.marks:
            got = extract_value_from_mark(chart, m)
            assert abs(got - m.value) / max(abs(m.value), EPS) <= 0.02

    def test_stacked_extraction(self):
        t = parse_table(b"x,a,b,c\nP,5,10,2\nQ,8,1,4", "csv")
        chart = render(t, spec_for(t, ChartType.STACKED_BAR))
        for m in chart.marks:
            got = extract_value_from_mark(chart, m)
            assert abs(got - m.value) / max(abs(m.value), EPS) <= 0.02

    def test_scatter_extraction_both_axes(self):
        t = parse_table(b"u,v\n1,40\n5,80\n9,20", "csv")
        chart = render(t, spec_for(t, ChartType.SCATTER))
        assert len(chart.marks) == 6
        for m in chart.marks:
            got = extract_value_from_mark(chart, m)
            assert abs(got - m.value) / max(abs(m.value), EPS) <= 0.02

    def test_positional_line_extraction(self):
        t = parse_table(b"u,v\n1,40\n5,80\n9,20", "csv")
        chart = render(t, spec_for(t, ChartType.LINE))
        for m in chart.marks:
            got = extract_value_from_mark(chart, m)
            assert abs(got - m.value) / max(abs(m.value), EPS) <= 0.02

    def test_all_seven_types_roundtrip(self):
        for i, kind in enumerate(ChartType):
            t = random_table(1000 + i, kind)
            chart = render(t, spec_for(t, kind, style_seed=i))
            for m in chart.marks:
                got = extract_value_from_mark(chart, m)
                assert abs(got - m.value) / max(abs(m.value), EPS) <= 0.02, kind


class TestErrors:
    def test_overflow_tiny_image_long_title(self):
        t = _bar_table([("A", 10), ("B", 20)])
        spec = ChartSpec(
            chart_type=ChartType.BAR,
            width_px=128,
            height_px=128,
            title="An exceedingly long chart title that cannot possibly fit",
        )
        with pytest.raises(RenderOverflow):
            render(t, spec)

    def test_spec_validation(self):
        with pytest.raises(SchemaError):
            ChartSpec(chart_type=ChartType.BAR, width_px=64)
        with pytest.raises(SchemaError):
            ChartSpec(chart_type=ChartType.GROUPED_BAR)  # missing legend
        with pytest.raises(SchemaError):
            ChartSpec(chart_type=ChartType.BAR, legend=("a",))

    def test_type_not_recommended(self):
        t = parse_table(b"x,a,b\nP,1,2\nQ,3,4", "csv")  # multi-series
        with pytest.raises(UnsupportedCombination):
            render(t, ChartSpec(chart_type=ChartType.BAR))


class TestPersistence:
    def test_save_and_sidecar(self, tmp_path):
        t = parse_table("# Totals\n|cat|value|\n|-|-|\n|A|10|\n|B|20|", "markdown")
        chart = render(t, spec_for(t, ChartType.BAR), source_table_id="t1")
        img = tmp_path / "c.png"
        side = save_chart(chart, img)
        assert side == sidecar_path(img)
        assert side.name == "c.png.anno.json"
        doc = json.loads(side.read_text())
        assert doc["source_table_id"] == "t1"
        assert {m["category"] for m in doc["marks"]} == {"A", "B"}
        roles = {t2["role"] for t2 in doc["texts"]}
        assert "y_tick" in roles and "title" in roles
        assert load_annotations(img) == doc

    def test_saved_png_deterministic(self, tmp_path):
        t = _bar_table([("A", 10), ("B", 20)])
        chart = render(t, spec_for(t, ChartType.BAR))
        p1, p2 = tmp_path / "a.png", tmp_path / "b.png"
        save_chart(chart, p1)
        save_chart(render(t, spec_for(t, ChartType.BAR)), p2)
        assert p1.read_bytes() == p2.read_bytes()
