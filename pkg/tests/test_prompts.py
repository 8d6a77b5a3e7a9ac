import math

import numpy as np
import pytest
from PIL import Image

from chartkit.errors import DegenerateBBox
from chartkit.prompts import (
    PromptKind,
    VisualPrompt,
    make_prompt,
    overlay,
    rasterize_prompt,
    sample_prompt_kinds,
)
from chartkit.render import spec_for, render
from chartkit.tables import ChartType, parse_table


def _chart():
    t = parse_table(b"cat,value\nA,10\nB,20", "csv")
    return render(t, spec_for(t, ChartType.BAR))


class TestSampling:
    def test_three_distinct_no_scribble(self):
        for seed in range(200):
            kinds = sample_prompt_kinds(seed)
            assert len(kinds) == 3
            assert len(set(kinds)) == 3
            assert PromptKind.SCRIBBLE not in kinds

    def test_deterministic(self):
        assert sample_prompt_kinds(99) == sample_prompt_kinds(99)

    def test_scribble_opt_in(self):
        seen = set()
        for seed in range(300):
            seen.update(sample_prompt_kinds(seed, include_scribble=True))
        assert PromptKind.SCRIBBLE in seen

    def test_uniform_frequency_binomial(self):
        # each kind appears with p = 3/4 per draw; over n draws the count
        # lies within 3 sigma of n*p with sigma = sqrt(n*p*(1-p))
        n = 10_000
        counts = {k: 0 for k in PromptKind if k is not PromptKind.SCRIBBLE}
        for seed in range(n):
            for k in sample_prompt_kinds(seed):
                counts[k] += 1
        p = 3.0 / 4.0
        sigma = math.sqrt(n * p * (1 - p))
        for k, c in counts.items():
            assert abs(c - n * p) <= 3 * sigma, (k, c)


class TestGeometry:
    def test_ellipse_example(self):
        # bbox (10,10,30,20) at ratio 1.0 -> center (25,20), semi-axes (15,10)
        p = make_prompt(PromptKind.ELLIPSE, (10, 10, 30, 20), (100, 100), 0)
        assert p.geometry["center"] == [25.0, 20.0]
        ratio = p.geometry["ratio"]
        assert p.geometry["semi_axes"] == [15.0 * ratio, 10.0 * ratio]
        assert 1.0 <= ratio <= 1.5
        forced = VisualPrompt(
            kind=PromptKind.ELLIPSE,
            geometry={"center": [25.0, 20.0], "semi_axes": [15.0, 10.0], "ratio": 1.0},
            color=(255, 0, 0, 255),
            alpha=1.0,
            target_bbox=(10, 10, 30, 20),
            thickness=2,
        )
        forced.check_invariants((100, 100))

    def test_triangle_contained(self):
        for seed in range(50):
            p = make_prompt(PromptKind.TRIANGLE, (0, 0, 10, 10), (80, 60), seed)
            for vx, vy in p.geometry["vertices"]:
                assert 0 <= vx <= 10 and 0 <= vy <= 10

    def test_arrow_head_in_centered_space(self):
        for seed in range(50):
            p = make_prompt(PromptKind.ARROW, (10, 5, 30, 20), (100, 50), seed)
            hx, hy = p.geometry["head"]
            assert -50 <= hx - 50 <= 50
            assert -25 <= hy - 25 <= 25
            p.check_invariants((100, 50))

    def test_scribble_anchors_contained(self):
        for seed in range(50):
            p = make_prompt(PromptKind.SCRIBBLE, (5, 5, 20, 12), (80, 60), seed)
            for vx, vy in p.geometry["control_points"]:
                assert 5 <= vx <= 25 and 5 <= vy <= 17

    def test_determinism(self):
        a = make_prompt(PromptKind.TRIANGLE, (0, 0, 10, 10), (80, 60), 7)
        b = make_prompt(PromptKind.TRIANGLE, (0, 0, 10, 10), (80, 60), 7)
        assert a == b

    def test_degenerate_bbox(self):
        with pytest.raises(DegenerateBBox):
            make_prompt(PromptKind.ELLIPSE, (5, 5, 0, 10), (80, 60), 0)


class TestOverlay:
    def test_opaque_outline_exact_color(self):
        chart = _chart()
        p = VisualPrompt(
            kind=PromptKind.BOUNDING_BOX,
            geometry={"rect": [50, 50, 40, 30]},
            color=(255, 0, 0, 255),
            alpha=1.0,
            target_bbox=(50, 50, 40, 30),
            thickness=3,
        )
        out = overlay(chart, p)
        px = out.image.getpixel((51, 51))
        assert px == (255, 0, 0, 255)

    def test_half_alpha_source_over(self):
        from chartkit.prompts import overlay_image

        white = Image.new("RGBA", (200, 200), (255, 255, 255, 255))
        p = VisualPrompt(
            kind=PromptKind.BOUNDING_BOX,
            geometry={"rect": [50, 50, 40, 30]},
            color=(255, 0, 0, 255),
            alpha=0.5,
            target_bbox=(50, 50, 40, 30),
            thickness=3,
        )
        out = overlay_image(white, p)
        r, g, b, a = out.getpixel((51, 51))
        # source-over: 0.5*red + 0.5*white = (255, 127, 127) up to rounding
        assert r == 255 and abs(g - 127) <= 1 and abs(b - 127) <= 1 and a == 255

    def test_untouched_pixels_identical(self):
        chart = _chart()
        p = make_prompt(PromptKind.BOUNDING_BOX, (100, 100, 60, 40), chart.image.size, 3)
        out = overlay(chart, p)
        base = np.asarray(chart.image)
        after = np.asarray(out.image)
        assert (base[0, 0] == after[0, 0]).all()
        assert (base[-1, -1] == after[-1, -1]).all()

    def test_diff_confined_to_dilated_footprint(self):
        chart = _chart()
        for seed, kind in enumerate(PromptKind):
            p = make_prompt(kind, (120, 120, 80, 50), chart.image.size, seed)
            out = overlay(chart, p)
            base = np.asarray(chart.image).astype(int)
            after = np.asarray(out.image).astype(int)
            diff = (base != after).any(axis=2)
            mask = np.asarray(rasterize_prompt(p, chart.image.size))[:, :, 3] > 0
            # dilate by 1 px
            dil = mask.copy()
            dil[1:, :] |= mask[:-1, :]
            dil[:-1, :] |= mask[1:, :]
            dil[:, 1:] |= mask[:, :-1]
            dil[:, :-1] |= mask[:, 1:]
            assert not (diff & ~dil).any(), kind

    def test_dimensions_preserved(self):
        chart = _chart()
        p = make_prompt(PromptKind.ELLIPSE, (100, 100, 60, 40), chart.image.size, 1)
        out = overlay(chart, p)
        assert out.image.size == chart.image.size
