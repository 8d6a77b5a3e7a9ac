"""Visual prompt overlays: arrow, ellipse, bounding box, triangle, scribble.

Geometry rules:

* the ellipse center and semi-axes are inherited from the target bbox,
  enlarged by a ratio drawn from [1, 1.5];
* the triangle connects three random points inside the target bbox;
* the arrow tail sits on the image border and its head lands on the target
  bbox center, which must lie inside the centered coordinate space
  [(-W/2, -H/2), (W/2, H/2)];
* the scribble is a quadratic Bezier whose three control points are drawn
  inside the target bbox;
* the bounding box is drawn as-is.

Default sampling picks 3 distinct kinds out of the four non-scribble ones;
pass ``include_scribble=True`` to widen the pool to all five. Overlays use
source-over alpha compositing; pixels outside the drawn footprint are
bit-identical to the base image.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass

from PIL import Image, ImageDraw

from .errors import DegenerateBBox
from .render import BBox, RenderedChart

_PALETTE = [
    (230, 25, 75),
    (60, 180, 75),
    (0, 130, 200),
    (245, 130, 48),
    (145, 30, 180),
    (70, 240, 240),
    (240, 50, 230),
    (128, 128, 0),
]


class PromptKind(enum.Enum):
    ARROW = "arrow"
    ELLIPSE = "ellipse"
    BOUNDING_BOX = "bounding_box"
    TRIANGLE = "triangle"
    SCRIBBLE = "scribble"


_DEFAULT_POOL = (
    PromptKind.ARROW,
    PromptKind.ELLIPSE,
    PromptKind.BOUNDING_BOX,
    PromptKind.TRIANGLE,
)


@dataclass(frozen=True)
class VisualPrompt:
    kind: PromptKind
    geometry: dict
    color: tuple[int, int, int, int]
    alpha: float
    target_bbox: BBox
    thickness: int

    def check_invariants(self, image_size: tuple[int, int]) -> None:
        """Raise AssertionError when the kind-specific containment fails."""
        x, y, w, h = self.target_bbox
        if self.kind is PromptKind.ELLIPSE:
            ratio = self.geometry["ratio"]
            assert 1.0 <= ratio <= 1.5, f"ellipse ratio {ratio} outside [1, 1.5]"
            a, b = self.geometry["semi_axes"]
            assert abs(a - w / 2.0 * ratio) < 1e-9
            assert abs(b - h / 2.0 * ratio) < 1e-9
        elif self.kind is PromptKind.TRIANGLE:
            for vx, vy in self.geometry["vertices"]:
                assert x <= vx <= x + w and y <= vy <= y + h, "vertex outside bbox"
        elif self.kind is PromptKind.ARROW:
            width, height = image_size
            hx, hy = self.geometry["head"]
            cx, cy = hx - width / 2.0, hy - height / 2.0
            assert -width / 2.0 <= cx <= width / 2.0, "arrow head outside space"
            assert -height / 2.0 <= cy <= height / 2.0, "arrow head outside space"
        elif self.kind is PromptKind.SCRIBBLE:
            for vx, vy in self.geometry["control_points"]:
                assert x <= vx <= x + w and y <= vy <= y + h, "anchor outside bbox"
        elif self.kind is PromptKind.BOUNDING_BOX:
            assert tuple(self.geometry["rect"]) == tuple(self.target_bbox)


@dataclass(frozen=True)
class PromptedChart:
    base: RenderedChart
    prompt: VisualPrompt
    image: Image.Image


def sample_prompt_kinds(rng_seed: int, include_scribble: bool = False) -> list[PromptKind]:
    """Three distinct prompt kinds drawn uniformly without replacement."""
    pool = _DEFAULT_POOL + ((PromptKind.SCRIBBLE,) if include_scribble else ())
    rng = random.Random(rng_seed)
    return rng.sample(pool, 3)


def make_prompt(
    kind: PromptKind,
    target_bbox: BBox,
    image_size: tuple[int, int],
    rng_seed: int,
) -> VisualPrompt:
    """Seeded geometry generation for one prompt over one target bbox."""
    x, y, w, h = target_bbox
    if w <= 0 or h <= 0:
        raise DegenerateBBox(f"target bbox has no area: {target_bbox}")
    width, height = image_size
    rng = random.Random(f"{rng_seed}:{kind.value}")
    color = _PALETTE[rng.randrange(len(_PALETTE))]
    alpha = rng.uniform(0.6, 1.0)
    thickness = rng.randint(2, 4)

    if kind is PromptKind.ELLIPSE:
        ratio = rng.uniform(1.0, 1.5)
        geometry = {
            "center": [x + w / 2.0, y + h / 2.0],
            "semi_axes": [w / 2.0 * ratio, h / 2.0 * ratio],
            "ratio": ratio,
        }
    elif kind is PromptKind.TRIANGLE:
        geometry = {
            "vertices": [
                [rng.uniform(x, x + w), rng.uniform(y, y + h)] for _ in range(3)
            ]
        }
    elif kind is PromptKind.BOUNDING_BOX:
        geometry = {"rect": [x, y, w, h]}
    elif kind is PromptKind.ARROW:
        head = (
            min(max(x + w / 2.0, 0.0), float(width)),
            min(max(y + h / 2.0, 0.0), float(height)),
        )
        side = rng.randrange(4)
        if side == 0:
            tail = (rng.uniform(0, width), 0.0)
        elif side == 1:
            tail = (rng.uniform(0, width), float(height))
        elif side == 2:
            tail = (0.0, rng.uniform(0, height))
        else:
            tail = (float(width), rng.uniform(0, height))
        geometry = {"tail": list(tail), "head": list(head)}
    elif kind is PromptKind.SCRIBBLE:
        geometry = {
            "control_points": [
                [rng.uniform(x, x + w), rng.uniform(y, y + h)] for _ in range(3)
            ]
        }
    else:
        raise ValueError(f"unknown prompt kind {kind}")

    return VisualPrompt(
        kind=kind,
        geometry=geometry,
        color=color + (255,),
        alpha=alpha,
        target_bbox=target_bbox,
        thickness=thickness,
    )


def _quad_bezier(p0, p1, p2, steps: int = 40) -> list[tuple[float, float]]:
    pts = []
    for i in range(steps + 1):
        t = i / steps
        u = 1.0 - t
        pts.append(
            (
                u * u * p0[0] + 2 * u * t * p1[0] + t * t * p2[0],
                u * u * p0[1] + 2 * u * t * p1[1] + t * t * p2[1],
            )
        )
    return pts


def rasterize_prompt(prompt: VisualPrompt, size: tuple[int, int]) -> Image.Image:
    """Draw the prompt on a transparent layer of the given size."""
    layer = Image.new("RGBA", size, (0, 0, 0, 0))
    draw = ImageDraw.Draw(layer)
    r, g, b, _ = prompt.color
    fill = (r, g, b, round(prompt.alpha * 255))
    t = prompt.thickness
    geo = prompt.geometry

    if prompt.kind is PromptKind.ELLIPSE:
        cx, cy = geo["center"]
        a, bb = geo["semi_axes"]
        draw.ellipse([cx - a, cy - bb, cx + a, cy + bb], outline=fill, width=t)
    elif prompt.kind is PromptKind.BOUNDING_BOX:
        x, y, w, h = geo["rect"]
        draw.rectangle([x, y, x + w, y + h], outline=fill, width=t)
    elif prompt.kind is PromptKind.TRIANGLE:
        pts = [tuple(p) for p in geo["vertices"]]
        draw.line(pts + [pts[0]], fill=fill, width=t, joint="curve")
    elif prompt.kind is PromptKind.ARROW:
        tail = tuple(geo["tail"])
        head = tuple(geo["head"])
        draw.line([tail, head], fill=fill, width=t)
        ang = math.atan2(head[1] - tail[1], head[0] - tail[0])
        barb = 8.0 + 2 * t
        for off in (math.radians(150), math.radians(-150)):
            bx = head[0] + barb * math.cos(ang + off)
            by = head[1] + barb * math.sin(ang + off)
            draw.line([head, (bx, by)], fill=fill, width=t)
    elif prompt.kind is PromptKind.SCRIBBLE:
        p0, p1, p2 = geo["control_points"]
        draw.line(_quad_bezier(p0, p1, p2), fill=fill, width=t, joint="curve")
    return layer


def overlay(base: RenderedChart, prompt: VisualPrompt) -> PromptedChart:
    """Source-over composite of the prompt onto the rendered chart."""
    layer = rasterize_prompt(prompt, base.image.size)
    image = Image.alpha_composite(base.image, layer)
    return PromptedChart(base=base, prompt=prompt, image=image)


def overlay_image(image: Image.Image, prompt: VisualPrompt) -> Image.Image:
    """Composite onto a bare image (used when chaining several prompts)."""
    return Image.alpha_composite(image, rasterize_prompt(prompt, image.size))
