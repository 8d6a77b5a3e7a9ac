"""Simulated OCR over rendered-chart text annotations.

Tokens are emitted in reading order: boxes whose vertical centers differ by
less than half the median box height share a band; bands run top to bottom
and, within a band, boxes run left to right (ties keep processing order,
which is by top edge then original position). A configurable noise model
(character substitutions from a visually-confusable map, token drops,
adjacent-token merges) emulates real OCR error modes, deterministically per
seed.

A real engine can be slotted in through the OcrEngine protocol: anything
with ``recognize(image_path) -> [(content, bbox), ...]``. The bundled
simulator reads the chart's ``.anno.json`` sidecar instead of the pixels.
"""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .errors import ParseError, SchemaError
from .render import BBox, RenderedChart, TextAnnotation, TextRole, load_annotations

Token = tuple[str, BBox]

_CONFUSABLE = {
    "0": "O", "O": "0", "o": "0",
    "1": "l", "l": "1", "I": "1",
    "5": "S", "S": "5",
    "8": "B", "B": "8",
    "2": "Z", "Z": "2",
    "6": "G", "G": "6",
    "m": "rn", "g": "9", "9": "g",
    ".": ",", ",": ".",
}
_FALLBACK_CHARS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"


@dataclass(frozen=True)
class NoiseConfig:
    char_substitution_rate: float = 0.0
    token_drop_rate: float = 0.0
    merge_adjacent_rate: float = 0.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        for name in ("char_substitution_rate", "token_drop_rate", "merge_adjacent_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise SchemaError(f"{name} must be within [0, 1], got {rate}")


@dataclass(frozen=True)
class OcrResult:
    tokens: tuple[Token, ...]
    prompt_string: str


def scan_order(texts: list[TextAnnotation]) -> list[TextAnnotation]:
    """Order text boxes top-left to bottom-right with row banding."""
    if not texts:
        return []
    tol = statistics.median(t.bbox[3] for t in texts) / 2.0
    indexed = sorted(enumerate(texts), key=lambda item: (item[1].bbox[1], item[0]))
    bands: list[tuple[float, list[tuple[int, TextAnnotation]]]] = []
    for idx, text in indexed:
        cy = text.bbox[1] + text.bbox[3] / 2.0
        best = None
        best_d = tol
        for band in bands:
            d = abs(cy - band[0])
            if d < best_d:
                best, best_d = band, d
        if best is not None:
            best[1].append((idx, text))
        else:
            bands.append((cy, [(idx, text)]))
    ordered = []
    for _, members in bands:
        ordered.extend(t for _, t in sorted(members, key=lambda item: item[1].bbox[0]))
    return ordered


def _substitute_char(ch: str, rng: random.Random) -> str:
    repl = _CONFUSABLE.get(ch)
    if repl is not None:
        return repl
    while True:
        candidate = rng.choice(_FALLBACK_CHARS)
        if candidate != ch:
            return candidate


def apply_noise(tokens: list[Token], noise: NoiseConfig) -> list[Token]:
    """Per-seed deterministic substitution, drop, and merge transforms."""
    rng = random.Random(noise.rng_seed)
    out: list[Token] = []
    for content, bbox in tokens:
        if noise.char_substitution_rate > 0:
            chars = []
            for ch in content:
                if rng.random() < noise.char_substitution_rate:
                    chars.append(_substitute_char(ch, rng))
                else:
                    chars.append(ch)
            content = "".join(chars)
        out.append((content, bbox))
    if noise.token_drop_rate > 0:
        out = [tok for tok in out if rng.random() >= noise.token_drop_rate]
    if noise.merge_adjacent_rate > 0:
        merged: list[Token] = []
        for tok in out:
            if merged and rng.random() < noise.merge_adjacent_rate:
                (prev, pb), (cur, cb) = merged[-1], tok
                x0 = min(pb[0], cb[0])
                y0 = min(pb[1], cb[1])
                x1 = max(pb[0] + pb[2], cb[0] + cb[2])
                y1 = max(pb[1] + pb[3], cb[1] + cb[3])
                merged[-1] = (prev + cur, (x0, y0, x1 - x0, y1 - y0))
            else:
                merged.append(tok)
        out = merged
    return out


def extract(chart: RenderedChart, noise: NoiseConfig | None = None) -> OcrResult:
    """OCR the chart's ground-truth text annotations in scan order."""
    noise = noise or NoiseConfig()
    ordered = scan_order(list(chart.texts))
    tokens = [(t.content, t.bbox) for t in ordered]
    tokens = apply_noise(tokens, noise)
    return OcrResult(
        tokens=tuple(tokens),
        prompt_string=" ".join(content for content, _ in tokens),
    )


# --- model-input assembly -----------------------------------------------------

_IMAGE_OPEN = "<image>"
_IMAGE_CLOSE = "</image>"
_INSTRUCTION_HEADER = "INSTRUCTION: "
_OCR_HEADER = "OCR: "


@dataclass(frozen=True)
class ModelInputLayout:
    """Byte-stable serialization of (image, instruction, OCR prompt).

    Sections appear in the fixed order image placeholder, instruction,
    OCR text, each introduced by its literal header."""

    image_ref: str
    instruction: str
    ocr_prompt: str

    def serialize(self) -> str:
        return (
            f"{_IMAGE_OPEN}{self.image_ref}{_IMAGE_CLOSE}\n"
            f"{_INSTRUCTION_HEADER}{self.instruction}\n"
            f"{_OCR_HEADER}{self.ocr_prompt}"
        )

    @classmethod
    def parse(cls, payload: str) -> "ModelInputLayout":
        first, _, rest = payload.partition("\n")
        if not (first.startswith(_IMAGE_OPEN) and first.endswith(_IMAGE_CLOSE)):
            raise ParseError("missing image placeholder line")
        image_ref = first[len(_IMAGE_OPEN):-len(_IMAGE_CLOSE)]
        if not rest.startswith(_INSTRUCTION_HEADER):
            raise ParseError("missing instruction header")
        body = rest[len(_INSTRUCTION_HEADER):]
        marker = f"\n{_OCR_HEADER}"
        where = body.find(marker)
        if where < 0:
            raise ParseError("missing OCR header")
        instruction = body[:where]
        ocr_prompt = body[where + len(marker):]
        return cls(image_ref=image_ref, instruction=instruction, ocr_prompt=ocr_prompt)


def assemble_model_input(
    ocr: OcrResult, instruction: str, image_ref: str
) -> ModelInputLayout:
    """Lay out (image, instruction, OCR) in the model's expected order."""
    if "\n" in image_ref or _IMAGE_CLOSE in image_ref:
        raise SchemaError("image_ref must be a single line without markup")
    for line in instruction.splitlines():
        if line.startswith(_OCR_HEADER.rstrip()):
            raise SchemaError("instruction lines must not start with the OCR header")
    return ModelInputLayout(
        image_ref=image_ref,
        instruction=instruction,
        ocr_prompt=ocr.prompt_string,
    )


# --- pluggable engines ---------------------------------------------------------


class OcrEngine(Protocol):
    """Contract a real OCR engine must satisfy to replace the simulator."""

    def recognize(self, image_path: str | Path) -> list[Token]:
        ...


class SimulatedOcr:
    """OcrEngine backed by the chart's annotation sidecar, not its pixels."""

    def __init__(self, noise: NoiseConfig | None = None):
        self.noise = noise or NoiseConfig()

    def recognize(self, image_path: str | Path) -> list[Token]:
        doc = load_annotations(image_path)
        texts = [
            TextAnnotation(
                content=t["content"],
                bbox=tuple(t["bbox"]),
                role=TextRole(t["role"]),
            )
            for t in doc["texts"]
        ]
        ordered = scan_order(texts)
        return apply_noise([(t.content, t.bbox) for t in ordered], self.noise)
