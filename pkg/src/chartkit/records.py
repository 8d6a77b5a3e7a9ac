"""Instruction-record serialization, stage manifests, and dataset statistics.

Records are stored as UTF-8 line-delimited JSON with sorted keys, one
record per line. Unknown top-level fields survive a read/write round trip.
The stage/task admissibility matrix is:

* Stage I:   chart_to_table
* Stage II:  summarization, num_vis_reasoning, open_cqa, low_level_qa
* Stage III: chart_to_text, open_cqa, chart_to_table, chart_qa
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ForbiddenTaskForStage, IoError, SchemaVersionMismatch
from .qa import Conversation, Speaker

SCHEMA_VERSION = "1.0"


class Stage(enum.Enum):
    I = "I"
    II = "II"
    III = "III"


class RecordTask(enum.Enum):
    CHART_TO_TABLE = "chart_to_table"
    SUMMARIZATION = "summarization"
    NUM_VIS_REASONING = "num_vis_reasoning"
    OPEN_CQA = "open_cqa"
    LOW_LEVEL_QA = "low_level_qa"
    CHART_QA = "chart_qa"
    CHART_TO_TEXT = "chart_to_text"


STAGE_TASKS: dict[Stage, frozenset[RecordTask]] = {
    Stage.I: frozenset({RecordTask.CHART_TO_TABLE}),
    Stage.II: frozenset(
        {
            RecordTask.SUMMARIZATION,
            RecordTask.NUM_VIS_REASONING,
            RecordTask.OPEN_CQA,
            RecordTask.LOW_LEVEL_QA,
        }
    ),
    Stage.III: frozenset(
        {
            RecordTask.CHART_TO_TEXT,
            RecordTask.OPEN_CQA,
            RecordTask.CHART_TO_TABLE,
            RecordTask.CHART_QA,
        }
    ),
}


@dataclass(frozen=True)
class InstructionRecord:
    id: str
    image_ref: str
    ocr_prompt: str
    conversation: Conversation
    stage: Stage
    task: RecordTask
    metadata: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.task not in STAGE_TASKS[self.stage]:
            raise ForbiddenTaskForStage(
                f"task {self.task.value} is not admissible for stage {self.stage.value}"
            )


def record_to_dict(record: InstructionRecord) -> dict:
    doc = dict(record.extras)
    doc.update(
        {
            "schema_version": SCHEMA_VERSION,
            "id": record.id,
            "image_ref": record.image_ref,
            "ocr_prompt": record.ocr_prompt,
            "stage": record.stage.value,
            "task": record.task.value,
            "conversation": [
                {"speaker": speaker.value, "text": text}
                for speaker, text in record.conversation.turns
            ],
            "metadata": record.metadata,
        }
    )
    return doc


_KNOWN_KEYS = {
    "schema_version", "id", "image_ref", "ocr_prompt", "stage", "task",
    "conversation", "metadata",
}


def record_from_dict(doc: dict) -> InstructionRecord:
    version = doc.get("schema_version", "")
    if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise SchemaVersionMismatch(
            f"record schema {version!r} is incompatible with {SCHEMA_VERSION!r}"
        )
    turns = tuple(
        (Speaker(t["speaker"]), t["text"]) for t in doc["conversation"]
    )
    extras = {k: v for k, v in doc.items() if k not in _KNOWN_KEYS}
    return InstructionRecord(
        id=doc["id"],
        image_ref=doc["image_ref"],
        ocr_prompt=doc["ocr_prompt"],
        conversation=Conversation(turns=turns),
        stage=Stage(doc["stage"]),
        task=RecordTask(doc["task"]),
        metadata=doc.get("metadata", {}),
        extras=extras,
    )


def write_records(
    records: list[InstructionRecord],
    path: str | Path,
    generator_config_hash: str = "",
) -> dict:
    """Write JSONL; returns the manifest for the whole record set."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for record in records:
                f.write(json.dumps(record_to_dict(record), sort_keys=True,
                                   ensure_ascii=False))
                f.write("\n")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e
    task_counts: dict[str, int] = {}
    stage_counts: dict[str, int] = {}
    for record in records:
        task_counts[record.task.value] = task_counts.get(record.task.value, 0) + 1
        stage_counts[record.stage.value] = stage_counts.get(record.stage.value, 0) + 1
    return {
        "schema_version": SCHEMA_VERSION,
        "total": len(records),
        "task_counts": dict(sorted(task_counts.items())),
        "stage_counts": dict(sorted(stage_counts.items())),
        "generator_config_hash": generator_config_hash,
    }


def read_records(path: str | Path) -> list[InstructionRecord]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    records = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as e:
            raise IoError(f"line {i} is not valid JSON: {e}") from e
        records.append(record_from_dict(doc))
    return records


@dataclass(frozen=True)
class Manifest:
    stage: Stage
    task_counts: dict
    total: int
    schema_version: str = SCHEMA_VERSION
    generator_config_hash: str = ""


def build_stage_manifest(
    stage: Stage,
    records: list[InstructionRecord],
    generator_config_hash: str = "",
) -> Manifest:
    """Manifest of one training stage; rejects inadmissible tasks."""
    task_counts: dict[str, int] = {}
    for record in records:
        if record.stage is not stage or record.task not in STAGE_TASKS[stage]:
            raise ForbiddenTaskForStage(
                f"record {record.id!r} ({record.task.value}, stage "
                f"{record.stage.value}) not admissible for stage {stage.value}"
            )
        task_counts[record.task.value] = task_counts.get(record.task.value, 0) + 1
    return Manifest(
        stage=stage,
        task_counts=dict(sorted(task_counts.items())),
        total=len(records),
        generator_config_hash=generator_config_hash,
    )


@dataclass(frozen=True)
class GroupStats:
    chart_types: int
    charts: int
    samples: int

    @property
    def samples_per_chart(self) -> float:
        return samples_per_chart(self.samples, self.charts)


@dataclass(frozen=True)
class DatasetStats:
    groups: dict  # task value -> GroupStats
    overall: GroupStats


def samples_per_chart(samples: int, charts: int) -> float:
    """Samples-to-charts ratio; 0.0 for an empty chart set."""
    return samples / charts if charts else 0.0


def compute_stats(records: list[InstructionRecord]) -> DatasetStats:
    """Per-task and overall (#chart types, #charts, #samples) counts."""

    def group_of(subset: list[InstructionRecord]) -> GroupStats:
        types = {r.metadata.get("chart_type") for r in subset} - {None}
        charts = {r.image_ref for r in subset if r.image_ref}
        return GroupStats(
            chart_types=len(types), charts=len(charts), samples=len(subset)
        )

    by_task: dict[str, list[InstructionRecord]] = {}
    for record in records:
        by_task.setdefault(record.task.value, []).append(record)
    groups = {task: group_of(subset) for task, subset in sorted(by_task.items())}
    return DatasetStats(groups=groups, overall=group_of(records))


def stats_to_dict(stats: DatasetStats) -> dict:
    def row(g: GroupStats) -> dict:
        return {
            "chart_types": g.chart_types,
            "charts": g.charts,
            "samples": g.samples,
            "samples_per_chart": g.samples_per_chart,
        }

    return {
        "groups": {task: row(g) for task, g in stats.groups.items()},
        "overall": row(stats.overall),
    }
