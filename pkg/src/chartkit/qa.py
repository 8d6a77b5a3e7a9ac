"""Question-answer generation grounded in the source table.

Every answer is computed exactly from the DataTable: numeric answers are
rounded to at most two decimals (half to even) with trailing zeros trimmed,
and "difference" always means the absolute difference. Extremum ties break
toward the first category in table order and are flagged in the sample's
notes.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from . import templates
from .errors import BackendUnavailable, TemplateInapplicable, ValidationFailed
from .render import ChartSpec
from .tables import (
    ChartType,
    DataTable,
    GROUPED_TYPES,
    serialize_table,
)


class QaTask(enum.Enum):
    REASONING = "reasoning"
    EXTREMUM = "extremum"
    RANGE = "range"
    RETRIEVAL = "retrieval"


@dataclass(frozen=True)
class QASample:
    question: str
    answer: str
    task: QaTask
    target_elements: tuple[tuple[str, str], ...]  # (series, category) refs
    numeric_answer: float | None
    template_id: str
    notes: tuple[str, ...] = ()


class Speaker(enum.Enum):
    HUMAN = "human"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class Conversation:
    turns: tuple[tuple[Speaker, str], ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.turns:
            raise ValueError("conversation needs at least one turn")
        for i, (speaker, _) in enumerate(self.turns):
            expected = Speaker.HUMAN if i % 2 == 0 else Speaker.ASSISTANT
            if speaker is not expected:
                raise ValueError("turns must alternate human/assistant, human first")

    @property
    def rounds(self) -> int:
        return len(self.turns) // 2


@dataclass(frozen=True)
class CoTAnswer:
    steps: tuple[str, ...]
    final_table: DataTable

    @property
    def text(self) -> str:
        return "\n".join(
            f"Step {i + 1}: {step}" for i, step in enumerate(self.steps)
        )


def format_answer(value: float) -> str:
    """Canonical answer string: <=2 decimals, half-to-even, zeros trimmed."""
    r = round(float(value), 2)
    if r == int(r):
        return str(int(r))
    return repr(r)


_CHART_WORD = {
    ChartType.BAR: "bar",
    ChartType.GROUPED_BAR: "bar",
    ChartType.STACKED_BAR: "bar",
    ChartType.LINE: "line",
    ChartType.GROUPED_LINE: "line",
    ChartType.PIE: "pie",
}


def _numeric_elements(table: DataTable) -> list[tuple[str, str, float]]:
    """(series, category, value) for every numeric cell, in table order."""
    categories, series, matrix = table.series_view()
    out = []
    for i, cat in enumerate(categories):
        for s, name in enumerate(series):
            cell = matrix[i][s]
            if cell.is_number:
                out.append((name, cat, cell.number_value))
    return out


def _numeric_series_names(table: DataTable) -> list[str]:
    categories, series, matrix = table.series_view()
    names = []
    for s, name in enumerate(series):
        col = [matrix[i][s] for i in range(len(categories))]
        nums = [c for c in col if c.is_number]
        if nums and all(c.is_number or c.is_empty for c in col):
            names.append(name)
    return names


def _sample(values: list, rng: random.Random, k: int) -> list:
    return rng.sample(values, k)


def gen_qa_for_task(
    table: DataTable, spec: ChartSpec, task: QaTask, rng_seed: int
) -> QASample:
    """One QA sample for an explicit task; TemplateInapplicable if none fits."""
    rng = random.Random(rng_seed)
    elements = [
        (s, c, v) for s, c, v in _numeric_elements(table)
        if s in set(_numeric_series_names(table))
    ]
    if not elements:
        raise TemplateInapplicable("table has no numeric values")
    values = [v for _, _, v in elements]
    word = _CHART_WORD.get(spec.chart_type)
    multi = len(_numeric_series_names(table)) > 1
    whole_chart_ok = not table.positional_rows

    if task is QaTask.EXTREMUM:
        if word is None:
            raise TemplateInapplicable("extremum templates name a chart type")
        which = rng.choice(["max", "min"])
        template_id, question = templates.EXTREMUM[(word, which)]
        best = max(values) if which == "max" else min(values)
        winners = [(s, c) for s, c, v in elements if v == best]
        notes = ("extremum tie broken by first category order",) if len(winners) > 1 else ()
        return QASample(
            question=question,
            answer=format_answer(best),
            task=task,
            target_elements=(winners[0],),
            numeric_answer=round(best, 2),
            template_id=template_id,
            notes=notes,
        )

    if task is QaTask.RANGE:
        if word is None:
            raise TemplateInapplicable("range templates name a chart type")
        if len(values) < 2:
            raise TemplateInapplicable("range question needs at least two values")
        template_id, question = templates.RANGE[word]
        result = max(values) - min(values)
        hi = next((s, c) for s, c, v in elements if v == max(values))
        lo = next((s, c) for s, c, v in elements if v == min(values))
        return QASample(
            question=question,
            answer=format_answer(result),
            task=task,
            target_elements=(hi, lo),
            numeric_answer=round(result, 2),
            template_id=template_id,
            notes=(),
        )

    if task is QaTask.RETRIEVAL:
        choices = ["value"]
        if word in templates.RETRIEVAL_COUNT and not multi:
            choices.append("count")
        kind = rng.choice(choices)
        if kind == "count":
            template_id, question = templates.RETRIEVAL_COUNT[word]
            count = len(elements)
            return QASample(
                question=question,
                answer=str(count),
                task=task,
                target_elements=(),
                numeric_answer=float(count),
                template_id=template_id,
                notes=(),
            )
        s, c, v = elements[rng.randrange(len(elements))]
        if multi or table.positional_rows:
            template_id, template = templates.RETRIEVAL_VALUE_SERIES
            question = template.format(x_axis=c, y_axis=s)
        else:
            template_id, template = templates.RETRIEVAL_VALUE_SINGLE
            question = template.format(x_axis=c)
        return QASample(
            question=question,
            answer=format_answer(v),
            task=task,
            target_elements=((s, c),),
            numeric_answer=round(v, 2),
            template_id=template_id,
            notes=(),
        )

    if task is QaTask.REASONING:
        pool = []
        if whole_chart_ok:
            pool.extend(templates.REASONING_WHOLE_CHART)
        if len(elements) >= 2:
            if multi or table.positional_rows:
                pool.extend(templates.REASONING_MULTI_SERIES)
            else:
                pool.extend(templates.REASONING_SINGLE_SERIES)
        if not pool:
            raise TemplateInapplicable("no reasoning template fits this table")
        template_id, template = pool[rng.randrange(len(pool))]
        if template_id.endswith("_all"):
            total = sum(values)
            result = total if template_id == "reasoning/sum_all" else total / len(values)
            return QASample(
                question=template,
                answer=format_answer(result),
                task=task,
                target_elements=(),
                numeric_answer=round(result, 2),
                template_id=template_id,
                notes=(),
            )
        (s1, c1, v1), (s2, c2, v2) = _sample(elements, rng, 2)
        if "sum" in template_id:
            result = v1 + v2
        elif "mean" in template_id:
            result = (v1 + v2) / 2.0
        else:
            result = abs(v1 - v2)
        if template_id in dict(templates.REASONING_MULTI_SERIES):
            question = template.format(
                first_x_axis=c1, second_x_axis=c2,
                first_y_axis=s1, second_y_axis=s2,
            )
        else:
            question = template.format(first_x_axis=c1, second_x_axis=c2)
        return QASample(
            question=question,
            answer=format_answer(result),
            task=task,
            target_elements=((s1, c1), (s2, c2)),
            numeric_answer=round(result, 2),
            template_id=template_id,
            notes=(),
        )

    raise TemplateInapplicable(f"unknown task {task}")


def applicable_tasks(table: DataTable, spec: ChartSpec) -> list[QaTask]:
    word = _CHART_WORD.get(spec.chart_type)
    elements = _numeric_elements(table)
    tasks = [QaTask.RETRIEVAL]
    if len(elements) >= 2 or not table.positional_rows:
        tasks.append(QaTask.REASONING)
    if word is not None:
        tasks.append(QaTask.EXTREMUM)
        if len(elements) >= 2:
            tasks.append(QaTask.RANGE)
    return tasks


def gen_low_level_qa(
    table: DataTable,
    spec: ChartSpec,
    rng_seed: int,
    n_questions: int = 2,
    require_targets: bool = False,
) -> list[QASample]:
    """Seeded batch of QA samples cycling over the applicable tasks."""
    tasks = applicable_tasks(table, spec)
    if not tasks:
        raise TemplateInapplicable("no question task applies to this table")
    rng = random.Random(rng_seed)
    samples = []
    attempts = 0
    while len(samples) < n_questions and attempts < n_questions * 20:
        attempts += 1
        task = tasks[(len(samples) + attempts) % len(tasks)]
        try:
            sample = gen_qa_for_task(table, spec, task, rng.randrange(2**63))
        except TemplateInapplicable:
            continue
        if require_targets and not sample.target_elements:
            continue
        samples.append(sample)
    if len(samples) < n_questions:
        raise TemplateInapplicable("could not generate the requested questions")
    return samples


# --- multi-turn conversations ------------------------------------------------


_ROUND_CATEGORIES = ["structural", "retrieval", "reasoning"]


def _structural_round(table: DataTable, rng: random.Random) -> tuple[str, str]:
    categories, _series, _ = table.series_view()
    n_series = len(_numeric_series_names(table))
    which = rng.choice(["n_categories", "n_series", "list_categories"])
    if which == "n_categories":
        return ("How many categories are shown in this chart?", str(len(categories)))
    if which == "n_series":
        return ("How many data series are plotted in this chart?", str(n_series))
    return ("Which categories are shown in this chart?", ", ".join(categories))


def _retrieval_round(table: DataTable, rng: random.Random) -> tuple[str, str]:
    elements = _numeric_elements(table)
    s, c, v = elements[rng.randrange(len(elements))]
    if len(_numeric_series_names(table)) > 1:
        return (f"What is the value of {c} in {s}?", format_answer(v))
    return (f"What is the value of {c} in this chart?", format_answer(v))


def _reasoning_round(table: DataTable, rng: random.Random) -> tuple[str, str]:
    values = [v for _, _, v in _numeric_elements(table)]
    which = rng.choice(["max", "min", "sum", "mean"])
    if which == "max":
        return ("What is the largest value in this chart?", format_answer(max(values)))
    if which == "min":
        return ("What is the smallest value in this chart?", format_answer(min(values)))
    if which == "sum":
        return ("What is the total of all values in this chart?",
                format_answer(sum(values)))
    return ("What is the average of all values in this chart?",
            format_answer(sum(values) / len(values)))


_ROUND_BUILDERS = {
    "structural": _structural_round,
    "retrieval": _retrieval_round,
    "reasoning": _reasoning_round,
}


class ExternalChatClient:
    """Minimal chat-completion HTTP client (OpenAI-style JSON shape).

    Reads the API key from the environment; every request/response pair is
    appended to the audit log as one JSON line."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key_env: str = "CHARTKIT_LLM_API_KEY",
        audit_path: str | None = None,
        timeout: float = 60.0,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.audit_path = audit_path
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        import json
        import os
        import urllib.error
        import urllib.request

        key = os.environ.get(self.api_key_env)
        if not key:
            raise BackendUnavailable(f"missing API key in ${self.api_key_env}")
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        req = urllib.request.Request(
            self.endpoint,
            data=json.dumps(payload).encode("utf-8"),
            headers={
                "Content-Type": "application/json",
                "Authorization": f"Bearer {key}",
            },
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                body = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError) as e:
            raise BackendUnavailable(f"chat endpoint unreachable: {e}") from e
        text = body["choices"][0]["message"]["content"]
        if self.audit_path:
            with open(self.audit_path, "a", encoding="utf-8") as f:
                f.write(json.dumps({"request": payload, "response": body}) + "\n")
        return text


def derivable_values(table: DataTable) -> set[float]:
    """Values an assistant may legitimately state about the table."""
    values = [v for _, _, v in _numeric_elements(table)]
    out = set(values)
    out.add(sum(values))
    out.add(sum(values) / len(values))
    out.update((max(values), min(values), max(values) - min(values)))
    categories, _series, _ = table.series_view()
    out.update(
        (float(len(values)), float(len(categories)),
         float(len(_numeric_series_names(table))))
    )
    for i, a in enumerate(values):
        for b in values[i + 1:]:
            out.update((a + b, abs(a - b), (a + b) / 2.0))
    return {round(v, 2) for v in out}


def _validate_external(text: str, table: DataTable) -> bool:
    import re

    allowed = derivable_values(table)
    stated = re.findall(r"-?\d+(?:\.\d+)?", text)
    for raw in stated:
        value = round(float(raw), 2)
        if not any(abs(value - d) <= 0.011 + 1e-9 * abs(d) for d in allowed):
            return False
    return True


def _parse_external_turns(text: str) -> tuple[tuple[Speaker, str], ...] | None:
    import re

    parts = re.split(r"(?im)^(user|assistant)\s*:", text.strip())
    if len(parts) < 5:
        return None
    turns = []
    for role, content in zip(parts[1::2], parts[2::2]):
        speaker = Speaker.HUMAN if role.lower() == "user" else Speaker.ASSISTANT
        turns.append((speaker, content.strip()))
    try:
        Conversation(turns=tuple(turns))
    except ValueError:
        return None
    return tuple(turns)


def gen_multi_turn(
    table: DataTable,
    backend: str = "deterministic_templates",
    rng_seed: int = 0,
    client: ExternalChatClient | None = None,
    strict: bool = False,
) -> Conversation:
    """2-3 QA rounds covering at least two of structural/retrieval/reasoning.

    The deterministic backend derives every answer from the table. The
    external backend stores the model output verbatim and flags (in
    ``metadata['validated']``) whether its numeric claims all match
    table-derivable values; with ``strict`` a mismatch raises."""
    if backend == "deterministic_templates":
        rng = random.Random(rng_seed)
        n_rounds = rng.choice([2, 3])
        kinds = rng.sample(_ROUND_CATEGORIES, n_rounds)
        turns = []
        for kind in kinds:
            question, answer = _ROUND_BUILDERS[kind](table, rng)
            turns.append((Speaker.HUMAN, question))
            turns.append((Speaker.ASSISTANT, answer))
        return Conversation(
            turns=tuple(turns),
            metadata={"backend": backend, "categories": kinds, "validated": True},
        )

    if backend == "external_chat_client":
        if client is None:
            raise BackendUnavailable("external backend requested without a client")
        prompt = templates.MULTI_TURN_GENERATION_PROMPT.format(
            in_context_examples="",
            chart_description=table.title or "a chart",
            raw_data=serialize_table(table, "csv"),
        )
        text = client.complete(prompt)
        valid = _validate_external(text, table)
        if strict and not valid:
            raise ValidationFailed("external answers contradict the table")
        turns = _parse_external_turns(text)
        if turns is None:
            turns = (
                (Speaker.HUMAN, prompt),
                (Speaker.ASSISTANT, text),
            )
        return Conversation(
            turns=turns,
            metadata={"backend": backend, "validated": valid, "raw": text},
        )

    raise BackendUnavailable(f"unknown backend {backend!r}")


# --- chain-of-thought chart-to-table -----------------------------------------


_FULL_NAME = {
    ChartType.BAR: "bar",
    ChartType.GROUPED_BAR: "grouped bar",
    ChartType.STACKED_BAR: "stacked bar",
    ChartType.LINE: "line",
    ChartType.GROUPED_LINE: "grouped line",
    ChartType.PIE: "pie",
    ChartType.SCATTER: "scatter",
}


def gen_cot_table_answer(table: DataTable, spec: ChartSpec) -> CoTAnswer:
    """Stepwise reading of the chart that terminates in the full table."""
    categories, _series, matrix = table.series_view()
    series = _numeric_series_names(table)
    name = _FULL_NAME[spec.chart_type]
    if spec.title:
        step1 = f"The image shows a {name} chart titled \"{spec.title}\"."
    else:
        step1 = f"The image shows an untitled {name} chart."

    if spec.chart_type is ChartType.PIE:
        step2 = "Its slices are labeled: " + ", ".join(categories) + "."
    elif spec.legend:
        step2 = (
            "The x axis lists " + ", ".join(categories)
            + "; the legend lists the series " + ", ".join(spec.legend) + "."
        )
    else:
        step2 = (
            "The x axis lists " + ", ".join(categories)
            + "; the y axis measures " + (series[0] if series else "the value") + "."
        )

    series_index = {name_: s for s, name_ in enumerate(table.series_view()[1])}
    lines = []
    for s_name in series:
        parts = []
        for i, cat in enumerate(categories):
            cell = matrix[i][series_index[s_name]]
            if cell.is_number:
                parts.append(f"{cat} = {format_answer(cell.number_value)}")
        lines.append(f"Reading series \"{s_name}\" in category order: " + ", ".join(parts) + ".")
    step3 = "\n".join(lines)

    step4 = "The complete data table is:\n" + serialize_table(table, "markdown")
    return CoTAnswer(steps=(step1, step2, step3, step4), final_table=table)


# --- instruction sampling -----------------------------------------------------


class InstructionTask(enum.Enum):
    CHART_TO_TABLE = "chart_to_table"
    BRIEF_SUMMARY = "brief_summary"
    DETAILED_SUMMARY = "detailed_summary"


_INSTRUCTION_BANKS = {
    InstructionTask.CHART_TO_TABLE: templates.CHART_TO_TABLE_INSTRUCTIONS,
    InstructionTask.BRIEF_SUMMARY: templates.BRIEF_DESCRIPTION_INSTRUCTIONS,
    InstructionTask.DETAILED_SUMMARY: templates.DETAILED_DESCRIPTION_INSTRUCTIONS,
}


def sample_instruction(task: InstructionTask, rng_seed: int) -> str:
    """One instruction template chosen uniformly by seed."""
    bank = _INSTRUCTION_BANKS[task]
    return bank[random.Random(rng_seed).randrange(len(bank))]
