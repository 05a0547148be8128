"""Micro-label decision chart.

A three-question binary tree decides the micro label of a clause from
its temporal character: clauses only inside hypothetical narratives get
no label; clauses reporting a specific event or a newly discovered
state are Narrative; of the rest, information valid for the whole
narrated period is Free, otherwise Restricted.

The tree is data driven: node ids, bilingual question text, examples,
and the outcome mapping load from a JSON chart file, so the wording can
be corrected without code changes.  The compiled-in default lives in
``labovkit/data/micro_chart.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Union

from .model import MicroLabel

NODE_HYPOTHETICAL = "hypothetical-only"
NODE_EVENT = "event-or-discovery"
NODE_PERIOD = "entire-period"

OUTCOME_NO_LABEL = "none"
_OUTCOME_TOKENS = {OUTCOME_NO_LABEL} | {label.value for label in MicroLabel}

MAX_PATH_LENGTH = 3


class ChartError(ValueError):
    """Malformed chart definition."""


@dataclass(frozen=True)
class ChartEdge:
    """Either a pointer to the next node or a terminal outcome token."""

    next: Optional[str] = None
    outcome: Optional[str] = None

    def __post_init__(self) -> None:
        if (self.next is None) == (self.outcome is None):
            raise ChartError("edge must have exactly one of 'next' or 'outcome'")
        if self.outcome is not None and self.outcome not in _OUTCOME_TOKENS:
            raise ChartError(
                f"unknown outcome {self.outcome!r}; expected one of {sorted(_OUTCOME_TOKENS)}"
            )


@dataclass(frozen=True)
class ChartNode:
    id: str
    question_en: str
    question_ja: str
    examples: tuple[str, ...]
    yes: ChartEdge
    no: ChartEdge


@dataclass(frozen=True)
class Chart:
    chart_id: str
    root: str
    nodes: Mapping[str, ChartNode]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", dict(self.nodes))
        self._validate()

    def _validate(self) -> None:
        if self.root not in self.nodes:
            raise ChartError(f"root node {self.root!r} is not defined")
        seen: set[str] = set()
        frontier = [(self.root, 1)]
        max_depth = 0
        while frontier:
            node_id, depth = frontier.pop()
            if node_id in seen:
                raise ChartError(f"node {node_id!r} is reachable twice (cycle or join)")
            seen.add(node_id)
            max_depth = max(max_depth, depth)
            node = self.nodes.get(node_id)
            if node is None:
                raise ChartError(f"edge points to undefined node {node_id!r}")
            for edge in (node.yes, node.no):
                if edge.next is not None:
                    frontier.append((edge.next, depth + 1))
        unreachable = set(self.nodes) - seen
        if unreachable:
            raise ChartError(f"unreachable nodes: {sorted(unreachable)}")
        if max_depth > MAX_PATH_LENGTH:
            raise ChartError(
                f"chart depth {max_depth} exceeds the maximum of {MAX_PATH_LENGTH}"
            )


def chart_from_dict(doc: dict) -> Chart:
    try:
        nodes = {}
        for node_doc in doc["nodes"]:
            node = ChartNode(
                id=str(node_doc["id"]),
                question_en=str(node_doc.get("question_en", "")),
                question_ja=str(node_doc.get("question_ja", "")),
                examples=tuple(str(e) for e in node_doc.get("examples", [])),
                yes=ChartEdge(**node_doc["yes"]),
                no=ChartEdge(**node_doc["no"]),
            )
            if node.id in nodes:
                raise ChartError(f"duplicate node id {node.id!r}")
            nodes[node.id] = node
        return Chart(
            chart_id=str(doc.get("chart_id", "")),
            root=str(doc["root"]),
            nodes=nodes,
        )
    except ChartError:
        raise
    except (KeyError, TypeError) as exc:
        raise ChartError(f"bad chart document: {exc}") from None


def chart_to_dict(chart: Chart) -> dict:
    def edge(e: ChartEdge) -> dict:
        return {"next": e.next} if e.next is not None else {"outcome": e.outcome}

    return {
        "chart_id": chart.chart_id,
        "root": chart.root,
        "nodes": [
            {
                "id": n.id,
                "question_en": n.question_en,
                "question_ja": n.question_ja,
                "examples": list(n.examples),
                "yes": edge(n.yes),
                "no": edge(n.no),
            }
            for n in chart.nodes.values()
        ],
    }


def load_chart(path: Union[str, Path, None] = None) -> Chart:
    """Load a chart file, or the packaged default when no path given."""
    if path is None:
        data = (
            resources.files("labovkit").joinpath("data/micro_chart.json").read_text("utf-8")
        )
    else:
        data = Path(path).read_text("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ChartError(f"chart file is not valid JSON: {exc}") from None
    return chart_from_dict(doc)


_DEFAULT_CHART: Optional[Chart] = None


def default_chart() -> Chart:
    global _DEFAULT_CHART
    if _DEFAULT_CHART is None:
        _DEFAULT_CHART = load_chart()
    return _DEFAULT_CHART


@dataclass(frozen=True)
class ChartAnswer:
    """Answers along the default chart's three questions.

    ``holds_entire_period`` is only consulted when
    ``reports_event_or_discovery`` is false, and neither follow-up is
    consulted for clauses in hypothetical-only context.
    """

    in_hypothetical_only: bool
    reports_event_or_discovery: Optional[bool] = None
    holds_entire_period: Optional[bool] = None

    def as_mapping(self) -> dict[str, bool]:
        out = {NODE_HYPOTHETICAL: self.in_hypothetical_only}
        if self.reports_event_or_discovery is not None:
            out[NODE_EVENT] = self.reports_event_or_discovery
        if self.holds_entire_period is not None:
            out[NODE_PERIOD] = self.holds_entire_period
        return out


@dataclass(frozen=True)
class QuestionDescriptor:
    """The next chart node to ask, or the terminal outcome."""

    node_id: Optional[str]
    question_en: str
    question_ja: str
    examples: tuple[str, ...]
    terminal: bool
    outcome: Optional[str] = None


def _walk(chart: Chart, answers: Mapping[str, bool]):
    node = chart.nodes[chart.root]
    for _ in range(MAX_PATH_LENGTH + 1):
        if node.id not in answers:
            return node
        edge = node.yes if answers[node.id] else node.no
        if edge.outcome is not None:
            return edge.outcome
        node = chart.nodes[edge.next]
    raise ChartError("chart walk exceeded the maximum path length")


def next_question(
    answers: Mapping[str, bool], chart: Optional[Chart] = None
) -> QuestionDescriptor:
    """The next unanswered node given partial answers, or the outcome."""
    chart = chart or default_chart()
    landed = _walk(chart, answers)
    if isinstance(landed, str):
        return QuestionDescriptor(
            node_id=None,
            question_en="",
            question_ja="",
            examples=(),
            terminal=True,
            outcome=landed,
        )
    return QuestionDescriptor(
        node_id=landed.id,
        question_en=landed.question_en,
        question_ja=landed.question_ja,
        examples=landed.examples,
        terminal=False,
    )


def decide_micro_mapping(
    answers: Mapping[str, bool], chart: Optional[Chart] = None
) -> Optional[MicroLabel]:
    """Like :func:`decide_micro` but over node-id-keyed answers."""
    chart = chart or default_chart()
    landed = _walk(chart, answers)
    if not isinstance(landed, str):
        raise ValueError(
            f"answers are incomplete: question {landed.id!r} is unanswered"
        )
    return None if landed == OUTCOME_NO_LABEL else MicroLabel(landed)


def decide_micro(
    answers: ChartAnswer, chart: Optional[Chart] = None
) -> Optional[MicroLabel]:
    """Micro label for a complete answer vector; None means no label.

    Raises ``ValueError`` when the answers do not reach an outcome.
    """
    return decide_micro_mapping(answers.as_mapping(), chart)
