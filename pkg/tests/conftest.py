"""Shared fixtures: the worked day-trip fragment and its canonical file."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from labovkit.model import (
    Clause,
    Fragment,
    MacroLabel,
    MicroLabel,
    NarrativeSpan,
    NarrativeType,
    Speaker,
    Topic,
)

DATA_DIR = Path(__file__).parent / "data"

_IE = Speaker.INTERVIEWEE
_N, _R, _F = MicroLabel.NARRATIVE, MicroLabel.RESTRICTED, MicroLabel.FREE
_DAYTRIP_ROWS = [
    ("When I finally have time for myself, that is when I feel most fulfilled.", _F, MacroLabel.ABSTRACT),
    ("Last month I went out to a small mountain town.", _F, MacroLabel.ORIENTATION),
    ("I bought a lunch at the station", _N, MacroLabel.COMPLICATION),
    ("and took the train out there.", _N, MacroLabel.COMPLICATION),
    ("The sky was bright blue,", _F, MacroLabel.ORIENTATION),
    ("and I felt completely free.", _R, MacroLabel.EVALUATION),
    ("Sitting on the train, a cool breeze came in through the window.", _N, MacroLabel.COMPLICATION),
    ("I thought, “Ah, autumn has come already.”", _N, MacroLabel.RESOLUTION),
    ("I hadn’t noticed the season passing at all this year.", _F, MacroLabel.ORIENTATION),
    ("It was such a refreshing day, and I felt happy.", _F, MacroLabel.CODA),
]


def build_daytrip() -> Fragment:
    """Ten-clause single-story fragment used as the worked fixture."""
    clauses = tuple(
        Clause(i, _IE, text, micro, macro)
        for i, (text, micro, macro) in enumerate(_DAYTRIP_ROWS, start=1)
    )
    return Fragment(
        fragment_id="daytrip",
        topic=Topic.HAPPINESS_HARDSHIP,
        clauses=clauses,
        spans=(NarrativeSpan(NarrativeType.STORY, 1, 10),),
    )


@pytest.fixture
def daytrip() -> Fragment:
    return build_daytrip()


@pytest.fixture
def daytrip_bytes() -> bytes:
    return (DATA_DIR / "daytrip.lat.tsv").read_bytes()
