"""labovkit: tooling for Labovian annotation of oral narratives.

Subpackages cover the annotation data model, on-disk formats, guideline
lints, the micro-label decision chart, agreement metrics, adjudication,
a batch CLI, and an HTTP service for the browser workbench.
"""

__version__ = "0.1.0"

from .model import (
    AnnotatorLayer,
    Clause,
    Fragment,
    MacroLabel,
    MicroLabel,
    NarrativeSpan,
    NarrativeType,
    Speaker,
    Topic,
    clauses_in_span,
    span_lengths,
)

__all__ = [
    "__version__",
    "AnnotatorLayer",
    "Clause",
    "Fragment",
    "MacroLabel",
    "MicroLabel",
    "NarrativeSpan",
    "NarrativeType",
    "Speaker",
    "Topic",
    "clauses_in_span",
    "span_lengths",
]
