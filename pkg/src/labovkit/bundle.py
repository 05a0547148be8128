"""Multi-annotator bundle format (`.bundle.json`).

A bundle holds one fragment's normalized transcript, an optional
speaker-turn partition of it, every annotator's layer, and optionally
the adjudicated gold fragment.  Each layer records its own clause
segmentation as a mass sequence over the transcript characters, so
segmentation agreement can be computed before a reference segmentation
exists.  Layer integrity is guarded by a SHA-256 digest of the raw text.

Serialization is canonical JSON (fixed key order, two-space indent,
no ASCII escaping, trailing newline), so equal bundles serialize to
identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, BinaryIO, Optional, Union

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
)
from .textnorm import normalize_text, text_digest

FORMAT_NAME = "labov-bundle"
FORMAT_VERSION = 1


class BundleParseError(ValueError):
    """Malformed or inconsistent bundle document."""


@dataclass(frozen=True)
class Turn:
    """A contiguous single-speaker stretch of the raw text, in atoms."""

    speaker: Speaker
    length: int


@dataclass(frozen=True)
class Bundle:
    """One fragment's transcript plus all annotator layers."""

    fragment_id: str
    topic: Topic
    raw_text: str
    layers: tuple[AnnotatorLayer, ...]
    turns: tuple[Turn, ...] = ()
    gold: Optional[Fragment] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "turns", tuple(self.turns))

    @property
    def digest(self) -> str:
        return text_digest(self.raw_text)

    @property
    def atoms(self) -> int:
        return len(self.raw_text)

    def layer(self, annotator_id: str) -> AnnotatorLayer:
        for layer in self.layers:
            if layer.annotator_id == annotator_id:
                return layer
        raise KeyError(f"no layer for annotator {annotator_id!r}")


def _validate_layer(bundle_fragment_id: str, atoms: int, layer: AnnotatorLayer) -> None:
    if layer.fragment_id != bundle_fragment_id:
        raise BundleParseError(
            f"layer {layer.annotator_id!r} references fragment "
            f"{layer.fragment_id!r}, bundle is {bundle_fragment_id!r}"
        )
    if sum(layer.masses) != atoms:
        raise BundleParseError(
            f"layer {layer.annotator_id!r} masses sum to {sum(layer.masses)}, "
            f"raw text has {atoms} atoms"
        )
    n = layer.n_clauses
    for clause_id in sorted(layer.referenced_clause_ids()):
        if not 1 <= clause_id <= n:
            raise BundleParseError(
                f"layer {layer.annotator_id!r} references unknown clause id {clause_id}"
            )


def validate_bundle(bundle: Bundle) -> None:
    """Check cross-layer consistency; raises :class:`BundleParseError`."""
    if bundle.turns:
        total = sum(t.length for t in bundle.turns)
        if total != bundle.atoms:
            raise BundleParseError(
                f"turn lengths sum to {total}, raw text has {bundle.atoms} atoms"
            )
        if any(t.length < 1 for t in bundle.turns):
            raise BundleParseError("turns must cover at least one atom each")
    seen = set()
    for layer in bundle.layers:
        if layer.annotator_id in seen:
            raise BundleParseError(f"duplicate layer for annotator {layer.annotator_id!r}")
        seen.add(layer.annotator_id)
        _validate_layer(bundle.fragment_id, bundle.atoms, layer)


# ---------------------------------------------------------------------------
# JSON mapping helpers, shared with the HTTP service.

def span_to_list(span: NarrativeSpan) -> list:
    return [span.kind.value, span.start, span.end]


def span_from_list(item: Any) -> NarrativeSpan:
    try:
        kind, start, end = item
        return NarrativeSpan(NarrativeType(kind), int(start), int(end))
    except (ValueError, TypeError) as exc:
        raise BundleParseError(f"bad span entry {item!r}: {exc}") from None


def fragment_to_dict(fragment: Fragment) -> dict:
    return {
        "fragment_id": fragment.fragment_id,
        "topic": fragment.topic.value,
        "clauses": [
            {
                "id": c.id,
                "speaker": c.speaker.value,
                "text": c.text,
                "micro": c.micro.value if c.micro else None,
                "macro": c.macro.value if c.macro else None,
            }
            for c in fragment.clauses
        ],
        "spans": [span_to_list(s) for s in fragment.spans],
    }


def fragment_from_dict(doc: Any) -> Fragment:
    if not isinstance(doc, dict):
        raise BundleParseError("fragment document must be an object")
    try:
        clauses = tuple(
            Clause(
                id=int(c["id"]),
                speaker=Speaker(c["speaker"]),
                text=normalize_text(str(c["text"])),
                micro=MicroLabel(c["micro"]) if c.get("micro") else None,
                macro=MacroLabel(c["macro"]) if c.get("macro") else None,
            )
            for c in doc.get("clauses", [])
        )
        spans = tuple(span_from_list(s) for s in doc.get("spans", []))
        return Fragment(
            fragment_id=str(doc.get("fragment_id", "")),
            topic=Topic(doc.get("topic", Topic.OTHER.value)),
            clauses=clauses,
            spans=spans,
        )
    except BundleParseError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise BundleParseError(f"bad fragment document: {exc}") from None


def layer_to_dict(layer: AnnotatorLayer, digest: str) -> dict:
    return {
        "annotator_id": layer.annotator_id,
        "fragment_id": layer.fragment_id,
        "raw_text_sha256": digest,
        "masses": list(layer.masses),
        "spans": [span_to_list(s) for s in layer.spans],
        "micro": {str(k): v.value for k, v in sorted(layer.micro.items())},
        "macro": {str(k): v.value for k, v in sorted(layer.macro.items())},
    }


def layer_from_dict(doc: Any, expected_digest: Optional[str] = None) -> AnnotatorLayer:
    if not isinstance(doc, dict):
        raise BundleParseError("layer document must be an object")
    try:
        annotator_id = str(doc["annotator_id"])
    except KeyError:
        raise BundleParseError("layer is missing annotator_id") from None
    if expected_digest is not None:
        claimed = doc.get("raw_text_sha256")
        if claimed != expected_digest:
            raise BundleParseError(
                f"layer {annotator_id!r} was made against different raw text "
                f"(digest {claimed!r} != bundle {expected_digest!r})"
            )
    try:
        return AnnotatorLayer(
            annotator_id=annotator_id,
            fragment_id=str(doc.get("fragment_id", "")),
            masses=tuple(int(m) for m in doc.get("masses", [])),
            spans=tuple(span_from_list(s) for s in doc.get("spans", [])),
            micro={int(k): MicroLabel(v) for k, v in doc.get("micro", {}).items()},
            macro={int(k): MacroLabel(v) for k, v in doc.get("macro", {}).items()},
        )
    except BundleParseError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise BundleParseError(f"bad layer for annotator {annotator_id!r}: {exc}") from None


def bundle_to_dict(bundle: Bundle) -> dict:
    digest = bundle.digest
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "fragment_id": bundle.fragment_id,
        "topic": bundle.topic.value,
        "raw_text": bundle.raw_text,
        "raw_text_sha256": digest,
        "turns": [[t.speaker.value, t.length] for t in bundle.turns],
        "layers": [layer_to_dict(layer, digest) for layer in bundle.layers],
        "gold": fragment_to_dict(bundle.gold) if bundle.gold else None,
    }


def bundle_from_dict(doc: Any) -> Bundle:
    if not isinstance(doc, dict):
        raise BundleParseError("bundle document must be an object")
    if doc.get("format") != FORMAT_NAME:
        raise BundleParseError(f"not a {FORMAT_NAME} document")
    if doc.get("version") != FORMAT_VERSION:
        raise BundleParseError(f"unsupported bundle version {doc.get('version')!r}")
    raw_text = str(doc.get("raw_text", ""))
    if raw_text != normalize_text(raw_text):
        raise BundleParseError("raw_text is not in normalized form")
    digest = text_digest(raw_text)
    claimed = doc.get("raw_text_sha256")
    if claimed is not None and claimed != digest:
        raise BundleParseError(
            f"raw_text_sha256 {claimed!r} does not match the raw text ({digest!r})"
        )
    try:
        topic = Topic(doc.get("topic", Topic.OTHER.value))
    except ValueError:
        raise BundleParseError(f"unknown topic {doc.get('topic')!r}") from None
    turns = []
    for item in doc.get("turns", []):
        try:
            speaker, length = item
            turns.append(Turn(Speaker(speaker), int(length)))
        except (ValueError, TypeError) as exc:
            raise BundleParseError(f"bad turn entry {item!r}: {exc}") from None
    layers = tuple(
        layer_from_dict(layer_doc, expected_digest=digest)
        for layer_doc in doc.get("layers", [])
    )
    gold_doc = doc.get("gold")
    bundle = Bundle(
        fragment_id=str(doc.get("fragment_id", "")),
        topic=topic,
        raw_text=raw_text,
        layers=layers,
        turns=tuple(turns),
        gold=fragment_from_dict(gold_doc) if gold_doc else None,
    )
    validate_bundle(bundle)
    return bundle


def canonical_json(doc: dict) -> bytes:
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def parse_bundle(source: Union[bytes, str, BinaryIO]) -> Bundle:
    """Parse and validate a bundle document."""
    if hasattr(source, "read"):
        source = source.read()  # type: ignore[union-attr]
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BundleParseError(f"not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise BundleParseError(f"not valid JSON: {exc}") from None
    return bundle_from_dict(doc)


def serialize_bundle(bundle: Bundle) -> bytes:
    """Canonical byte serialization; inverse of :func:`parse_bundle`."""
    validate_bundle(bundle)
    return canonical_json(bundle_to_dict(bundle))


# ---------------------------------------------------------------------------
# Views over bundles.

def turn_ranges(bundle: Bundle) -> list[tuple[Speaker, int, int]]:
    """Turns as (speaker, start_atom, end_atom) half-open char ranges."""
    ranges = []
    offset = 0
    for turn in bundle.turns:
        ranges.append((turn.speaker, offset, offset + turn.length))
        offset += turn.length
    return ranges


def interviewer_ranges(bundle: Bundle) -> tuple[tuple[int, int], ...]:
    return tuple(
        (start, end)
        for speaker, start, end in turn_ranges(bundle)
        if speaker is Speaker.INTERVIEWER
    )


def layer_to_fragment(bundle: Bundle, layer: AnnotatorLayer) -> Fragment:
    """Materialize one annotator's layer as a Fragment.

    Clause texts are slices of the raw text by the layer's masses; the
    speaker of each clause comes from the bundle's turn partition.  The
    layer's clause cuts must not cross a turn edge, and interviewer
    turns must stay whole (they are never segmented).
    """
    _validate_layer(bundle.fragment_id, bundle.atoms, layer)
    ranges = turn_ranges(bundle)
    clauses = []
    offset = 0
    for i, mass in enumerate(layer.masses, start=1):
        start, end = offset, offset + mass
        speaker = Speaker.INTERVIEWEE
        if ranges:
            homes = [r for r in ranges if r[1] <= start and end <= r[2]]
            if not homes:
                raise BundleParseError(
                    f"layer {layer.annotator_id!r} clause {i} crosses a turn edge"
                )
            speaker = homes[0][0]
            if speaker is Speaker.INTERVIEWER and (end - start) != (
                homes[0][2] - homes[0][1]
            ):
                raise BundleParseError(
                    f"layer {layer.annotator_id!r} clause {i} splits an "
                    f"interviewer turn; interviewer units are never segmented"
                )
        clauses.append(
            Clause(
                id=i,
                speaker=speaker,
                text=normalize_text(bundle.raw_text[start:end]),
                micro=layer.micro.get(i),
                macro=layer.macro.get(i),
            )
        )
        offset = end
    return Fragment(
        fragment_id=bundle.fragment_id,
        topic=bundle.topic,
        clauses=tuple(clauses),
        spans=layer.spans,
    )


def fragment_to_single_layer_bundle(fragment: Fragment, annotator_id: str) -> Bundle:
    """Wrap a fragment as a bundle with one layer mirroring its labels.

    The raw text is the direct concatenation of the clause texts, so
    clause boundaries land at exact character offsets.
    """
    raw_text = "".join(c.text for c in fragment.clauses)
    masses = tuple(len(c.text) for c in fragment.clauses)
    if any(m < 1 for m in masses):
        raise BundleParseError("cannot bundle a fragment with empty clause text")
    turns = tuple(Turn(c.speaker, len(c.text)) for c in fragment.clauses)
    layer = AnnotatorLayer(
        annotator_id=annotator_id,
        fragment_id=fragment.fragment_id,
        masses=masses,
        spans=fragment.spans,
        micro={c.id: c.micro for c in fragment.clauses if c.micro},
        macro={c.id: c.macro for c in fragment.clauses if c.macro},
    )
    return Bundle(
        fragment_id=fragment.fragment_id,
        topic=fragment.topic,
        raw_text=raw_text,
        layers=(layer,),
        turns=turns,
    )
