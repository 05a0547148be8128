"""HTTP facade for the browser workbench.

Persistence is bundle files on disk with atomic replace-on-write, one
file per fragment.  Writers use optimistic concurrency: every PUT must
present the version token (``If-Match``) of the state it read; a stale
token gets 409 and never a silent overwrite.  Schema violations come
back as 400 with the lint findings; unknown fragments as 404.

Annotator identity is declared via the ``X-Annotator`` header and must
match the layer being written.  See docs/api.md for the full surface.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse

from . import __version__
from .adjudicate import VOTE_FIELDS, corpus_stats, majority_vote, resolve_discussion
from .bundle import (
    Bundle,
    BundleParseError,
    bundle_to_dict,
    canonical_json,
    fragment_from_dict,
    interviewer_ranges,
    layer_from_dict,
    layer_to_dict,
    layer_to_fragment,
    parse_bundle,
    serialize_bundle,
)
from .labelmetrics import LabelMatrix, label_agreement_report
from .lints import (
    Severity,
    hint_span_onsets,
    lint_fragment,
    lint_macro_shape,
    lint_segmentation_cues,
    lint_structure,
)
from .model import AnnotatorLayer
from .reports import (
    finding_to_dict,
    findings_to_dict,
    label_report_to_dict,
    outcome_from_dict,
    outcome_to_dict,
    outcomes_to_dict,
    question_to_dict,
    seg_report_to_dict,
    stats_to_dict,
)
from .segmetrics import Segmentation, fleiss_kappa_b
from .wizard import Chart, ChartError, decide_micro_mapping, next_question

BUNDLE_SUFFIX = ".bundle.json"


class ConflictError(Exception):
    """Version token does not match the stored state."""


class NotFoundError(Exception):
    pass


def _version_of(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


class BundleStore:
    """Directory of bundle files with atomic writes and version tokens."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, fragment_id: str) -> Path:
        safe = fragment_id.replace("/", "_").replace("\\", "_")
        return self.data_dir / f"{safe}{BUNDLE_SUFFIX}"

    def fragment_ids(self) -> list[str]:
        return sorted(
            p.name[: -len(BUNDLE_SUFFIX)]
            for p in self.data_dir.glob(f"*{BUNDLE_SUFFIX}")
        )

    def load(self, fragment_id: str) -> tuple[Bundle, str]:
        path = self._path(fragment_id)
        if not path.exists():
            raise NotFoundError(f"unknown fragment {fragment_id!r}")
        data = path.read_bytes()
        return parse_bundle(data), _version_of(data)

    def save(
        self, fragment_id: str, bundle: Bundle, expected_version: Optional[str]
    ) -> str:
        """Atomic write guarded by the version token of the prior state."""
        path = self._path(fragment_id)
        with self._lock:
            if path.exists():
                current = _version_of(path.read_bytes())
                if expected_version != current:
                    raise ConflictError(
                        f"version token {expected_version!r} is stale "
                        f"(current {current!r})"
                    )
            elif expected_version not in (None, "new"):
                raise ConflictError(
                    f"fragment {fragment_id!r} does not exist; "
                    f"use If-Match: new to create"
                )
            data = serialize_bundle(bundle)
            fd, tmp_name = tempfile.mkstemp(
                dir=self.data_dir, prefix=".tmp-", suffix=BUNDLE_SUFFIX
            )
            try:
                with os.fdopen(fd, "wb") as handle:
                    handle.write(data)
                os.replace(tmp_name, path)
            except BaseException:
                if os.path.exists(tmp_name):
                    os.unlink(tmp_name)
                raise
            return _version_of(data)


def _error(status: int, message: str, findings=None) -> JSONResponse:
    body = {"error": message}
    if findings is not None:
        body["findings"] = [finding_to_dict(f) for f in findings]
    return JSONResponse(body, status_code=status)


def _bundle_from_request(store: BundleStore, body: dict) -> Bundle:
    if "bundle" in body:
        return parse_bundle(canonical_json(body["bundle"]))
    if "fragment_id" in body:
        bundle, _ = store.load(str(body["fragment_id"]))
        return bundle
    raise BundleParseError("request body needs 'bundle' or 'fragment_id'")


def _segmentation_layers(bundle: Bundle) -> dict:
    if len(bundle.layers) < 2:
        raise ValueError("need at least 2 annotator layers")
    return {
        bundle.fragment_id: {
            layer.annotator_id: Segmentation(layer.masses) for layer in bundle.layers
        }
    }


def create_app(data_dir, chart: Optional[Chart] = None) -> FastAPI:
    """Build the service over a directory of bundle files."""
    store = BundleStore(Path(data_dir))
    app = FastAPI(title="labovkit annotation service", version=__version__)

    @app.exception_handler(BundleParseError)
    async def _bundle_error(request: Request, exc: BundleParseError):
        return _error(400, str(exc))

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return _error(404, str(exc))

    @app.exception_handler(ConflictError)
    async def _conflict(request: Request, exc: ConflictError):
        return _error(409, str(exc))

    @app.exception_handler(ChartError)
    async def _chart_error(request: Request, exc: ChartError):
        return _error(400, str(exc))

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return _error(400, str(exc))

    @app.get("/fragments")
    def list_fragments():
        out = []
        for fragment_id in store.fragment_ids():
            bundle, version = store.load(fragment_id)
            out.append(
                {
                    "fragment_id": bundle.fragment_id,
                    "topic": bundle.topic.value,
                    "version": version,
                    "atoms": bundle.atoms,
                    "annotators": [layer.annotator_id for layer in bundle.layers],
                    "has_gold": bundle.gold is not None,
                }
            )
        return {"fragments": out}

    @app.get("/fragments/{fragment_id}")
    def get_fragment(fragment_id: str):
        bundle, version = store.load(fragment_id)
        doc = bundle_to_dict(bundle)
        doc["version"] = version
        return JSONResponse(doc, headers={"ETag": version})

    @app.get("/fragments/{fragment_id}/layers/{annotator_id}")
    def get_layer(fragment_id: str, annotator_id: str):
        bundle, version = store.load(fragment_id)
        try:
            layer = bundle.layer(annotator_id)
        except KeyError:
            raise NotFoundError(
                f"no layer for annotator {annotator_id!r} in fragment {fragment_id!r}"
            )
        doc = layer_to_dict(layer, bundle.digest)
        doc["version"] = version
        return JSONResponse(doc, headers={"ETag": version})

    @app.put("/fragments/{fragment_id}/layers/{annotator_id}")
    async def put_layer(
        fragment_id: str,
        annotator_id: str,
        request: Request,
        if_match: Optional[str] = Header(default=None),
        x_annotator: Optional[str] = Header(default=None),
    ):
        if if_match is None:
            return _error(400, "If-Match header with the version token is required")
        if x_annotator is not None and x_annotator != annotator_id:
            return _error(
                400,
                f"X-Annotator {x_annotator!r} does not match layer {annotator_id!r}",
            )
        bundle, version = store.load(fragment_id)
        body = await request.json()
        body.setdefault("annotator_id", annotator_id)
        body.setdefault("fragment_id", fragment_id)
        body.setdefault("raw_text_sha256", bundle.digest)
        layer = layer_from_dict(body, expected_digest=bundle.digest)
        if layer.annotator_id != annotator_id:
            return _error(
                400,
                f"layer annotator {layer.annotator_id!r} does not match the path",
            )
        if layer.fragment_id != fragment_id:
            return _error(
                400, f"layer fragment {layer.fragment_id!r} does not match the path"
            )
        fragment = layer_to_fragment(bundle, layer)
        errors = [
            f for f in lint_structure(fragment) if f.severity is Severity.ERROR
        ]
        if errors:
            return _error(400, "layer violates the annotation schema", errors)
        others = tuple(
            l for l in bundle.layers if l.annotator_id != annotator_id
        )
        updated = Bundle(
            fragment_id=bundle.fragment_id,
            topic=bundle.topic,
            raw_text=bundle.raw_text,
            layers=others + (layer,),
            turns=bundle.turns,
            gold=bundle.gold,
        )
        new_version = store.save(fragment_id, updated, if_match)
        return JSONResponse(
            {"version": new_version, "findings": []},
            headers={"ETag": new_version},
        )

    @app.post("/lint")
    async def lint_endpoint(request: Request):
        body = await request.json()
        if "layer" in body:
            # layer mode: cue findings carry raw-text atom positions, so the
            # editor can offer split/merge suggestions at exact offsets
            bundle = _bundle_from_request(store, body)
            layer_doc = dict(body["layer"])
            layer_doc.setdefault("fragment_id", bundle.fragment_id)
            layer_doc.setdefault("raw_text_sha256", bundle.digest)
            layer = layer_from_dict(layer_doc, expected_digest=bundle.digest)
            fragment = layer_to_fragment(bundle, layer)
            findings = lint_structure(fragment)
            findings += lint_macro_shape(fragment)
            findings += hint_span_onsets(fragment)
            findings += lint_segmentation_cues(
                bundle.raw_text,
                Segmentation(layer.masses),
                fragment_id=bundle.fragment_id,
                interviewer_ranges=interviewer_ranges(bundle),
            )
            return findings_to_dict(findings)
        doc = body.get("fragment", body)
        fragment = fragment_from_dict(doc)
        findings = lint_fragment(fragment)
        return findings_to_dict(findings)

    @app.post("/wizard/next")
    async def wizard_next(request: Request):
        body = await request.json()
        answers = _parse_answers(body.get("answers", {}))
        return question_to_dict(next_question(answers, chart))

    @app.post("/wizard/decide")
    async def wizard_decide(request: Request):
        body = await request.json()
        answers = _parse_answers(body.get("answers", {}))
        label = decide_micro_mapping(answers, chart)
        return {"micro": label.value if label is not None else None}

    @app.post("/metrics/segmentation")
    async def metrics_segmentation(request: Request):
        body = await request.json()
        bundle = _bundle_from_request(store, body)
        n_t = int(body.get("n_t", 2))
        per_fragment = bool(body.get("per_fragment", False))
        report = fleiss_kappa_b(
            _segmentation_layers(bundle), n_t=n_t, per_fragment=per_fragment
        )
        return seg_report_to_dict(report)

    @app.post("/metrics/labels")
    async def metrics_labels(request: Request):
        body = await request.json()
        bundle = _bundle_from_request(store, body)
        field = str(body.get("field", "micro"))
        denominator = str(body.get("denominator", "any"))
        matrix = LabelMatrix.from_layers(list(bundle.layers), field)
        report = label_agreement_report(matrix, field=field, denominator=denominator)
        return label_report_to_dict(report)

    @app.post("/adjudicate")
    async def adjudicate_endpoint(request: Request):
        body = await request.json()
        bundle = _bundle_from_request(store, body)
        field = str(body.get("field", "all"))
        fields = VOTE_FIELDS if field == "all" else (field,)
        outcomes = []
        for vote_field in fields:
            outcomes.extend(majority_vote(list(bundle.layers), vote_field))
        return outcomes_to_dict(outcomes)

    @app.post("/adjudicate/resolve")
    async def adjudicate_resolve(request: Request):
        body = await request.json()
        outcome = outcome_from_dict(body.get("outcome", {}))
        resolved = resolve_discussion(
            outcome,
            resolution=str(body.get("resolution", "")),
            resolvers=[str(r) for r in body.get("resolvers", [])],
            note=str(body.get("note", "")),
            resolved_at=body.get("resolved_at"),
        )
        return outcome_to_dict(resolved)

    @app.get("/stats")
    def stats_endpoint():
        gold = []
        for fragment_id in store.fragment_ids():
            bundle, _ = store.load(fragment_id)
            if bundle.gold is not None:
                gold.append(bundle.gold)
        return stats_to_dict(corpus_stats(gold))

    return app


def _parse_answers(doc) -> dict[str, bool]:
    if not isinstance(doc, dict):
        raise ValueError("answers must be an object of node id to boolean")
    out = {}
    for key, value in doc.items():
        if not isinstance(value, bool):
            raise ValueError(f"answer for {key!r} must be a boolean")
        out[str(key)] = value
    return out
