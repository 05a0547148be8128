"""Batch command line interface.

Exit codes: 0 success, 1 validation/lint failure or operational error,
2 usage errors.  Reports render as human tables on a terminal and as
JSON when piped; ``--format`` overrides.  Identical inputs and flags
produce byte-identical output (pass ``--timestamps`` to opt in to a
``generated_at`` field).  ``LABOV_CONFIG`` may name a JSON file with
defaults for ``nt``, ``seeds``, ``format``, ``rules``, ``chart``,
``data``, ``port``, and ``host``.
"""

from __future__ import annotations

import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import __version__
from .adjudicate import (
    VOTE_FIELDS,
    build_gold_fragment,
    corpus_stats,
    majority_vote,
    resolve_discussion,
)
from .bundle import (
    Bundle,
    BundleParseError,
    fragment_to_single_layer_bundle,
    layer_to_fragment,
    parse_bundle,
    serialize_bundle,
)
from .labelmetrics import LabelMatrix, label_agreement_report
from .latfmt import LatParseError, LatSerializeError, parse_lat, serialize_lat
from .lints import (
    DEFAULT_CONFIG,
    FragmentValidationError,
    RuleConfig,
    Severity,
    lint_fragment,
    validate_fragment,
)
from .reports import (
    baseline_report_to_dict,
    findings_to_dict,
    label_report_to_dict,
    outcome_from_dict,
    outcomes_to_dict,
    question_to_dict,
    render_baseline_report,
    render_findings,
    render_label_report,
    render_outcomes,
    render_seg_report,
    render_stats,
    seg_report_to_dict,
    stats_to_dict,
    to_json_bytes,
)
from .segmetrics import (
    BaselineFragment,
    Segmentation,
    fleiss_kappa_b,
    mean_boundary_count,
    random_baseline_experiment,
)
from .wizard import load_chart, next_question


def _load_env_config() -> dict:
    path = os.environ.get("LABOV_CONFIG")
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read LABOV_CONFIG {path!r}: {exc}")


def _setting(ctx, key, flag_value, builtin):
    if flag_value is not None:
        return flag_value
    return ctx.obj["config"].get(key, builtin)


def _resolve_format(fmt) -> str:
    if fmt:
        return fmt
    return "table" if sys.stdout.isatty() else "json"


def _emit(ctx, fmt, doc: dict, table: str) -> None:
    fmt = _resolve_format(_setting(ctx, "format", fmt, None))
    if ctx.obj.get("timestamps"):
        doc = dict(doc)
        doc["generated_at"] = datetime.now(timezone.utc).isoformat()
    if fmt == "json":
        click.echo(to_json_bytes(doc), nl=False)
    else:
        click.echo(table, nl=False)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _read_rules(ctx, rules_flag) -> RuleConfig:
    path = _setting(ctx, "rules", rules_flag, None)
    if not path:
        return DEFAULT_CONFIG
    try:
        return RuleConfig.from_dict(json.loads(Path(path).read_text("utf-8")))
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        raise click.ClickException(f"cannot read rules file {path!r}: {exc}")


def _read_chart(ctx, chart_flag):
    path = _setting(ctx, "chart", chart_flag, None)
    return load_chart(path) if path else None


def _read_bundle(path: str) -> Bundle:
    try:
        return parse_bundle(Path(path).read_bytes())
    except OSError as exc:
        _fail(f"cannot read {path}: {exc}")
    except BundleParseError as exc:
        _fail(f"{path}: {exc}")


def _parse_seeds(spec: str) -> list[int]:
    seeds: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise click.BadParameter(f"no seeds in {spec!r}")
    return seeds


@click.group()
@click.version_option(version=__version__, prog_name="labov")
@click.option("--timestamps", is_flag=True, help="Include generated_at in reports.")
@click.pass_context
def main(ctx, timestamps):
    """Tools for Labovian annotation of oral narratives."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = _load_env_config()
    ctx.obj["timestamps"] = timestamps


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
@click.pass_context
def validate(ctx, files):
    """Parse and validate annotation files (.lat.tsv or .bundle.json)."""
    failed = False
    for name in files:
        data = Path(name).read_bytes()
        try:
            if name.endswith(".bundle.json"):
                bundle = parse_bundle(data)
                for layer in bundle.layers:
                    validate_fragment(layer_to_fragment(bundle, layer))
                if bundle.gold is not None:
                    validate_fragment(bundle.gold)
            else:
                validate_fragment(parse_lat(data))
        except (LatParseError, BundleParseError, FragmentValidationError) as exc:
            click.echo(f"FAIL {name}: {exc}", err=True)
            failed = True
            continue
        click.echo(f"OK {name}")
    if failed:
        sys.exit(1)


@main.command("lint")
@click.argument("file", type=click.Path(exists=True))
@click.option("--rules", "rules_flag", type=click.Path(exists=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default=None)
@click.pass_context
def lint_cmd(ctx, file, rules_flag, fmt):
    """Run every lint family over an annotation table."""
    config = _read_rules(ctx, rules_flag)
    try:
        fragment = parse_lat(Path(file).read_bytes())
    except LatParseError as exc:
        _fail(f"{file}: {exc}")
    findings = lint_fragment(fragment, config)
    _emit(ctx, fmt, findings_to_dict(findings), render_findings(findings))
    if any(f.severity is Severity.ERROR for f in findings):
        sys.exit(1)


@main.command("agree-seg")
@click.argument("bundle_files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--nt", "nt_flag", type=int, default=None, help="Near-miss window n_t.")
@click.option("--per-fragment", is_flag=True, help="Also report BED per fragment.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default=None)
@click.pass_context
def agree_seg(ctx, bundle_files, nt_flag, per_fragment, fmt):
    """Segmentation agreement (B, kappa_B, BED), pooled over bundles."""
    n_t = int(_setting(ctx, "nt", nt_flag, 2))
    layers = {}
    for name in bundle_files:
        bundle = _read_bundle(name)
        if len(bundle.layers) < 2:
            _fail(f"{name}: bundle has fewer than 2 annotator layers")
        layers[bundle.fragment_id] = {
            layer.annotator_id: Segmentation(layer.masses) for layer in bundle.layers
        }
    try:
        report = fleiss_kappa_b(layers, n_t=n_t, per_fragment=per_fragment)
    except ValueError as exc:
        _fail(str(exc))
    _emit(ctx, fmt, seg_report_to_dict(report), render_seg_report(report))


@main.command("agree-labels")
@click.argument("bundle_files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option(
    "--field",
    type=click.Choice(["micro", "macro"]),
    default="micro",
    show_default=True,
)
@click.option(
    "--denominator",
    type=click.Choice(["any", "majority"]),
    default="any",
    show_default=True,
    help="Exact-match denominator rule.",
)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default=None)
@click.pass_context
def agree_labels(ctx, bundle_files, field, denominator, fmt):
    """Label agreement (nominal alpha, exact-match), pooled over bundles."""
    try:
        matrices = [
            LabelMatrix.from_layers(list(_read_bundle(name).layers), field)
            for name in bundle_files
        ]
        matrix = LabelMatrix.merge(matrices)
        report = label_agreement_report(matrix, field=field, denominator=denominator)
    except ValueError as exc:
        _fail(str(exc))
    _emit(ctx, fmt, label_report_to_dict(report), render_label_report(report))


@main.command()
@click.argument("bundle_file", type=click.Path(exists=True))
@click.option(
    "--field",
    type=click.Choice(["micro", "macro", "span_membership", "all"]),
    default="all",
    show_default=True,
)
@click.option(
    "--resolutions",
    type=click.Path(exists=True),
    default=None,
    help="JSON list of discussion resolutions to apply.",
)
@click.option("--write-gold", type=click.Path(), default=None)
@click.option("--audit", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default=None)
@click.pass_context
def adjudicate(ctx, bundle_file, field, resolutions, write_gold, audit, fmt):
    """Majority-vote gold labels; write gold and audit files if asked."""
    bundle = _read_bundle(bundle_file)
    fields = VOTE_FIELDS if field == "all" else (field,)
    try:
        outcomes = []
        for vote_field in fields:
            outcomes.extend(majority_vote(list(bundle.layers), vote_field))
    except ValueError as exc:
        _fail(str(exc))
    if resolutions:
        try:
            docs = json.loads(Path(resolutions).read_text("utf-8"))
            outcomes = _apply_resolutions(outcomes, docs)
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            _fail(f"cannot apply resolutions: {exc}")
    _emit(ctx, fmt, outcomes_to_dict(outcomes), render_outcomes(outcomes))
    if write_gold:
        try:
            base = layer_to_fragment(bundle, bundle.layers[0])
            gold = build_gold_fragment(base, outcomes)
            validate_fragment(gold)
            Path(write_gold).write_bytes(serialize_lat(gold))
        except (ValueError, LatSerializeError) as exc:
            _fail(f"cannot write gold: {exc}")
        audit_path = audit or write_gold + ".audit.json"
        audit_doc = outcomes_to_dict(outcomes)
        audit_doc["report"] = "adjudication-audit"
        audit_doc["source_bundle"] = bundle_file
        audit_doc["raw_text_sha256"] = bundle.digest
        audit_doc["annotators"] = [layer.annotator_id for layer in bundle.layers]
        Path(audit_path).write_text(to_json_bytes(audit_doc), "utf-8")


def _apply_resolutions(outcomes, docs):
    from .model import NarrativeType

    if not isinstance(docs, list):
        raise ValueError("resolutions file must hold a JSON list")
    index = {}
    for i, outcome in enumerate(outcomes):
        kind = outcome.span_kind.value if outcome.span_kind else None
        index[(outcome.unit[1], outcome.field, kind)] = i
    for doc in docs:
        key = (
            int(doc["clause_id"]),
            str(doc["field"]),
            doc.get("span_kind"),
        )
        if key not in index:
            raise ValueError(f"no outcome for resolution target {key}")
        i = index[key]
        outcomes[i] = resolve_discussion(
            outcomes[i],
            resolution=str(doc["resolution"]),
            resolvers=[str(r) for r in doc.get("resolvers", [])],
            note=str(doc.get("note", "")),
            resolved_at=doc.get("resolved_at"),
        )
    return outcomes


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default=None)
@click.pass_context
def stats(ctx, files, fmt):
    """Corpus statistics over gold annotation tables."""
    fragments = []
    for name in files:
        try:
            if name.endswith(".bundle.json"):
                bundle = parse_bundle(Path(name).read_bytes())
                if bundle.gold is not None:
                    fragments.append(bundle.gold)
            else:
                fragments.append(parse_lat(Path(name).read_bytes()))
        except (LatParseError, BundleParseError) as exc:
            _fail(f"{name}: {exc}")
    result = corpus_stats(fragments)
    _emit(ctx, fmt, stats_to_dict(result), render_stats(result))


@main.command()
@click.argument("bundle_files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--seeds", "seeds_flag", default=None, help="Range like 0..99 or list.")
@click.option("--nt", "nt_flag", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default=None)
@click.pass_context
def baseline(ctx, bundle_files, seeds_flag, nt_flag, fmt):
    """Random-segmentation agreement baseline, pooled over bundles.

    Each random segmenter matches the mean human boundary count of the
    fragment it replaces.
    """
    seeds = _parse_seeds(str(_setting(ctx, "seeds", seeds_flag, "0..99")))
    n_t = int(_setting(ctx, "nt", nt_flag, 2))
    fragments = []
    for name in bundle_files:
        bundle = _read_bundle(name)
        if not bundle.layers:
            _fail(f"{name}: bundle has no annotator layers to take boundary counts from")
        count = mean_boundary_count([Segmentation(l.masses) for l in bundle.layers])
        fragments.append(BaselineFragment(bundle.fragment_id, bundle.atoms, count))
    report = random_baseline_experiment(fragments, seeds, n_t=n_t)
    _emit(ctx, fmt, baseline_report_to_dict(report), render_baseline_report(report))


@main.command()
@click.argument("infile", type=click.Path(exists=True))
@click.option("--to", "target", type=click.Choice(["lat", "bundle"]), required=True)
@click.option("--annotator", default="a1", show_default=True)
@click.option("--gold", "as_gold", is_flag=True, help="Also store the fragment as gold.")
@click.option("-o", "--output", type=click.Path(), default=None)
def convert(infile, target, annotator, as_gold, output):
    """Convert between the table and bundle formats."""
    data = Path(infile).read_bytes()
    try:
        if target == "bundle":
            fragment = parse_lat(data)
            bundle = fragment_to_single_layer_bundle(fragment, annotator)
            if as_gold:
                bundle = Bundle(
                    fragment_id=bundle.fragment_id,
                    topic=bundle.topic,
                    raw_text=bundle.raw_text,
                    layers=bundle.layers,
                    turns=bundle.turns,
                    gold=fragment,
                )
            out = serialize_bundle(bundle)
        else:
            bundle = parse_bundle(data)
            if as_gold or not bundle.layers:
                if bundle.gold is None:
                    _fail(f"{infile}: bundle has no gold fragment")
                fragment = bundle.gold
            else:
                try:
                    layer = bundle.layer(annotator)
                except KeyError as exc:
                    _fail(str(exc))
                fragment = layer_to_fragment(bundle, layer)
            out = serialize_lat(fragment)
    except (LatParseError, BundleParseError, LatSerializeError) as exc:
        _fail(f"{infile}: {exc}")
    if output:
        Path(output).write_bytes(out)
    else:
        click.echo(out.decode("utf-8"), nl=False)


@main.command()
@click.option("--chart", "chart_flag", type=click.Path(exists=True), default=None)
@click.option("--answers", "answers_json", default=None, help="JSON object of answers.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default=None)
@click.pass_context
def wizard(ctx, chart_flag, answers_json, fmt):
    """Walk the micro-label decision chart.

    With --answers, print the next question or the outcome; without it,
    ask interactively on a terminal.
    """
    chart = _read_chart(ctx, chart_flag)
    if answers_json is not None:
        try:
            answers = json.loads(answers_json)
        except json.JSONDecodeError as exc:
            raise click.BadParameter(f"--answers is not valid JSON: {exc}")
        question = next_question(
            {str(k): bool(v) for k, v in answers.items()}, chart
        )
        doc = question_to_dict(question)
        table = (
            f"outcome: {question.outcome}\n"
            if question.terminal
            else f"{question.node_id}: {question.question_en}\n{question.question_ja}\n"
        )
        _emit(ctx, fmt, doc, table)
        return
    if not sys.stdin.isatty():
        raise click.UsageError("no terminal; pass --answers for batch use")
    answers: dict[str, bool] = {}
    while True:
        question = next_question(answers, chart)
        if question.terminal:
            label = question.outcome if question.outcome != "none" else "no micro label"
            click.echo(f"result: {label}")
            return
        click.echo(question.question_ja)
        for example in question.examples:
            click.echo(f"  e.g. {example}")
        answers[question.node_id] = click.confirm(question.question_en)


@main.command()
@click.option("--data", "data_flag", type=click.Path(), default=None)
@click.option("--port", "port_flag", type=int, default=None)
@click.option("--host", "host_flag", default=None)
@click.option("--chart", "chart_flag", type=click.Path(exists=True), default=None)
@click.pass_context
def serve(ctx, data_flag, port_flag, host_flag, chart_flag):
    """Run the annotation service over a directory of bundles."""
    import uvicorn

    from .service import create_app

    data_dir = _setting(ctx, "data", data_flag, "data")
    port = int(_setting(ctx, "port", port_flag, 8400))
    host = str(_setting(ctx, "host", host_flag, "127.0.0.1"))
    chart = _read_chart(ctx, chart_flag)
    app = create_app(Path(data_dir), chart=chart)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
