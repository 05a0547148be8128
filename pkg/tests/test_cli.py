import json

import pytest
from click.testing import CliRunner

from labovkit.bundle import (
    Bundle,
    fragment_to_single_layer_bundle,
    parse_bundle,
    serialize_bundle,
)
from labovkit.cli import main
from labovkit.latfmt import HEADER_LINE, parse_lat
from labovkit.model import AnnotatorLayer, MicroLabel, NarrativeSpan, NarrativeType


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def daytrip_file(tmp_path, daytrip_bytes):
    path = tmp_path / "daytrip.lat.tsv"
    path.write_bytes(daytrip_bytes)
    return str(path)


def make_multi_layer_bundle(daytrip):
    base = fragment_to_single_layer_bundle(daytrip, "a1")
    layer1 = base.layers[0]
    cuts = list(AnnotatorLayer("x", "d", layer1.masses).masses)
    # second annotator merges the last two clauses, third matches the first
    merged = tuple(cuts[:-2] + [cuts[-2] + cuts[-1]])
    layer2 = AnnotatorLayer(
        "a2",
        layer1.fragment_id,
        merged,
        spans=(NarrativeSpan(NarrativeType.STORY, 1, 9),),
        micro={1: MicroLabel.FREE},
    )
    layer3 = AnnotatorLayer(
        "a3",
        layer1.fragment_id,
        layer1.masses,
        spans=layer1.spans,
        micro=dict(layer1.micro),
        macro=dict(layer1.macro),
    )
    return Bundle(
        fragment_id=base.fragment_id,
        topic=base.topic,
        raw_text=base.raw_text,
        layers=(layer1, layer2, layer3),
        turns=base.turns,
        gold=None,
    )


@pytest.fixture
def bundle_file(tmp_path, daytrip):
    bundle = make_multi_layer_bundle(daytrip)
    path = tmp_path / "daytrip.bundle.json"
    path.write_bytes(serialize_bundle(bundle))
    return str(path)


def test_validate_ok(runner, daytrip_file):
    result = runner.invoke(main, ["validate", daytrip_file])
    assert result.exit_code == 0
    assert result.output.startswith("OK")


def test_validate_failure_exit_1(runner, tmp_path):
    bad = tmp_path / "bad.lat.tsv"
    bad.write_text(HEADER_LINE + "\n1\tIE\tone\tSE\t\t\t\t\n", "utf-8")
    result = runner.invoke(main, ["validate", str(bad)])
    assert result.exit_code == 1
    assert "span-min-length" in result.output


def test_validate_parse_error_exit_1(runner, tmp_path):
    bad = tmp_path / "bad.lat.tsv"
    bad.write_text("not a table\n", "utf-8")
    result = runner.invoke(main, ["validate", str(bad)])
    assert result.exit_code == 1


def test_usage_error_exit_2(runner):
    result = runner.invoke(main, ["lint", "--no-such-flag"])
    assert result.exit_code == 2


def test_lint_clean_json(runner, daytrip_file):
    result = runner.invoke(main, ["lint", daytrip_file, "--format", "json"])
    assert result.exit_code == 0
    doc = json.loads(result.output)
    assert doc["findings"] == []


def test_lint_error_exit_1(runner, tmp_path):
    bad = tmp_path / "bad.lat.tsv"
    bad.write_text(HEADER_LINE + "\n1\tIE\tone\tSE\t\t\tN\t\n", "utf-8")
    result = runner.invoke(main, ["lint", str(bad), "--format", "json"])
    assert result.exit_code == 1
    doc = json.loads(result.output)
    assert any(f["rule_id"] == "span-min-length" for f in doc["findings"])


def test_agree_seg_report_shape(runner, bundle_file):
    result = runner.invoke(
        main, ["agree-seg", bundle_file, "--nt", "2", "--format", "json"]
    )
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["report"] == "segmentation-agreement"
    assert doc["params"]["n_t"] == 2
    assert 0 <= doc["mean_b"]["value"] <= 1
    assert len(doc["pairwise_b"]) == 3


def test_agree_seg_deterministic(runner, bundle_file):
    args = ["agree-seg", bundle_file, "--format", "json"]
    assert runner.invoke(main, args).output == runner.invoke(main, args).output


def test_agree_labels_identical_layers(runner, tmp_path, daytrip):
    base = fragment_to_single_layer_bundle(daytrip, "a1")
    layer = base.layers[0]
    clones = tuple(
        AnnotatorLayer(
            f"a{i}", layer.fragment_id, layer.masses, layer.spans,
            dict(layer.micro), dict(layer.macro),
        )
        for i in range(1, 4)
    )
    bundle = Bundle(
        fragment_id=base.fragment_id,
        topic=base.topic,
        raw_text=base.raw_text,
        layers=clones,
        turns=base.turns,
    )
    path = tmp_path / "identical.bundle.json"
    path.write_bytes(serialize_bundle(bundle))
    result = runner.invoke(
        main, ["agree-labels", str(path), "--field", "micro", "--format", "json"]
    )
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["alpha"]["value"] == 1.0


def make_aligned_bundle(daytrip, micro_votes):
    """Bundle of layers sharing one reference segmentation.

    ``micro_votes`` maps clause id to the three annotators' labels.
    """
    base = fragment_to_single_layer_bundle(daytrip, "a1")
    template = base.layers[0]
    layers = []
    for i in range(3):
        micro = {
            clause: MicroLabel(votes[i])
            for clause, votes in micro_votes.items()
            if votes[i] is not None
        }
        layers.append(
            AnnotatorLayer(
                f"a{i + 1}", template.fragment_id, template.masses,
                template.spans, micro, {},
            )
        )
    return Bundle(
        fragment_id=base.fragment_id,
        topic=base.topic,
        raw_text=base.raw_text,
        layers=tuple(layers),
        turns=base.turns,
    )


def test_adjudicate_fixtures(runner, tmp_path, daytrip):
    bundle = make_aligned_bundle(
        daytrip, {1: ("N", "N", "F"), 2: ("N", "F", "R"), 3: ("N", "N", "N")}
    )
    path = tmp_path / "aligned.bundle.json"
    path.write_bytes(serialize_bundle(bundle))
    result = runner.invoke(
        main, ["adjudicate", str(path), "--field", "micro", "--format", "json"]
    )
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    by_clause = {o["clause_id"]: o for o in doc["outcomes"]}
    assert by_clause[1]["decided"] == "N"
    assert by_clause[2]["needs_discussion"] is True
    assert by_clause[3]["decided"] == "N" and by_clause[3]["unanimous"] is True


def test_adjudicate_write_gold(runner, tmp_path, daytrip):
    bundle = fragment_to_single_layer_bundle(daytrip, "a1")
    layer = bundle.layers[0]
    clones = tuple(
        AnnotatorLayer(
            f"a{i}", layer.fragment_id, layer.masses, layer.spans,
            dict(layer.micro), dict(layer.macro),
        )
        for i in range(1, 4)
    )
    bundle = Bundle(
        fragment_id=bundle.fragment_id,
        topic=bundle.topic,
        raw_text=bundle.raw_text,
        layers=clones,
        turns=bundle.turns,
    )
    bpath = tmp_path / "b.bundle.json"
    bpath.write_bytes(serialize_bundle(bundle))
    gold_path = tmp_path / "gold.lat.tsv"
    result = runner.invoke(
        main,
        [
            "adjudicate",
            str(bpath),
            "--write-gold",
            str(gold_path),
            "--format",
            "json",
        ],
    )
    assert result.exit_code == 0, result.output
    gold = parse_lat(gold_path.read_bytes())
    assert gold.spans == daytrip.spans
    assert [c.micro for c in gold.clauses] == [c.micro for c in daytrip.clauses]
    audit = json.loads((tmp_path / "gold.lat.tsv.audit.json").read_text("utf-8"))
    assert audit["report"] == "adjudication-audit"
    assert audit["needs_discussion"] == 0


def test_stats_daytrip(runner, daytrip_file):
    result = runner.invoke(main, ["stats", daytrip_file, "--format", "json"])
    assert result.exit_code == 0
    doc = json.loads(result.output)
    assert doc["clauses"]["total"] == 10
    assert doc["macro"]["Complication"] == 3
    assert doc["micro"]["N"]["count"] == 4
    assert doc["spans"]["Story"]["count"] == 1


def test_baseline_deterministic(runner, bundle_file):
    args = ["baseline", bundle_file, "--seeds", "0..9", "--format", "json"]
    first = runner.invoke(main, args)
    second = runner.invoke(main, args)
    assert first.exit_code == 0, first.output
    assert first.output == second.output
    doc = json.loads(first.output)
    assert len(doc["runs"]) == 10
    assert doc["params"]["seeds"] == list(range(10))


def test_convert_roundtrip(runner, tmp_path, daytrip_file, daytrip_bytes):
    bundle_path = tmp_path / "converted.bundle.json"
    result = runner.invoke(
        main,
        ["convert", daytrip_file, "--to", "bundle", "--annotator", "gold",
         "-o", str(bundle_path)],
    )
    assert result.exit_code == 0, result.output
    bundle = parse_bundle(bundle_path.read_bytes())
    assert bundle.fragment_id == "daytrip"
    back = runner.invoke(
        main, ["convert", str(bundle_path), "--to", "lat", "--annotator", "gold"]
    )
    assert back.exit_code == 0
    assert back.output.encode() == daytrip_bytes


def test_wizard_batch(runner):
    result = runner.invoke(main, ["wizard", "--answers", "{}", "--format", "json"])
    assert result.exit_code == 0
    doc = json.loads(result.output)
    assert doc["node_id"] == "hypothetical-only"
    result = runner.invoke(
        main,
        [
            "wizard",
            "--answers",
            '{"hypothetical-only": false, "event-or-discovery": true}',
            "--format",
            "json",
        ],
    )
    doc = json.loads(result.output)
    assert doc["terminal"] and doc["outcome"] == "N"


def test_env_config_defaults(runner, tmp_path, bundle_file, monkeypatch):
    config = tmp_path / "labov.json"
    config.write_text(json.dumps({"nt": 3, "format": "json"}), "utf-8")
    monkeypatch.setenv("LABOV_CONFIG", str(config))
    result = runner.invoke(main, ["agree-seg", bundle_file])
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["params"]["n_t"] == 3


def test_timestamps_flag(runner, daytrip_file):
    plain = runner.invoke(main, ["stats", daytrip_file, "--format", "json"])
    stamped = runner.invoke(
        main, ["--timestamps", "stats", daytrip_file, "--format", "json"]
    )
    assert "generated_at" not in plain.output
    assert "generated_at" in stamped.output
