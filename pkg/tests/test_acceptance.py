"""Acceptance suite.

One test per acceptance criterion, each printing a PASS line with the
criterion name when it holds (run with ``pytest -s`` to see them).
Tolerances are pinned here and nowhere else.
"""

from __future__ import annotations

import time
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from genfrag import mutate, random_fragment, random_masses
from labovkit.adjudicate import FIELD_MICRO, corpus_stats, majority_vote
from labovkit.labelmetrics import (
    AlphaUndefinedError,
    LabelMatrix,
    exact_match_rates,
    krippendorff_alpha_nominal,
)
from labovkit.latfmt import parse_lat, serialize_lat
from labovkit.lints import RULES, Severity, is_valid_fragment, lint_fragment, lint_structure
from labovkit.model import (
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
from labovkit.reports import render_stats, stats_to_dict
from labovkit.segmetrics import (
    BaselineFragment,
    Segmentation,
    boundary_edit_distance,
    boundary_similarity,
    fleiss_kappa_b,
    random_baseline_experiment,
    random_segmentation,
)
from labovkit.wizard import ChartAnswer, decide_micro
from oracles import all_compositions, oracle_alpha, oracle_bed
from test_lints import RULE_FIXTURES


def report(name: str) -> None:
    print(f"PASS: {name}")


# ---------------------------------------------------------------------------
# Criterion: BED/B oracle equivalence, exhaustive <= 8 atoms, < 10 s.

def test_bed_oracle_equivalence_exhaustive():
    n_t = 2
    # warm the JIT outside the timed window; compilation is not the algorithm
    boundary_edit_distance(Segmentation((1, 1)), Segmentation((2,)), n_t)
    started = time.monotonic()
    pairs_checked = 0
    for atoms in range(1, 9):
        compositions = all_compositions(atoms)
        for masses_a in compositions:
            seg_a = Segmentation(masses_a)
            for masses_b in compositions:
                seg_b = Segmentation(masses_b)
                additions, count, offset, matches, raw, b = oracle_bed(
                    masses_a, masses_b, n_t
                )
                result = boundary_edit_distance(seg_a, seg_b, n_t)
                assert result.additions == additions
                assert len(result.transpositions) == count
                assert sum(abs(o) for _, o in result.transpositions) == offset
                assert result.matches == matches
                assert result.raw_distance == raw
                assert boundary_similarity(seg_a, seg_b, n_t) == b
                pairs_checked += 1
    elapsed = time.monotonic() - started
    assert pairs_checked == sum(4 ** (n - 1) for n in range(1, 9))
    assert elapsed < 10.0, f"exhaustive check took {elapsed:.1f}s"
    report(
        f"BED/B oracle equivalence ({pairs_checked} pairs, {elapsed:.1f}s < 10s)"
    )


# ---------------------------------------------------------------------------
# Criterion: metric properties on 10,000 fuzzed pairs, zero failures.

def test_metric_properties_fuzzed():
    rng = np.random.default_rng(77001)
    failures = 0
    for _ in range(10_000):
        atoms = int(rng.integers(2, 61))
        a = Segmentation(random_masses(rng, atoms))
        b = Segmentation(random_masses(rng, atoms))
        n_t = int(rng.integers(2, 6))
        b_ab = boundary_similarity(a, b, n_t)
        b_ba = boundary_similarity(b, a, n_t)
        identity = boundary_edit_distance(a, a, n_t)
        if b_ab != b_ba:
            failures += 1
        if boundary_edit_distance(a, b, n_t).raw_distance != boundary_edit_distance(
            b, a, n_t
        ).raw_distance:
            failures += 1
        if boundary_similarity(a, a, n_t) != 1 or identity.raw_distance != 0:
            failures += 1
        if not 0 <= b_ab <= 1:
            failures += 1
    assert failures == 0
    report("metric properties on 10,000 fuzzed pairs (symmetry, identity, range)")


# ---------------------------------------------------------------------------
# Criterion: kappa_B sanity replication on a seeded synthetic corpus.

def _jitter_layer(base: Segmentation, rng) -> Segmentation:
    atoms = base.atoms
    positions = set()
    for pos in base.boundaries():
        if rng.random() < 0.10:  # boundary noise: relocate uniformly
            candidate = int(rng.integers(1, atoms))
        else:  # near-miss jitter by at most one position
            candidate = pos + int(rng.integers(-1, 2))
        if 1 <= candidate <= atoms - 1 and candidate not in positions:
            positions.add(candidate)
        elif pos not in positions:
            positions.add(pos)
    return Segmentation.from_boundaries(atoms, positions)


def _synthetic_corpus(seed=20240001):
    rng = np.random.default_rng(seed)
    corpus: dict[str, dict[str, Segmentation]] = {}
    spec = []
    for k in range(16):
        atoms = int(rng.integers(300, 801))
        count = max(5, atoms // 20)
        base = random_segmentation(atoms, count, int(rng.integers(0, 2**31)))
        layers = {f"h{i}": _jitter_layer(base, rng) for i in range(1, 4)}
        mean_count = round(
            sum(len(s.boundaries()) for s in layers.values()) / len(layers)
        )
        corpus[f"f{k:02d}"] = layers
        spec.append(BaselineFragment(f"f{k:02d}", atoms, mean_count))
    return corpus, spec


def test_kappa_sanity_replication():
    corpus, spec = _synthetic_corpus()
    human_report = fleiss_kappa_b(corpus, n_t=2)
    assert human_report.kappa_b is not None
    baseline = random_baseline_experiment(spec, seeds=range(100), n_t=2)
    assert len(baseline.runs) == 100
    wins = sum(
        1
        for run in baseline.runs
        if run.kappa_b is not None and human_report.kappa_b > run.kappa_b
    )
    assert wins == 100, f"humans beat random in only {wins}/100 seed pairs"

    identical = {
        fid: {coder: layers["h1"] for coder in layers}
        for fid, layers in corpus.items()
    }
    identical_kappa = fleiss_kappa_b(identical, n_t=2).kappa_b
    assert abs(float(identical_kappa) - 1.0) <= 1e-12
    report(
        f"kappa_B sanity: humans ({float(human_report.kappa_b):.3f}) beat random "
        f"(max {float(baseline.kappa_max):.3f}) in 100/100 seed pairs; "
        f"identical layers = 1.0 +/- 1e-12"
    )


# ---------------------------------------------------------------------------
# Criterion: Krippendorff alpha vs independent oracle, 1e-12, 1,000 matrices.

def test_alpha_oracle_equivalence():
    rng = np.random.default_rng(424242)
    checked = 0
    undefined = 0
    for _ in range(1_000):
        n_coders = int(rng.integers(2, 6))
        n_labels = int(rng.integers(3, 7))
        n_units = int(rng.integers(2, 30))
        labels = [f"L{i}" for i in range(n_labels)]
        rows = [
            [
                labels[int(rng.integers(0, n_labels))]
                if rng.random() >= 0.20
                else None
                for _ in range(n_coders)
            ]
            for _ in range(n_units)
        ]
        matrix = LabelMatrix.from_rows(rows)
        try:
            expected = oracle_alpha(rows)
        except ValueError:
            with pytest.raises((ValueError, AlphaUndefinedError)):
                krippendorff_alpha_nominal(matrix)
            undefined += 1
            continue
        got = krippendorff_alpha_nominal(matrix)
        assert got == expected
        assert abs(float(got) - float(expected)) <= 1e-12
        checked += 1
    assert checked + undefined == 1_000

    perfect = LabelMatrix.from_rows([["A", "A", "A"], ["B", "B", "B"], ["C", "C", None]])
    assert krippendorff_alpha_nominal(perfect) == 1
    with pytest.raises(AlphaUndefinedError):
        krippendorff_alpha_nominal(LabelMatrix.from_rows([["A", "A"], ["A", "A"]]))
    report(
        f"alpha oracle equivalence on 1,000 matrices ({checked} defined, "
        f"{undefined} degenerate), perfect=1, undefined raised"
    )


# ---------------------------------------------------------------------------
# Criterion: exact-match rates reproduce the hand-counted fixtures.

def test_exact_match_hand_counts():
    rates = exact_match_rates(LabelMatrix.from_rows([["N", "N", "F"], ["N", "N", "N"]]))
    assert rates == {"N": Fraction(1, 2), "F": Fraction(0, 1)}
    assert exact_match_rates(LabelMatrix.from_rows([["N", "N", "N"]])) == {
        "N": Fraction(1)
    }
    mixed = exact_match_rates(
        LabelMatrix.from_rows(
            [["N", "N", "F"], ["N", "N", "N"], ["R", "R", None], ["F", None, None]]
        )
    )
    # hand count: N chosen in 2 units, all-agree in 1; R chosen 1, agree 1;
    # F chosen in 3 units, agree 0 (single-coder unit cannot agree)
    assert mixed == {
        "N": Fraction(1, 2),
        "R": Fraction(1, 1),
        "F": Fraction(0, 1),
    }
    report("exact-match rates reproduce hand-counted fixtures exactly")


# ---------------------------------------------------------------------------
# Criterion: format round-trip, byte-exact, fixture + 500 generated.

def test_format_roundtrip(daytrip, daytrip_bytes):
    assert serialize_lat(parse_lat(daytrip_bytes)) == daytrip_bytes
    assert parse_lat(daytrip_bytes) == daytrip
    rng = np.random.default_rng(808)
    for i in range(500):
        fragment = random_fragment(rng, fragment_id=f"rt{i}")
        first = serialize_lat(fragment)
        parsed = parse_lat(first)
        assert parsed == fragment
        assert serialize_lat(parsed) == first
    report("format round-trip byte-exact on fixture + 500 generated fragments")


# ---------------------------------------------------------------------------
# Criterion: lint suite coverage and validation equivalence.

def test_lint_rule_coverage_and_equivalence():
    active = {rule_id for rule_id, rule in RULES.items() if rule.active}
    assert active == set(RULE_FIXTURES), "every active rule needs fixtures"
    for rule_id, (firing, non_firing) in RULE_FIXTURES.items():
        fired = {f.rule_id for f in lint_fragment(firing)}
        quiet = {f.rule_id for f in lint_fragment(non_firing)}
        assert rule_id in fired, f"{rule_id} has no firing fixture"
        assert rule_id not in quiet, f"{rule_id} has no non-firing fixture"
    assert not RULES["coda-reference-time"].active

    rng = np.random.default_rng(909)
    divergences = 0
    for i in range(500):
        fragment = random_fragment(rng, fragment_id=f"eq{i}")
        if rng.random() < 0.6:
            fragment, _ = mutate(fragment, rng)
        has_errors = any(
            f.severity is Severity.ERROR for f in lint_structure(fragment)
        )
        if is_valid_fragment(fragment) == has_errors:
            divergences += 1
    assert divergences == 0
    report(
        f"lint suite: {len(active)} active rules with firing/non-firing fixtures; "
        f"validation equivalence 500/500"
    )


# ---------------------------------------------------------------------------
# Criterion: wizard consistency with the worked fixture; chart totality.

def test_wizard_fixture_consistency(daytrip):
    vectors = [
        ChartAnswer(False, True),
        ChartAnswer(False, False, True),
        ChartAnswer(False, False, False),
        ChartAnswer(True),
    ]
    for clause in daytrip.clauses:
        assert any(
            decide_micro(v) == clause.micro for v in vectors
        ), f"clause {clause.id} label {clause.micro} unreachable"
    outcomes = {
        decide_micro(ChartAnswer(h, e, p)) for h, e, p in product([True, False], repeat=3)
    }
    assert outcomes == {
        None,
        MicroLabel.NARRATIVE,
        MicroLabel.FREE,
        MicroLabel.RESTRICTED,
    }
    report("wizard reproduces all 10 fixture labels; chart total over answer space")


# ---------------------------------------------------------------------------
# Criterion: adjudication invariance and worked fixtures.

def _random_layers(rng):
    n = int(rng.integers(3, 10))
    masses = tuple(int(m) for m in rng.integers(2, 9, size=n))
    labels = ["N", "F", "R"]
    layers = []
    n_coders = int(rng.integers(2, 5))
    for i in range(n_coders):
        micro = {
            c: MicroLabel(labels[int(rng.integers(0, 3))])
            for c in range(1, n + 1)
            if rng.random() > 0.25
        }
        layers.append(AnnotatorLayer(f"a{i + 1}", "f", masses, (), micro, {}))
    return layers


def test_adjudication_invariance_and_fixtures():
    rng = np.random.default_rng(13579)
    for _ in range(1_000):
        layers = _random_layers(rng)
        baseline_outcomes = majority_vote(layers, FIELD_MICRO)
        order = [layers[i] for i in rng.permutation(len(layers))]
        assert majority_vote(order, FIELD_MICRO) == baseline_outcomes

    def vote(labels):
        layers = [
            AnnotatorLayer(
                f"a{i + 1}", "f", (3, 3), (), {1: MicroLabel(v)}, {}
            )
            for i, v in enumerate(labels)
        ]
        return majority_vote(layers, FIELD_MICRO)[0]

    majority = vote(["N", "N", "F"])
    assert majority.decided == "N" and not majority.needs_discussion
    split = vote(["N", "F", "R"])
    assert split.needs_discussion and split.decided is None
    report("adjudication: permutation-invariant on 1,000 cases; worked fixtures hold")


# ---------------------------------------------------------------------------
# Criterion: corpus statistics on a constructed corpus with known multisets.

MACRO_TOTALS = {
    MacroLabel.ABSTRACT: 17,
    MacroLabel.ORIENTATION: 134,
    MacroLabel.COMPLICATION: 172,
    MacroLabel.EVALUATION: 42,
    MacroLabel.RESOLUTION: 16,
    MacroLabel.CODA: 18,
}
MICRO_TOTALS = {
    MicroLabel.NARRATIVE: 193,
    MicroLabel.FREE: 139,
    MicroLabel.RESTRICTED: 68,
}


def _published_shape_corpus() -> list[Fragment]:
    """16 fragments whose label multisets match the published study."""
    story_lengths = [[22, 15], [15]] + [[15]] * 14  # 17 spans, 262 clauses
    habitual_lengths = [9, 14] + [9] * 14  # 16 spans, 149 clauses
    ie_fillers = [27] * 14 + [26] * 2  # 430 interviewee clauses outside spans
    ir_fillers = [8] * 6 + [7] * 10  # 118 interviewer clauses

    micro_pool = [label for label, k in MICRO_TOTALS.items() for _ in range(k)]
    micro_pool += [None] * (262 + 149 - len(micro_pool))  # 11 unlabeled
    macro_pool = [label for label, k in MACRO_TOTALS.items() for _ in range(k)]
    macro_pool += [None] * (262 + 149 - len(macro_pool))  # 12 unlabeled
    micro_iter = iter(micro_pool)
    macro_iter = iter(macro_pool)

    fragments = []
    for k in range(16):
        clauses: list[Clause] = []
        spans: list[NarrativeSpan] = []

        def add(speaker, micro=None, macro=None):
            clauses.append(
                Clause(len(clauses) + 1, speaker, f"clause {len(clauses) + 1}", micro, macro)
            )

        def add_span(kind, length, labeled):
            start = len(clauses) + 1
            for _ in range(length):
                if labeled:
                    add(Speaker.INTERVIEWEE, next(micro_iter), next(macro_iter))
                else:
                    add(Speaker.INTERVIEWEE)
            spans.append(NarrativeSpan(kind, start, start + length - 1))

        for length in story_lengths[k]:
            add_span(NarrativeType.STORY, length, labeled=True)
            add(Speaker.INTERVIEWER)
        add_span(NarrativeType.HABITUAL, habitual_lengths[k], labeled=True)
        if k == 2:
            add(Speaker.INTERVIEWER)
            add_span(NarrativeType.HYPOTHETICAL, 6, labeled=False)
        for _ in range(ie_fillers[k]):
            add(Speaker.INTERVIEWEE)
        already_ir = sum(1 for c in clauses if c.speaker is Speaker.INTERVIEWER)
        for _ in range(ir_fillers[k] - already_ir):
            add(Speaker.INTERVIEWER)
        fragments.append(
            Fragment(f"study-{k:02d}", Topic.HAPPINESS_HARDSHIP, tuple(clauses), tuple(spans))
        )
    return fragments


def test_corpus_stats_published_shape():
    corpus = _published_shape_corpus()
    for fragment in corpus:
        assert is_valid_fragment(fragment)
    stats = corpus_stats(corpus)

    assert stats.clause_totals == (965, 847, 118)
    assert stats.macro_counts == MACRO_TOTALS
    assert {label: count for label, (count, _) in stats.micro_counts.items()} == MICRO_TOTALS
    assert stats.micro_labeled_total == 400

    doc = stats_to_dict(stats)
    percents = {label.value: doc["micro"][label.value]["percent"] for label in MicroLabel}
    assert percents == {"N": 48, "F": 34, "R": 17}
    assert sum(percents.values()) == 99

    spans = doc["spans"]
    assert (spans["Story"]["count"], spans["Habitual"]["count"], spans["Hypothetical"]["count"]) == (17, 16, 1)
    rendered = render_stats(stats)
    assert "15.41" in rendered and "9.31" in rendered and "6.00" in rendered
    assert "48%" in rendered and "34%" in rendered and "17%" in rendered
    assert "Complication  172" in rendered.replace("   ", "  ")
    report(
        "corpus stats reproduce the published multisets exactly; "
        "micro shares render 48/34/17 summing to 99"
    )
