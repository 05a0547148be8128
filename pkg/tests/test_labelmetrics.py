from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from labovkit.labelmetrics import (
    AlphaUndefinedError,
    LabelMatrix,
    confusion_counts,
    exact_match_rates,
    krippendorff_alpha_nominal,
    label_agreement_report,
)
from labovkit.model import AnnotatorLayer, MicroLabel
from oracles import oracle_alpha


def test_alpha_worked_example():
    rows = [["N", "N"], ["N", "F"], ["F", "F"], ["R", "R"]]
    alpha = krippendorff_alpha_nominal(LabelMatrix.from_rows(rows))
    assert alpha == oracle_alpha(rows) == Fraction(2, 3)


def test_alpha_perfect_agreement():
    rows = [["N", "N", "N"], ["F", "F", "F"], ["R", "R", "R"]]
    assert krippendorff_alpha_nominal(LabelMatrix.from_rows(rows)) == 1


def test_alpha_no_variation():
    with pytest.raises(AlphaUndefinedError, match="no variation"):
        krippendorff_alpha_nominal(LabelMatrix.from_rows([["N", "N"], ["N", "N"]]))


def test_alpha_no_pairable_units():
    rows = [["N", None], [None, "F"]]
    with pytest.raises(ValueError, match="pairable"):
        krippendorff_alpha_nominal(LabelMatrix.from_rows(rows))


def test_alpha_missing_values_excluded():
    rows = [["N", "N", None], ["N", "F", "F"], [None, None, "R"]]
    alpha = krippendorff_alpha_nominal(LabelMatrix.from_rows(rows))
    assert alpha == oracle_alpha(rows)


def test_alpha_relabeling_invariance():
    rng = np.random.default_rng(11)
    labels = ["A", "B", "C", "D"]
    rows = [
        [labels[int(rng.integers(0, 4))] if rng.random() > 0.2 else None for _ in range(3)]
        for _ in range(30)
    ]
    mapping = {"A": "x", "B": "y", "C": "z", "D": "w"}
    renamed = [[mapping[v] if v else None for v in row] for row in rows]
    assert krippendorff_alpha_nominal(
        LabelMatrix.from_rows(rows)
    ) == krippendorff_alpha_nominal(LabelMatrix.from_rows(renamed))


def test_alpha_single_value_units_do_not_matter():
    rows = [["N", "N"], ["N", "F"], ["R", "R"]]
    padded = rows + [["F", None], [None, "N"], [None, None]]
    assert krippendorff_alpha_nominal(
        LabelMatrix.from_rows(rows)
    ) == krippendorff_alpha_nominal(LabelMatrix.from_rows(padded))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000))
def test_alpha_matches_oracle_random(seed):
    rng = np.random.default_rng(seed)
    n_coders = int(rng.integers(2, 6))
    n_labels = int(rng.integers(3, 7))
    n_units = int(rng.integers(2, 25))
    labels = [f"L{i}" for i in range(n_labels)]
    rows = [
        [
            labels[int(rng.integers(0, n_labels))] if rng.random() > 0.2 else None
            for _ in range(n_coders)
        ]
        for _ in range(n_units)
    ]
    matrix = LabelMatrix.from_rows(rows)
    try:
        expected = oracle_alpha(rows)
    except ValueError as exc:
        with pytest.raises(ValueError):
            krippendorff_alpha_nominal(matrix)
        return
    assert krippendorff_alpha_nominal(matrix) == expected


def test_exact_match_worked_fixture():
    rates = exact_match_rates(LabelMatrix.from_rows([["N", "N", "F"], ["N", "N", "N"]]))
    assert rates == {"N": Fraction(1, 2), "F": Fraction(0, 1)}


def test_exact_match_single_unit_unanimous():
    rates = exact_match_rates(LabelMatrix.from_rows([["N", "N", "N"]]))
    assert rates == {"N": Fraction(1)}


def test_exact_match_unchosen_absent():
    rates = exact_match_rates(LabelMatrix.from_rows([["N", "N"]]))
    assert "F" not in rates


def test_exact_match_single_coder_unit_not_agreement():
    # one coder picked N alone: counts as chosen, cannot count as agreed
    rates = exact_match_rates(LabelMatrix.from_rows([["N", None, None]]))
    assert rates == {"N": Fraction(0, 1)}


def test_exact_match_majority_denominator():
    rows = [["N", "F", "F"], ["N", "N", "N"]]
    any_rates = exact_match_rates(LabelMatrix.from_rows(rows), denominator="any")
    majority = exact_match_rates(LabelMatrix.from_rows(rows), denominator="majority")
    assert any_rates["N"] == Fraction(1, 2)
    assert majority["N"] == Fraction(1, 1)
    assert majority["F"] == Fraction(0, 1)


def test_exact_match_numerator_le_denominator():
    rng = np.random.default_rng(3)
    rows = [
        [
            ["N", "R", "F"][int(rng.integers(0, 3))] if rng.random() > 0.3 else None
            for _ in range(4)
        ]
        for _ in range(50)
    ]
    for rate in exact_match_rates(LabelMatrix.from_rows(rows)).values():
        assert 0 <= rate <= 1


def test_confusion_worked_examples():
    counts = confusion_counts(LabelMatrix.from_rows([["Res", "Cod", "Cod"]]))
    assert counts == {("Cod", "Res"): 2, ("Cod", "Cod"): 1}
    k = 5
    counts = confusion_counts(LabelMatrix.from_rows([["N"] * k]))
    assert counts == {("N", "N"): k * (k - 1) // 2}


def test_confusion_totals_match_pair_counts():
    rng = np.random.default_rng(9)
    rows = [
        [
            ["a", "b", "c"][int(rng.integers(0, 3))] if rng.random() > 0.25 else None
            for _ in range(4)
        ]
        for _ in range(50)
    ]
    matrix = LabelMatrix.from_rows(rows)
    total = sum(confusion_counts(matrix).values())
    expected = sum(
        len(matrix.unit_values(u)) * (len(matrix.unit_values(u)) - 1) // 2
        for u in matrix.units
    )
    assert total == expected


def test_from_layers_alignment():
    l1 = AnnotatorLayer("a1", "f", masses=(3, 3), micro={1: MicroLabel.NARRATIVE})
    l2 = AnnotatorLayer("a2", "f", masses=(3, 3), micro={1: MicroLabel.FREE})
    matrix = LabelMatrix.from_layers([l1, l2], "micro")
    assert matrix.unit_values(("f", 1)) == ["N", "F"]
    assert matrix.unit_values(("f", 2)) == []
    with pytest.raises(ValueError, match="aligned"):
        LabelMatrix.from_layers(
            [l1, AnnotatorLayer("a3", "f", masses=(2, 4))], "micro"
        )
    with pytest.raises(ValueError, match="field"):
        LabelMatrix.from_layers([l1, l2], "labels")


def test_report_shape():
    report = label_agreement_report(
        LabelMatrix.from_rows([["N", "N"], ["N", "F"], ["R", "R"]]), field="micro"
    )
    assert report.alpha is not None
    assert report.pairable_units == 3
    assert report.label_totals == {"F": 1, "N": 3, "R": 2}
    undef = label_agreement_report(LabelMatrix.from_rows([["N", "N"]]))
    assert undef.alpha is None
    assert "no variation" in undef.alpha_note
