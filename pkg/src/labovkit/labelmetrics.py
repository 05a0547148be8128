"""Label agreement: nominal Krippendorff's alpha, exact-match rates,
and pairwise confusion counts.

Alpha uses the coincidence-matrix construction with the nominal distance
(0 when equal, 1 otherwise), in exact rational arithmetic.  Missing
labels are missing data, never a label value: units with fewer than two
non-missing values are excluded from the coincidence matrix.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Optional, Sequence

from .model import AnnotatorLayer

Unit = tuple[str, int]


class AlphaUndefinedError(ValueError):
    """No variation among pairable values; alpha has no denominator."""


@dataclass(frozen=True)
class LabelMatrix:
    """Units x coders grid of optional label tokens.

    Units are (fragment_id, clause_id) pairs taken from the shared
    reference segmentation; ``values`` holds only the non-missing cells.
    """

    units: tuple[Unit, ...]
    coders: tuple[str, ...]
    values: Mapping[tuple[Unit, str], str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "coders", tuple(self.coders))
        object.__setattr__(self, "values", dict(self.values))
        known_units = set(self.units)
        known_coders = set(self.coders)
        for unit, coder in self.values:
            if unit not in known_units:
                raise ValueError(f"value for unknown unit {unit!r}")
            if coder not in known_coders:
                raise ValueError(f"value for unknown coder {coder!r}")

    def unit_values(self, unit: Unit) -> list[str]:
        return [
            self.values[(unit, coder)]
            for coder in self.coders
            if (unit, coder) in self.values
        ]

    @classmethod
    def from_rows(
        cls, rows: Sequence[Sequence[Optional[str]]], fragment_id: str = "f"
    ) -> "LabelMatrix":
        """Build from per-unit value rows; ``None`` marks missing cells."""
        n_coders = max((len(r) for r in rows), default=0)
        coders = tuple(f"coder{i + 1}" for i in range(n_coders))
        units = tuple((fragment_id, i + 1) for i in range(len(rows)))
        values = {}
        for u, row in enumerate(rows):
            for c, value in enumerate(row):
                if value is not None:
                    values[(units[u], coders[c])] = value
        return cls(units, coders, values)

    @classmethod
    def merge(cls, matrices: Sequence["LabelMatrix"]) -> "LabelMatrix":
        """Pool matrices over disjoint unit sets; coder sets must match."""
        if not matrices:
            raise ValueError("no matrices to merge")
        coders = matrices[0].coders
        units: list[Unit] = []
        values: dict[tuple[Unit, str], str] = {}
        seen: set[Unit] = set()
        for matrix in matrices:
            if tuple(sorted(matrix.coders)) != tuple(sorted(coders)):
                raise ValueError("matrices have different coder sets")
            overlap = seen & set(matrix.units)
            if overlap:
                raise ValueError(f"duplicate units across matrices: {sorted(overlap)[:3]}")
            seen.update(matrix.units)
            units.extend(matrix.units)
            values.update(matrix.values)
        return cls(tuple(units), coders, values)

    @classmethod
    def from_layers(cls, layers: Sequence[AnnotatorLayer], field: str) -> "LabelMatrix":
        """Matrix over one label field of reference-aligned layers."""
        if field not in ("micro", "macro"):
            raise ValueError(f"field must be 'micro' or 'macro', got {field!r}")
        if len(layers) < 2:
            raise ValueError("need at least 2 layers")
        first = layers[0]
        for layer in layers[1:]:
            if layer.fragment_id != first.fragment_id or layer.masses != first.masses:
                raise ValueError(
                    "layers are not aligned to a shared reference segmentation"
                )
        units = tuple((first.fragment_id, i) for i in range(1, first.n_clauses + 1))
        coders = tuple(layer.annotator_id for layer in layers)
        if len(set(coders)) != len(coders):
            raise ValueError("duplicate annotator ids")
        values = {}
        for layer in layers:
            labels: Mapping[int, object] = getattr(layer, field)
            for clause_id, label in labels.items():
                values[((first.fragment_id, clause_id), layer.annotator_id)] = (
                    label.value  # type: ignore[union-attr]
                )
        return cls(units, coders, values)


def krippendorff_alpha_nominal(matrix: LabelMatrix) -> Fraction:
    """Nominal Krippendorff's alpha, exact.

    Built from the coincidence matrix: unit ``u`` with ``m`` values adds
    ``1 / (m - 1)`` per ordered value pair, so the off-diagonal mass is
    ``(m (m - 1) - sum_v k_v (k_v - 1)) / (m - 1)`` and the marginal of
    value ``v`` is its plain count over pairable units.

    Raises ``ValueError`` when no unit has two or more values, and
    :class:`AlphaUndefinedError` when all pairable values are identical
    (expected disagreement is zero).
    """
    if len(matrix.coders) < 2:
        raise ValueError("need at least 2 coders")
    off_diagonal = Fraction(0)
    value_totals: Counter[str] = Counter()
    n = 0
    for unit in matrix.units:
        values = matrix.unit_values(unit)
        m = len(values)
        if m < 2:
            continue
        counts = Counter(values)
        same_ordered_pairs = sum(k * (k - 1) for k in counts.values())
        off_diagonal += Fraction(m * (m - 1) - same_ordered_pairs, m - 1)
        value_totals.update(counts)
        n += m
    if n == 0:
        raise ValueError("no pairable units: every unit has fewer than 2 values")
    expected_off = n * n - sum(t * t for t in value_totals.values())
    if expected_off == 0:
        raise AlphaUndefinedError("alpha undefined: no variation among pairable values")
    observed_disagreement = off_diagonal / n
    expected_disagreement = Fraction(expected_off, n * (n - 1))
    return 1 - observed_disagreement / expected_disagreement


def exact_match_rates(
    matrix: LabelMatrix, denominator: str = "any"
) -> dict[str, Fraction]:
    """P(complete agreement | label chosen), per label.

    ``denominator`` selects which units count as "chosen": ``any`` (at
    least one coder picked the label) or ``majority`` (strictly more
    than half of that unit's non-missing values).  A unit counts as a
    complete agreement when at least two coders gave a value and all of
    them gave this label.  Labels never chosen are absent from the map.
    """
    if denominator not in ("any", "majority"):
        raise ValueError(f"denominator must be 'any' or 'majority', got {denominator!r}")
    chosen: Counter[str] = Counter()
    matched: Counter[str] = Counter()
    for unit in matrix.units:
        values = matrix.unit_values(unit)
        if not values:
            continue
        counts = Counter(values)
        for label, k in counts.items():
            if denominator == "any" or 2 * k > len(values):
                chosen[label] += 1
        if len(values) >= 2 and len(counts) == 1:
            matched[next(iter(counts))] += 1
    return {
        label: Fraction(matched.get(label, 0), chosen[label]) for label in sorted(chosen)
    }


def confusion_counts(matrix: LabelMatrix) -> dict[tuple[str, str], int]:
    """Symmetric label-pair counts over all coder pairs per unit."""
    out: Counter[tuple[str, str]] = Counter()
    for unit in matrix.units:
        values = matrix.unit_values(unit)
        for a, b in combinations(values, 2):
            key = (a, b) if a <= b else (b, a)
            out[key] += 1
    return dict(out)


@dataclass(frozen=True)
class LabelAgreementReport:
    """Alpha, exact-match rates, confusion, and label totals."""

    alpha: Optional[Fraction]
    alpha_note: Optional[str]
    pairable_units: int
    exact_match: dict[str, Fraction]
    confusion: dict[tuple[str, str], int]
    label_totals: dict[str, int]
    params: dict


def label_agreement_report(
    matrix: LabelMatrix, field: str = "", denominator: str = "any"
) -> LabelAgreementReport:
    """Full agreement report for one label matrix."""
    alpha: Optional[Fraction]
    note: Optional[str]
    try:
        alpha, note = krippendorff_alpha_nominal(matrix), None
    except AlphaUndefinedError as exc:
        alpha, note = None, str(exc)
    except ValueError as exc:
        alpha, note = None, str(exc)
    pairable = sum(1 for u in matrix.units if len(matrix.unit_values(u)) >= 2)
    totals: Counter[str] = Counter()
    for unit in matrix.units:
        totals.update(matrix.unit_values(unit))
    params = {
        "field": field,
        "coders": list(matrix.coders),
        "units": len(matrix.units),
        "exact_match_denominator": denominator,
        "distance": "nominal",
    }
    return LabelAgreementReport(
        alpha=alpha,
        alpha_note=note,
        pairable_units=pairable,
        exact_match=exact_match_rates(matrix, denominator),
        confusion=confusion_counts(matrix),
        label_totals=dict(sorted(totals.items())),
        params=params,
    )
