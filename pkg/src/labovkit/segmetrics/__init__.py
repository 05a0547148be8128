"""Segmentation agreement metrics.

Segmentations are mass sequences over atoms (characters of the
normalized transcript).  The edit distance between two segmentations
counts additions (one-sided boundaries) and transpositions (boundaries
paired across the segmentations within ``n_t - 1`` positions), after
boundaries at identical positions are settled as matches.  Among all
pairings it uses the one that maximizes the number of transpositions and,
within that, minimizes the summed offset, so results are deterministic
and symmetric.

Boundary similarity ``B`` rescales the weighted edit cost into [0, 1]:

    B = 1 - (additions + sum(|offset|) / n_t) / (additions + transpositions + matches)

and the Fleiss-style coefficient ``kappa_B`` replaces the raw agreement
term with the mean pairwise ``B``:

    kappa_B = (A_a - A_e) / (1 - A_e)

where ``A_a`` is the mean pairwise ``B`` over coder pairs and fragments
and ``A_e`` is the mean over coder pairs of the product of their pooled
boundary-placement rates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np

from ._dispatch import KERNEL_BACKEND, boundary_match_tables

ATOM_BASIS_CHARACTER = "character"

SeedLike = Union[int, np.random.SeedSequence]


@dataclass(frozen=True)
class Segmentation:
    """Mass sequence over atomic text units.

    ``sum(masses)`` must equal the fragment's atom count; every mass is
    at least 1.  Potential boundary positions number ``atoms - 1``.
    """

    masses: tuple[int, ...]
    atom_basis: str = ATOM_BASIS_CHARACTER

    def __post_init__(self) -> None:
        object.__setattr__(self, "masses", tuple(int(m) for m in self.masses))
        if any(m < 1 for m in self.masses):
            raise ValueError(f"all masses must be >= 1, got {self.masses}")

    @property
    def atoms(self) -> int:
        return sum(self.masses)

    @property
    def potential_boundaries(self) -> int:
        return max(0, self.atoms - 1)

    def boundaries(self) -> tuple[int, ...]:
        """Boundary positions: position p means a cut after atom p."""
        positions = []
        total = 0
        for mass in self.masses[:-1]:
            total += mass
            positions.append(total)
        return tuple(positions)

    @classmethod
    def from_boundaries(
        cls,
        atoms: int,
        boundaries: Iterable[int],
        atom_basis: str = ATOM_BASIS_CHARACTER,
    ) -> "Segmentation":
        positions = sorted(int(p) for p in boundaries)
        if len(set(positions)) != len(positions):
            raise ValueError(f"duplicate boundary positions in {positions}")
        for p in positions:
            if not 1 <= p <= atoms - 1:
                raise ValueError(
                    f"boundary {p} outside valid gaps 1..{atoms - 1} for {atoms} atoms"
                )
        masses = []
        prev = 0
        for p in positions:
            masses.append(p - prev)
            prev = p
        if atoms > 0 or positions:
            masses.append(atoms - prev)
        return cls(tuple(masses), atom_basis)


def to_segmentation(boundaries: Iterable[int], raw_text: str) -> Segmentation:
    """Segmentation of ``raw_text`` with cuts at the given atom gaps.

    ``raw_text`` must already be normalized; atoms are its characters.
    The inverse is :meth:`Segmentation.boundaries`.
    """
    return Segmentation.from_boundaries(len(raw_text), boundaries)


@dataclass(frozen=True)
class BoundaryEditResult:
    """Decomposition of the difference between two segmentations.

    ``transpositions`` holds ``(position, offset)`` pairs: a boundary of
    the first segmentation at ``position`` paired with one of the second
    at ``position + offset``; offsets satisfy ``1 <= |offset| <= n_t - 1``.
    ``raw_distance`` is the weighted cost
    ``additions + sum(|offset|) / n_t``, an exact rational.
    """

    additions: int
    transpositions: tuple[tuple[int, int], ...]
    matches: int
    raw_distance: Fraction
    n_t: int

    @property
    def operations(self) -> int:
        """Unweighted count of edit operations."""
        return self.additions + len(self.transpositions)


def _check_pair(a: Segmentation, b: Segmentation, n_t: int) -> None:
    if a.atoms != b.atoms:
        raise ValueError(f"atom counts differ: {a.atoms} != {b.atoms}")
    if n_t < 2:
        raise ValueError(f"n_t must be >= 2, got {n_t}")


def boundary_edit_distance(
    a: Segmentation, b: Segmentation, n_t: int = 2
) -> BoundaryEditResult:
    """Minimal edit decomposition between two segmentations.

    Boundaries at identical positions are matches; the rest are paired
    into transpositions (maximizing count, then minimizing total offset)
    or counted as additions.  Symmetric in its arguments.
    """
    _check_pair(a, b, n_t)
    set_a = set(a.boundaries())
    set_b = set(b.boundaries())
    matches = len(set_a & set_b)
    only_a = np.array(sorted(set_a - set_b), dtype=np.int64)
    only_b = np.array(sorted(set_b - set_a), dtype=np.int64)
    window = n_t - 1
    pairs_tab, cost_tab = boundary_match_tables(only_a, only_b, window)
    transpositions = _backtrack(only_a, only_b, window, pairs_tab, cost_tab)
    n_pairs = len(transpositions)
    assert n_pairs == int(pairs_tab[0, 0])
    additions = len(only_a) + len(only_b) - 2 * n_pairs
    raw = Fraction(additions) + Fraction(int(cost_tab[0, 0]), n_t)
    return BoundaryEditResult(additions, tuple(transpositions), matches, raw, n_t)


def _backtrack(only_a, only_b, window, pairs_tab, cost_tab) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    i = j = 0
    n, m = len(only_a), len(only_b)
    while i < n and j < m:
        d = abs(int(only_a[i]) - int(only_b[j]))
        if (
            d <= window
            and pairs_tab[i, j] == pairs_tab[i + 1, j + 1] + 1
            and cost_tab[i, j] == cost_tab[i + 1, j + 1] + d
        ):
            out.append((int(only_a[i]), int(only_b[j]) - int(only_a[i])))
            i += 1
            j += 1
        elif pairs_tab[i, j] == pairs_tab[i + 1, j] and cost_tab[i, j] == cost_tab[i + 1, j]:
            i += 1
        else:
            j += 1
    return out


def boundary_similarity(a: Segmentation, b: Segmentation, n_t: int = 2) -> Fraction:
    """Boundary similarity in [0, 1]; 1 when both carry no boundaries."""
    result = boundary_edit_distance(a, b, n_t)
    return similarity_from_result(result)


def similarity_from_result(result: BoundaryEditResult) -> Fraction:
    denominator = result.additions + len(result.transpositions) + result.matches
    if denominator == 0:
        return Fraction(1)
    return 1 - result.raw_distance / denominator


class PairwiseB(NamedTuple):
    coder_a: str
    coder_b: str
    fragment_id: str
    b: Fraction
    raw_distance: Fraction
    potential_boundaries: int


@dataclass(frozen=True)
class SegAgreementReport:
    """Segmentation agreement over a corpus, with parameter provenance."""

    pairwise_b: tuple[PairwiseB, ...]
    mean_b: Fraction
    kappa_b: Optional[Fraction]
    kappa_note: Optional[str]
    bed_per_100: Optional[Fraction]
    bed_per_100_by_fragment: Optional[dict[str, Fraction]]
    params: dict


def fleiss_kappa_b(
    layers_by_fragment: Mapping[str, Mapping[str, Segmentation]],
    n_t: int = 2,
    per_fragment: bool = False,
) -> SegAgreementReport:
    """Chance-corrected multi-coder segmentation agreement.

    ``layers_by_fragment`` maps fragment id to a mapping of coder id to
    that coder's segmentation; every fragment must carry the same coder
    set (at least two) and equal atom counts across its layers.
    """
    if not layers_by_fragment:
        raise ValueError("no fragments given")
    fragment_ids = sorted(layers_by_fragment)
    coders = sorted(layers_by_fragment[fragment_ids[0]])
    if len(coders) < 2:
        raise ValueError(f"need at least 2 coders, got {len(coders)}")
    for fid in fragment_ids:
        if sorted(layers_by_fragment[fid]) != coders:
            raise ValueError(f"fragment {fid!r} has a different coder set")
        atom_counts = {seg.atoms for seg in layers_by_fragment[fid].values()}
        if len(atom_counts) > 1:
            raise ValueError(f"fragment {fid!r} layers disagree on atom count")

    pairwise: list[PairwiseB] = []
    raw_total = Fraction(0)
    potential_pair_total = 0
    raw_by_fragment: dict[str, Fraction] = {fid: Fraction(0) for fid in fragment_ids}
    potential_by_fragment: dict[str, int] = {}
    for fid in fragment_ids:
        layers = layers_by_fragment[fid]
        potential = next(iter(layers.values())).potential_boundaries
        potential_by_fragment[fid] = potential
        for ca, cb in combinations(coders, 2):
            result = boundary_edit_distance(layers[ca], layers[cb], n_t)
            b = similarity_from_result(result)
            pairwise.append(PairwiseB(ca, cb, fid, b, result.raw_distance, potential))
            raw_total += result.raw_distance
            potential_pair_total += potential
            raw_by_fragment[fid] += result.raw_distance

    observed = sum(p.b for p in pairwise) / len(pairwise)

    total_potential = sum(potential_by_fragment.values())
    placement = {
        coder: Fraction(
            sum(len(layers_by_fragment[fid][coder].boundaries()) for fid in fragment_ids),
            total_potential,
        )
        if total_potential
        else Fraction(0)
        for coder in coders
    }
    pair_list = list(combinations(coders, 2))
    expected = sum(placement[ca] * placement[cb] for ca, cb in pair_list) / len(pair_list)

    kappa: Optional[Fraction]
    note: Optional[str]
    if all(rate == 0 for rate in placement.values()):
        kappa, note = None, "degenerate: no coder placed any boundary"
    elif expected == 1:
        kappa, note = None, "undefined: expected agreement equals 1"
    else:
        kappa, note = (observed - expected) / (1 - expected), None

    bed_per_100 = (
        Fraction(100) * raw_total / potential_pair_total if potential_pair_total else None
    )
    by_fragment = None
    if per_fragment:
        n_pairs = len(pair_list)
        by_fragment = {
            fid: (
                Fraction(100) * raw_by_fragment[fid] / (potential_by_fragment[fid] * n_pairs)
                if potential_by_fragment[fid]
                else Fraction(0)
            )
            for fid in fragment_ids
        }

    params = {
        "n_t": n_t,
        "atom_basis": ATOM_BASIS_CHARACTER,
        "coders": coders,
        "fragments": fragment_ids,
        "bed_pooling": "global",
    }
    return SegAgreementReport(
        pairwise_b=tuple(pairwise),
        mean_b=observed,
        kappa_b=kappa,
        kappa_note=note,
        bed_per_100=bed_per_100,
        bed_per_100_by_fragment=by_fragment,
        params=params,
    )


def random_segmentation(atoms: int, boundary_count: int, seed: SeedLike) -> Segmentation:
    """Uniform random segmentation with exactly ``boundary_count`` cuts.

    Positions are drawn without replacement from the ``atoms - 1``
    potential gaps; deterministic for a given seed.
    """
    if atoms < 1:
        raise ValueError(f"atoms must be >= 1, got {atoms}")
    if not 0 <= boundary_count <= atoms - 1:
        raise ValueError(
            f"boundary_count {boundary_count} outside 0..{atoms - 1} for {atoms} atoms"
        )
    rng = np.random.default_rng(seed)
    positions = rng.choice(atoms - 1, size=boundary_count, replace=False) + 1
    return Segmentation.from_boundaries(atoms, (int(p) for p in positions))


class BaselineFragment(NamedTuple):
    """Atom count and target boundary count for one fragment."""

    fragment_id: str
    atoms: int
    boundary_count: int


class BaselineRun(NamedTuple):
    seed: int
    kappa_b: Optional[Fraction]
    mean_b: Fraction
    bed_per_100: Optional[Fraction]


@dataclass(frozen=True)
class BaselineReport:
    """Distribution of kappa_B / BED over random-vs-random seed pairs."""

    runs: tuple[BaselineRun, ...]
    kappa_mean: Optional[Fraction]
    kappa_min: Optional[Fraction]
    kappa_max: Optional[Fraction]
    bed_mean: Optional[Fraction]
    bed_min: Optional[Fraction]
    bed_max: Optional[Fraction]
    params: dict


def random_baseline_experiment(
    fragments: Sequence[BaselineFragment],
    seeds: Sequence[int],
    n_t: int = 2,
) -> BaselineReport:
    """Agreement between two independent random segmenters.

    Every seed drives one experiment: a pair of random segmentations per
    fragment, matched to the fragment's boundary count, scored with the
    same kappa_B machinery as human layers.
    """
    if not fragments:
        raise ValueError("no fragments given")
    runs: list[BaselineRun] = []
    for seed in seeds:
        root = np.random.SeedSequence(entropy=int(seed))
        coder_roots = root.spawn(2)
        coder_frag_seeds = [r.spawn(len(fragments)) for r in coder_roots]
        layers: dict[str, dict[str, Segmentation]] = {}
        for k, frag in enumerate(fragments):
            layers[frag.fragment_id] = {
                "random-a": random_segmentation(
                    frag.atoms, frag.boundary_count, coder_frag_seeds[0][k]
                ),
                "random-b": random_segmentation(
                    frag.atoms, frag.boundary_count, coder_frag_seeds[1][k]
                ),
            }
        report = fleiss_kappa_b(layers, n_t=n_t)
        runs.append(
            BaselineRun(int(seed), report.kappa_b, report.mean_b, report.bed_per_100)
        )

    kappas = [r.kappa_b for r in runs if r.kappa_b is not None]
    beds = [r.bed_per_100 for r in runs if r.bed_per_100 is not None]
    params = {
        "n_t": n_t,
        "atom_basis": ATOM_BASIS_CHARACTER,
        "seeds": [int(s) for s in seeds],
        "fragments": [
            {"fragment_id": f.fragment_id, "atoms": f.atoms, "boundaries": f.boundary_count}
            for f in fragments
        ],
    }
    return BaselineReport(
        runs=tuple(runs),
        kappa_mean=sum(kappas) / len(kappas) if kappas else None,
        kappa_min=min(kappas) if kappas else None,
        kappa_max=max(kappas) if kappas else None,
        bed_mean=sum(beds) / len(beds) if beds else None,
        bed_min=min(beds) if beds else None,
        bed_max=max(beds) if beds else None,
        params=params,
    )


def mean_boundary_count(segmentations: Sequence[Segmentation]) -> int:
    """Mean boundary count over layers, rounded half up to an integer."""
    if not segmentations:
        raise ValueError("no segmentations given")
    mean = Fraction(sum(len(s.boundaries()) for s in segmentations), len(segmentations))
    return int(mean + Fraction(1, 2)) if mean >= 0 else 0


__all__ = [
    "ATOM_BASIS_CHARACTER",
    "KERNEL_BACKEND",
    "Segmentation",
    "BoundaryEditResult",
    "boundary_edit_distance",
    "boundary_similarity",
    "similarity_from_result",
    "to_segmentation",
    "PairwiseB",
    "SegAgreementReport",
    "fleiss_kappa_b",
    "random_segmentation",
    "BaselineFragment",
    "BaselineRun",
    "BaselineReport",
    "random_baseline_experiment",
    "mean_boundary_count",
]
