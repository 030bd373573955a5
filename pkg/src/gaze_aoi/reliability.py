"""Inter-coder agreement statistics between two aligned label sequences.

All four statistics (percent agreement, Scott's pi, Cohen's kappa,
Krippendorff's alpha) treat labels as nominal. A None entry marks a unit
one coder did not code; such units pair with nothing and are excluded
from every statistic (with two coders, a unit needs both values to be
pairable).

Chance-corrected statistics share the shape (p_o - p_e) / (1 - p_e) and
differ only in the expected agreement p_e:

* kappa uses each coder's own marginal distribution,
* pi pools both coders' marginals,
* alpha is pi with a small-sample correction (expected disagreement is
  computed over pairs drawn without replacement from the pooled values).

When p_e degenerates to 1 (both coders constant and identical), kappa and
pi are reported as 1 for perfect agreement and 0 otherwise; alpha's
expected disagreement is 0 there, so alpha is undefined and raises.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

MISSING = None


@dataclass(frozen=True)
class ConfusionTable:
    """Category-by-category counts between two coders over pairable units."""

    categories: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]
    n: int

    def row_sums(self) -> list[int]:
        return [sum(row) for row in self.counts]

    def col_sums(self) -> list[int]:
        return [sum(row[j] for row in self.counts) for j in range(len(self.categories))]

    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(len(self.categories)))


def _pairable(a: Sequence[Optional[str]], b: Sequence[Optional[str]]) -> list[tuple[str, str]]:
    if len(a) != len(b):
        raise ValueError(f"label sequences differ in length ({len(a)} vs {len(b)})")
    return [(x, y) for x, y in zip(a, b) if x is not MISSING and y is not MISSING]


def confusion(
    a: Sequence[Optional[str]],
    b: Sequence[Optional[str]],
    categories: Optional[Sequence[str]] = None,
) -> ConfusionTable:
    """Build the confusion table for two equally long label sequences.

    Units where either coder is missing (None) are excluded. Categories
    are inferred from the data (sorted lexicographically) unless a fixed
    list is given, in which case every observed label must belong to it.
    """
    pairs = _pairable(a, b)
    observed = sorted({x for x, _ in pairs} | {y for _, y in pairs})
    if categories is None:
        cats = observed
    else:
        cats = list(categories)
        unknown = [c for c in observed if c not in cats]
        if unknown:
            raise ValueError(f"labels outside the fixed category set: {unknown}")
    index = {c: i for i, c in enumerate(cats)}
    counts = [[0] * len(cats) for _ in cats]
    for x, y in pairs:
        counts[index[x]][index[y]] += 1
    return ConfusionTable(categories=tuple(cats),
                          counts=tuple(tuple(row) for row in counts),
                          n=len(pairs))


def percent_agreement(table: ConfusionTable) -> float:
    """Fraction of units both coders labeled identically."""
    if table.n < 1:
        raise ValueError("agreement undefined for an empty table")
    return table.trace() / table.n


def cohens_kappa(table: ConfusionTable) -> float:
    """Chance-corrected agreement with per-coder marginals."""
    if table.n < 1:
        raise ValueError("kappa undefined for an empty table")
    n = table.n
    p_o = table.trace() / n
    p_e = sum(r * c for r, c in zip(table.row_sums(), table.col_sums())) / (n * n)
    if p_e >= 1.0:
        return 1.0 if p_o >= 1.0 else 0.0
    return (p_o - p_e) / (1.0 - p_e)


def scotts_pi(table: ConfusionTable) -> float:
    """Chance-corrected agreement with pooled marginals."""
    if table.n < 1:
        raise ValueError("pi undefined for an empty table")
    n = table.n
    p_o = table.trace() / n
    rows = table.row_sums()
    cols = table.col_sums()
    p_e = sum(((r + c) / (2.0 * n)) ** 2 for r, c in zip(rows, cols))
    if p_e >= 1.0:
        return 1.0 if p_o >= 1.0 else 0.0
    return (p_o - p_e) / (1.0 - p_e)


def krippendorffs_alpha(a: Sequence[Optional[str]], b: Sequence[Optional[str]]) -> float:
    """Nominal Krippendorff's alpha for two coders.

    Over the n units both coders coded, observed disagreement D_o is the
    fraction of disagreeing units; expected disagreement D_e counts
    mismatched ordered pairs among the N = 2n pooled values, drawn without
    replacement. alpha = 1 - D_o / D_e. Raises when fewer than two units
    are pairable or D_e is 0 (a single pooled value).
    """
    pairs = _pairable(a, b)
    n = len(pairs)
    if n < 2:
        raise ValueError("alpha undefined: fewer than 2 pairable units")
    disagreements = sum(1 for x, y in pairs if x != y)
    d_o = disagreements / n
    values = Counter()
    for x, y in pairs:
        values[x] += 1
        values[y] += 1
    total = 2 * n
    mismatched_pairs = total * total - sum(v * v for v in values.values())
    d_e = mismatched_pairs / (total * (total - 1))
    if d_e == 0:
        raise ValueError("alpha undefined: expected disagreement is zero")
    return 1.0 - d_o / d_e


@dataclass(frozen=True)
class ReliabilityReport:
    """All four agreement statistics over one pair of codings."""

    n: int
    categories: tuple[str, ...]
    agreement: float
    scotts_pi: float
    cohens_kappa: float
    krippendorffs_alpha: float


def reliability_report(
    auto: Sequence[Optional[str]],
    truth: Sequence[Optional[str]],
) -> ReliabilityReport:
    """Bundle all four statistics over a shared inferred category set."""
    table = confusion(auto, truth)
    return ReliabilityReport(
        n=table.n,
        categories=table.categories,
        agreement=percent_agreement(table),
        scotts_pi=scotts_pi(table),
        cohens_kappa=cohens_kappa(table),
        krippendorffs_alpha=krippendorffs_alpha(auto, truth),
    )
