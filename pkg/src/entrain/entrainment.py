"""Team difference and convergence measures over interval series.

The team difference at one temporal interval averages, over all speaker
pairs, the summed per-category differences of the speakers' style
profiles. Unweighted uses the absolute percentage difference |K_i - K_j|
per category; weighted normalizes each category by its combined
frequency, |K_i - K_j| / (K_i + K_j), taken as 0 when both are 0.

Convergence compares two intervals in chronological order,
c[i, j] = d[i] - d[j] for i < j: positive values mean the team grew more
similar. Summarizing all n(n-1)/2 interval pairs yields eight measures
per team: for each weighting, the largest and smallest strictly positive
convergence (absent when no pair converges) and the largest and smallest
magnitude of change.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .lexicon import CategoryProfile, Lexicon, score_categories
from .transcript import DEFAULT_INTERJECTIONS, GameSession, IntervalGrid, segment_intervals

UNWEIGHTED = "unweighted"
WEIGHTED = "weighted"
WEIGHTINGS = (UNWEIGHTED, WEIGHTED)

DEFAULT_INTERVALS = 10


@dataclass(frozen=True)
class TeamDifferenceSeries:
    """Per-interval team differences under both weightings."""

    unweighted: tuple[float, ...]
    weighted: tuple[float, ...]
    team_size: int

    def values(self, weighting: str) -> tuple[float, ...]:
        if weighting == UNWEIGHTED:
            return self.unweighted
        if weighting == WEIGHTED:
            return self.weighted
        raise ValueError(f"unknown weighting {weighting!r}")


@dataclass(frozen=True)
class ConvergenceSummary:
    """Max/Min/absMax/absMin over one weighting's interval-pair matrix.

    max_conv/min_conv are None when no interval pair has strictly
    positive convergence. Each *_pair records the (i, j) intervals that
    produced the value, ties broken by smallest i then smallest j.
    """

    max_conv: float | None
    min_conv: float | None
    abs_max: float
    abs_min: float
    max_pair: tuple[int, int] | None
    min_pair: tuple[int, int] | None
    abs_max_pair: tuple[int, int]
    abs_min_pair: tuple[int, int]


@dataclass(frozen=True)
class ConvergenceMeasures:
    """The eight per-team entrainment measures (four per weighting)."""

    unweighted: ConvergenceSummary
    weighted: ConvergenceSummary

    def summary(self, weighting: str) -> ConvergenceSummary:
        if weighting == UNWEIGHTED:
            return self.unweighted
        if weighting == WEIGHTED:
            return self.weighted
        raise ValueError(f"unknown weighting {weighting!r}")


def kdiff(k_i: float, k_j: float) -> float:
    """Frequency-weighted category difference |k_i - k_j| / (k_i + k_j).

    Defined as 0 when both values are 0; always in [0, 1].
    """
    if k_i < 0 or k_j < 0:
        raise ValueError(f"category percentages must be nonnegative, got ({k_i}, {k_j})")
    if k_i == 0 and k_j == 0:
        return 0.0
    return abs(k_i - k_j) / (k_i + k_j)


def pair_diff_unweighted(p_i: CategoryProfile, p_j: CategoryProfile) -> float:
    """Sum over categories of |K_i - K_j|."""
    if len(p_i.percentages) != len(p_j.percentages):
        raise ValueError(
            f"profiles have {len(p_i.percentages)} vs {len(p_j.percentages)} categories"
        )
    return sum(abs(a - b) for a, b in zip(p_i.percentages, p_j.percentages))


def pair_diff_weighted(p_i: CategoryProfile, p_j: CategoryProfile) -> float:
    """Sum over categories of the weighted difference kdiff(K_i, K_j)."""
    if len(p_i.percentages) != len(p_j.percentages):
        raise ValueError(
            f"profiles have {len(p_i.percentages)} vs {len(p_j.percentages)} categories"
        )
    return sum(kdiff(a, b) for a, b in zip(p_i.percentages, p_j.percentages))


def team_diff(profiles: Sequence[CategoryProfile], weighting: str) -> float:
    """Average pair difference over all ordered speaker pairs.

    The sum over ordered pairs i != j divided by s(s-1); by symmetry this
    equals the mean over unordered pairs.
    """
    size = len(profiles)
    if size < 2:
        raise ValueError(f"team difference needs at least 2 profiles, got {size}")
    pair_diff = pair_diff_unweighted if weighting == UNWEIGHTED else pair_diff_weighted
    if weighting not in WEIGHTINGS:
        raise ValueError(f"unknown weighting {weighting!r}")
    total = 0.0
    for i, prof_i in enumerate(profiles):
        for j, prof_j in enumerate(profiles):
            if i != j:
                total += pair_diff(prof_i, prof_j)
    return total / (size * (size - 1))


def team_diff_series(grid: IntervalGrid, lex: Lexicon) -> TeamDifferenceSeries:
    """Score every speaker's cell per interval and reduce to team differences.

    Speakers silent in an interval contribute all-zero profiles, so every
    interval is defined for every speaker.
    """
    if len(grid.speakers) < 2:
        raise ValueError(f"grid needs at least 2 speakers, got {len(grid.speakers)}")
    unweighted = []
    weighted = []
    for index in range(grid.n):
        profiles = [score_categories(lex, grid.tokens(speaker, index)) for speaker in grid.speakers]
        unweighted.append(team_diff(profiles, UNWEIGHTED))
        weighted.append(team_diff(profiles, WEIGHTED))
    return TeamDifferenceSeries(
        unweighted=tuple(unweighted),
        weighted=tuple(weighted),
        team_size=len(grid.speakers),
    )


def convergence_matrix(series: Sequence[float]) -> dict[tuple[int, int], float]:
    """Upper-triangular convergence values c[i, j] = series[i] - series[j], i < j."""
    n = len(series)
    if n < 2:
        raise ValueError(f"need at least 2 intervals, got {n}")
    return {
        (i, j): series[i] - series[j]
        for i in range(n)
        for j in range(i + 1, n)
    }


def convergence_measures(matrix: Mapping[tuple[int, int], float]) -> ConvergenceSummary:
    """Summarize an interval-pair convergence matrix.

    Max/Min range over strictly positive entries only (None when there
    are none); absMax/absMin range over all magnitudes |c[i, j]|.
    """
    if not matrix:
        raise ValueError("empty convergence matrix")
    max_conv = min_conv = None
    max_pair = min_pair = None
    abs_max = abs_min = None
    abs_max_pair = abs_min_pair = None
    for pair in sorted(matrix):
        value = matrix[pair]
        magnitude = abs(value)
        if abs_max is None or magnitude > abs_max:
            abs_max, abs_max_pair = magnitude, pair
        if abs_min is None or magnitude < abs_min:
            abs_min, abs_min_pair = magnitude, pair
        if value > 0:
            if max_conv is None or value > max_conv:
                max_conv, max_pair = value, pair
            if min_conv is None or value < min_conv:
                min_conv, min_pair = value, pair
    return ConvergenceSummary(
        max_conv=max_conv,
        min_conv=min_conv,
        abs_max=abs_max,
        abs_min=abs_min,
        max_pair=max_pair,
        min_pair=min_pair,
        abs_max_pair=abs_max_pair,
        abs_min_pair=abs_min_pair,
    )


def measure_team(
    session: GameSession,
    lex: Lexicon,
    n: int = DEFAULT_INTERVALS,
    interjections: frozenset[str] = DEFAULT_INTERJECTIONS,
) -> ConvergenceMeasures:
    """Full pipeline for one team: segment, score, and summarize convergence."""
    grid = segment_intervals(session, n, interjections)
    series = team_diff_series(grid, lex)
    return ConvergenceMeasures(
        unweighted=convergence_measures(convergence_matrix(series.unweighted)),
        weighted=convergence_measures(convergence_matrix(series.weighted)),
    )
