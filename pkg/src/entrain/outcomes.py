"""Perceived team social outcomes from post-game survey scales.

Four team-process scales (cohesion, satisfaction, potency, shared
cognition) are averaged to team level, z-scored across teams, and
combined into one composite; the three conflict scales stay separate as
plain team means. Cronbach's alpha over the z-scored process scales is
reported as a reliability check (warned about below 0.7, never gating).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError

log = logging.getLogger(__name__)

PROCESS_SCALES = ("cohesion", "satisfaction", "potency", "shared_cognition")
CONFLICT_SCALES = ("task_conflict", "process_conflict", "relationship_conflict")
SCALES = PROCESS_SCALES + CONFLICT_SCALES

SURVEY_COLUMNS = ("speaker_id", "team_id") + SCALES

DEFAULT_SCALE_MIN = 1.0
DEFAULT_SCALE_MAX = 5.0

ALPHA_WARN_THRESHOLD = 0.7


@dataclass(frozen=True)
class SurveyResponse:
    speaker_id: str
    team_id: str
    scores: dict[str, float]


@dataclass(frozen=True)
class TeamOutcomes:
    team_id: str
    team_processes: float
    task_conflict: float
    process_conflict: float
    relationship_conflict: float


def parse_survey(
    source: Iterable[str],
    name: str | None = None,
    scale_min: float = DEFAULT_SCALE_MIN,
    scale_max: float = DEFAULT_SCALE_MAX,
) -> list[SurveyResponse]:
    """Parse survey CSV rows of per-respondent scale composites."""
    reader = csv.DictReader(source)
    fieldnames = reader.fieldnames or []
    missing = [col for col in SURVEY_COLUMNS if col not in fieldnames]
    if missing:
        raise ParseError(f"missing column(s): {', '.join(missing)}", name, 1)
    responses = []
    for row in reader:
        lineno = reader.line_num
        speaker_id = (row["speaker_id"] or "").strip()
        team_id = (row["team_id"] or "").strip()
        if not speaker_id or not team_id:
            raise ParseError("empty speaker_id or team_id", name, lineno)
        scores = {}
        for scale in SCALES:
            try:
                value = float(row[scale])
            except (TypeError, ValueError):
                raise ParseError(f"non-numeric {scale} score {row[scale]!r}", name, lineno) from None
            if not scale_min <= value <= scale_max:
                raise ParseError(
                    f"{scale} score {value} outside [{scale_min}, {scale_max}]", name, lineno
                )
            scores[scale] = value
        responses.append(SurveyResponse(speaker_id, team_id, scores))
    return responses


def load_survey(
    path: str | Path,
    scale_min: float = DEFAULT_SCALE_MIN,
    scale_max: float = DEFAULT_SCALE_MAX,
) -> list[SurveyResponse]:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as handle:
        return parse_survey(handle, name=str(path), scale_min=scale_min, scale_max=scale_max)


def team_scale_means(responses: Sequence[SurveyResponse]) -> dict[str, dict[str, float]]:
    """Per-team arithmetic mean of each scale, keyed by team_id."""
    if not responses:
        raise ValueError("no survey responses")
    by_team: dict[str, list[SurveyResponse]] = {}
    for resp in responses:
        by_team.setdefault(resp.team_id, []).append(resp)
    means = {}
    for team_id in sorted(by_team):
        group = by_team[team_id]
        means[team_id] = {
            scale: sum(r.scores[scale] for r in group) / len(group) for scale in SCALES
        }
    return means


def cronbach_alpha(items: np.ndarray) -> float:
    """Cronbach's alpha for a (units x items) score matrix.

    (k/(k-1)) * (1 - sum of item variances / variance of item sums),
    population variances throughout.
    """
    items = np.asarray(items, dtype=float)
    if items.ndim != 2:
        raise ValueError("items must be a 2-D matrix")
    n, k = items.shape
    if k < 2:
        raise ValueError(f"need at least 2 items, got {k}")
    if n < 2:
        raise ValueError(f"need at least 2 rows, got {n}")
    total_var = items.sum(axis=1).var()
    if total_var == 0:
        raise ValueError("zero variance in item totals")
    return (k / (k - 1)) * (1.0 - items.var(axis=0).sum() / total_var)


def zscore_composite(scales: np.ndarray) -> np.ndarray:
    """Average of per-column z-scores (population SD) for each row."""
    scales = np.asarray(scales, dtype=float)
    if scales.ndim != 2:
        raise ValueError("scales must be a 2-D matrix")
    sd = scales.std(axis=0)
    if np.any(sd == 0):
        flat = [i for i, s in enumerate(sd) if s == 0]
        raise ValueError(f"zero variance in scale column(s) {flat}")
    z = (scales - scales.mean(axis=0)) / sd
    return z.mean(axis=1)


def compute_outcomes(responses: Sequence[SurveyResponse]) -> tuple[list[TeamOutcomes], float]:
    """Aggregate responses into per-team outcomes plus the process-scale alpha.

    Returns outcomes sorted by team_id and Cronbach's alpha computed
    across teams on the four z-scored process-scale composites.
    """
    means = team_scale_means(responses)
    team_ids = sorted(means)
    process = np.array([[means[t][scale] for scale in PROCESS_SCALES] for t in team_ids])
    composite = zscore_composite(process)
    z = (process - process.mean(axis=0)) / process.std(axis=0)
    alpha = cronbach_alpha(z)
    if alpha < ALPHA_WARN_THRESHOLD:
        log.warning(
            "team-process scales have Cronbach's alpha %.3f (< %.1f); composite built anyway",
            alpha,
            ALPHA_WARN_THRESHOLD,
        )
    outcomes = [
        TeamOutcomes(
            team_id=team_id,
            team_processes=float(composite[i]),
            task_conflict=means[team_id]["task_conflict"],
            process_conflict=means[team_id]["process_conflict"],
            relationship_conflict=means[team_id]["relationship_conflict"],
        )
        for i, team_id in enumerate(team_ids)
    ]
    return outcomes, float(alpha)
