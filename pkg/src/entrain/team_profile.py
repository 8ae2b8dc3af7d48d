"""Team characteristics: size, gender composition, and diversity indices.

Categorical diversity (gender, ethnicity) uses Blau's heterogeneity
index 1 - sum(p_k^2); continuous age diversity uses the population
standard deviation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ParseError

GENDERS = ("female", "male")

ETHNICITIES = (
    "Caucasian",
    "EastAsian",
    "SouthAsian",
    "PacificIslander",
    "Black",
    "NativeAmerican",
    "Hispanic",
    "MiddleEastern",
    "MultipleEthnicity",
)

AGE_MIN, AGE_MAX = 18, 120

ROSTER_COLUMNS = ("speaker_id", "team_id", "gender", "age", "ethnicity")

# the seven gender-composition conditions (% female) observed in 3- and
# 4-person teams; 33 and 66 stand for 1/3 and 2/3
FEMALE_BUCKETS = (0, 25, 33, 50, 66, 75, 100)
_BUCKET_TOLERANCE = 1.0


@dataclass(frozen=True)
class MemberRecord:
    speaker_id: str
    team_id: str
    gender: str
    age: int
    ethnicity: str


@dataclass(frozen=True)
class TeamCharacteristics:
    team_size: int
    female_pct: float
    gender_blau: float
    ethnic_blau: float
    age_sd: float


def blau_index(proportions: Sequence[float]) -> float:
    """Blau's heterogeneity index 1 - sum(p_k^2) for category proportions."""
    if any(p < 0 for p in proportions):
        raise ValueError("proportions must be nonnegative")
    total = sum(proportions)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"proportions must sum to 1, got {total}")
    return 1.0 - sum(p * p for p in proportions)


def age_diversity(ages: Sequence[float]) -> float:
    """Population standard deviation of member ages (divisor N)."""
    if not ages:
        raise ValueError("need at least one age")
    mean = sum(ages) / len(ages)
    return math.sqrt(sum((a - mean) ** 2 for a in ages) / len(ages))


def characterize(members: Sequence[MemberRecord]) -> TeamCharacteristics:
    """Compute all five characteristics for one team's members."""
    if len(members) < 2:
        raise ValueError(f"need at least 2 members, got {len(members)}")
    team_ids = {m.team_id for m in members}
    if len(team_ids) != 1:
        raise ValueError(f"members span multiple teams: {sorted(team_ids)}")
    size = len(members)
    females = sum(1 for m in members if m.gender == "female")
    gender_counts: dict[str, int] = {}
    ethnic_counts: dict[str, int] = {}
    for m in members:
        gender_counts[m.gender] = gender_counts.get(m.gender, 0) + 1
        ethnic_counts[m.ethnicity] = ethnic_counts.get(m.ethnicity, 0) + 1
    return TeamCharacteristics(
        team_size=size,
        female_pct=100.0 * females / size,
        gender_blau=blau_index([c / size for c in gender_counts.values()]),
        ethnic_blau=blau_index([c / size for c in ethnic_counts.values()]),
        age_sd=age_diversity([m.age for m in members]),
    )


def female_bucket(female_pct: float) -> int | None:
    """Nearest gender-composition condition within 1 point, else None."""
    best = min(FEMALE_BUCKETS, key=lambda b: abs(female_pct - b))
    return best if abs(female_pct - best) <= _BUCKET_TOLERANCE else None


def parse_roster(source: Iterable[str], name: str | None = None) -> list[MemberRecord]:
    """Parse a roster CSV (speaker_id, team_id, gender, age, ethnicity)."""
    reader = csv.DictReader(source)
    fieldnames = reader.fieldnames or []
    missing = [col for col in ROSTER_COLUMNS if col not in fieldnames]
    if missing:
        raise ParseError(f"missing column(s): {', '.join(missing)}", name, 1)
    members = []
    for row in reader:
        lineno = reader.line_num
        speaker_id = (row["speaker_id"] or "").strip()
        team_id = (row["team_id"] or "").strip()
        if not speaker_id or not team_id:
            raise ParseError("empty speaker_id or team_id", name, lineno)
        gender = (row["gender"] or "").strip()
        if gender not in GENDERS:
            raise ParseError(f"unknown gender {gender!r}; expected one of {', '.join(GENDERS)}", name, lineno)
        ethnicity = (row["ethnicity"] or "").strip()
        if ethnicity not in ETHNICITIES:
            raise ParseError(f"unknown ethnicity {ethnicity!r}", name, lineno)
        try:
            age = int(row["age"])
        except (TypeError, ValueError):
            raise ParseError(f"non-integer age {row['age']!r}", name, lineno) from None
        if not AGE_MIN <= age <= AGE_MAX:
            raise ParseError(f"age {age} outside [{AGE_MIN}, {AGE_MAX}]", name, lineno)
        members.append(MemberRecord(speaker_id, team_id, gender, age, ethnicity))
    return sorted(members, key=lambda m: (m.team_id, m.speaker_id))


def load_roster(path: str | Path) -> list[MemberRecord]:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as handle:
        return parse_roster(handle, name=str(path))
