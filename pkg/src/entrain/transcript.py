"""Transcript ingestion, preprocessing, and temporal segmentation.

Transcripts arrive as CSV rows of inter-pausal units (IPUs): one
timestamped utterance per speaker turn segment. Preprocessing lowercases,
strips punctuation (keeping apostrophes and hyphens inside tokens), and
drops interjections; a game is then split into n equal-width temporal
intervals, each IPU assigned whole to the interval holding its midpoint.
"""

from __future__ import annotations

import csv
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DataError, ParseError

ROLES = ("Engineer", "Messenger", "Pilot", "Explorer")

DEFAULT_INTERJECTIONS = frozenset({"hmm", "mm", "mhm", "uh", "um", "huh", "uh-huh"})

TRANSCRIPT_COLUMNS = ("team_id", "speaker_id", "role", "start_ms", "end_ms", "text")

# kept during punctuation stripping; apostrophes/hyphens at token edges
# are trimmed afterwards so quoting does not leak into tokens
_KEPT_CHARS = frozenset("'-")


@dataclass(frozen=True)
class IpuRecord:
    """One inter-pausal unit: a timestamped raw utterance."""

    team_id: str
    speaker_id: str
    role: str
    start_ms: int
    end_ms: int
    text: str


@dataclass(frozen=True)
class GameSession:
    """All IPUs of one team's game, sorted by start time."""

    team_id: str
    ipus: tuple[IpuRecord, ...]
    speakers: frozenset[str]


@dataclass(frozen=True)
class IntervalGrid:
    """Per-speaker token sequences over n equal temporal intervals.

    ``boundaries`` has n+1 strictly increasing timestamps spanning the
    observed IPU extent; ``cells`` maps (speaker_id, interval_index) to
    the tokens spoken there (missing cells are empty).
    """

    n: int
    boundaries: tuple[float, ...]
    speakers: tuple[str, ...]
    cells: Mapping[tuple[str, int], tuple[str, ...]]

    def tokens(self, speaker: str, index: int) -> tuple[str, ...]:
        return self.cells.get((speaker, index), ())


def preprocess(text: str, interjections: frozenset[str] = DEFAULT_INTERJECTIONS) -> list[str]:
    """Raw utterance -> clean lowercase tokens.

    Punctuation is deleted (apostrophes and hyphens survive inside
    tokens, so contractions and forms like "uh-huh" stay whole), the
    result is whitespace-tokenized, and interjection tokens are removed.
    """
    text = text.replace("’", "'").lower()
    cleaned = "".join(ch for ch in text if ch.isalnum() or ch.isspace() or ch in _KEPT_CHARS)
    tokens = []
    for raw in cleaned.split():
        token = raw.strip("'-")
        if token and token not in interjections:
            tokens.append(token)
    return tokens


def parse_transcripts(source: Iterable[str], name: str | None = None) -> list[GameSession]:
    """Parse a transcript CSV into one GameSession per team.

    Expects a header row with columns team_id, speaker_id, role,
    start_ms, end_ms, text (RFC-4180 quoting). Raises ParseError naming
    the row on a missing column, a non-integer or negative timestamp,
    end_ms <= start_ms, an unknown role, or an empty raw utterance.
    """
    reader = csv.DictReader(source)
    fieldnames = reader.fieldnames or []
    missing = [col for col in TRANSCRIPT_COLUMNS if col not in fieldnames]
    if missing:
        raise ParseError(f"missing column(s): {', '.join(missing)}", name, 1)

    by_team: dict[str, list[IpuRecord]] = {}
    for row in reader:
        lineno = reader.line_num
        team_id = (row["team_id"] or "").strip()
        speaker_id = (row["speaker_id"] or "").strip()
        role = (row["role"] or "").strip()
        if not team_id:
            raise ParseError("empty team_id", name, lineno)
        if not speaker_id:
            raise ParseError("empty speaker_id", name, lineno)
        if role not in ROLES:
            raise ParseError(f"unknown role {role!r}; expected one of {', '.join(ROLES)}", name, lineno)
        try:
            start_ms = int(row["start_ms"])
            end_ms = int(row["end_ms"])
        except (TypeError, ValueError):
            raise ParseError(
                f"non-integer timestamp (start_ms={row['start_ms']!r}, end_ms={row['end_ms']!r})",
                name,
                lineno,
            ) from None
        if start_ms < 0:
            raise ParseError(f"negative start_ms {start_ms}", name, lineno)
        if end_ms <= start_ms:
            raise ParseError(f"end_ms {end_ms} must exceed start_ms {start_ms}", name, lineno)
        text = row["text"]
        if text is None or not text.strip():
            raise ParseError("empty utterance text", name, lineno)
        by_team.setdefault(team_id, []).append(
            IpuRecord(team_id, speaker_id, role, start_ms, end_ms, text)
        )

    sessions = []
    for team_id in sorted(by_team):
        ipus = sorted(by_team[team_id], key=lambda r: (r.start_ms, r.speaker_id, r.end_ms))
        speakers = frozenset(r.speaker_id for r in ipus)
        sessions.append(GameSession(team_id=team_id, ipus=tuple(ipus), speakers=speakers))
    return sessions


def load_transcripts(path: str | Path) -> list[GameSession]:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as handle:
        return parse_transcripts(handle, name=str(path))


def concatenate_speaker(
    session: GameSession,
    speaker: str,
    interjections: frozenset[str] = DEFAULT_INTERJECTIONS,
) -> list[str]:
    """All of a speaker's preprocessed tokens in chronological order."""
    if speaker not in session.speakers:
        raise DataError(f"unknown speaker {speaker!r} in team {session.team_id!r}")
    tokens: list[str] = []
    for ipu in session.ipus:
        if ipu.speaker_id == speaker:
            tokens.extend(preprocess(ipu.text, interjections))
    return tokens


def segment_intervals(
    session: GameSession,
    n: int,
    interjections: frozenset[str] = DEFAULT_INTERJECTIONS,
) -> IntervalGrid:
    """Split a session into n equal temporal intervals of tokens.

    Boundaries span the observed extent (earliest IPU start to latest
    IPU end). Each IPU lands whole in the interval containing its
    midpoint (start+end)/2; a midpoint exactly on a boundary goes to the
    earlier interval.
    """
    if n < 2:
        raise ValueError(f"interval count must be at least 2, got {n}")
    if not session.ipus:
        raise ValueError(f"team {session.team_id!r} has no IPUs")

    start = min(ipu.start_ms for ipu in session.ipus)
    end = max(ipu.end_ms for ipu in session.ipus)
    span = end - start
    boundaries = tuple(start + span * i / n for i in range(n + 1))

    cells: dict[tuple[str, int], list[str]] = {}
    for ipu in session.ipus:
        midpoint = (ipu.start_ms + ipu.end_ms) / 2
        index = bisect_left(boundaries, midpoint) - 1
        index = min(max(index, 0), n - 1)
        tokens = preprocess(ipu.text, interjections)
        if tokens:
            cells.setdefault((ipu.speaker_id, index), []).extend(tokens)

    return IntervalGrid(
        n=n,
        boundaries=boundaries,
        speakers=tuple(sorted(session.speakers)),
        cells={key: tuple(toks) for key, toks in cells.items()},
    )


def load_interjections(path: str | Path) -> frozenset[str]:
    """Read an interjection list: one lowercase token per line, '#' comments."""
    path = Path(path)
    tokens = set()
    with path.open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line and not line.startswith("#"):
                tokens.add(line.lower())
    return frozenset(tokens)
