"""Shared fixtures: corpus builders and the acceptance summary hook."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import pytest

from entrain.lexicon import load_default_lexicon
from entrain.team_profile import ETHNICITIES
from entrain.transcript import ROLES

SURVEY_HEADER = [
    "speaker_id",
    "team_id",
    "cohesion",
    "satisfaction",
    "potency",
    "shared_cognition",
    "task_conflict",
    "process_conflict",
    "relationship_conflict",
]

_ETHNICITY_WEIGHTS = [0.55, 0.08, 0.08, 0.02, 0.09, 0.02, 0.05, 0.03, 0.08]

_CONTENT_WORDS = [
    "island", "tile", "move", "flood", "card", "water", "treasure", "north",
    "south", "east", "west", "turn", "grab", "fly", "shore", "sandbag",
    "helicopter", "temple", "cave", "garden", "bridge", "okay", "yeah",
]
_FILLERS = ["hmm", "um", "uh"]


def write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def make_corpus(root: Path, n_teams: int = 62, n_three_person: int = 35, seed: int = 7) -> dict[str, Path]:
    """Write a deterministic synthetic corpus (transcripts/roster/survey).

    Mirrors the corpus shape: 3- and 4-person teams, the seven gender
    compositions, ages 18-67, nine ethnicity codes, and Likert 1-5
    survey composites.
    """
    rng = np.random.default_rng(seed)
    lex = load_default_lexicon()
    function_words = sorted(lex.exact_entries)

    transcripts, roster, survey = [], [], []
    for t in range(n_teams):
        team = f"T{t + 1:03d}"
        size = 3 if t < n_three_person else 4
        cycle = (0, 1, 2, 3) if size == 3 else (0, 1, 2, 3, 4)
        n_female = cycle[t % len(cycle)]
        speakers = [f"{team}S{k + 1}" for k in range(size)]
        for k, speaker in enumerate(speakers):
            gender = "female" if k < n_female else "male"
            age = int(rng.integers(18, 68))
            ethnicity = ETHNICITIES[int(rng.choice(len(ETHNICITIES), p=_ETHNICITY_WEIGHTS))]
            roster.append([speaker, team, gender, age, ethnicity])
            base = rng.normal(3.4, 0.5)
            conflict = rng.normal(1.8, 0.4)
            process = [float(np.clip(rng.normal(base, 0.4), 1, 5)) for _ in range(4)]
            conflicts = [float(np.clip(rng.normal(conflict, 0.3), 1, 5)) for _ in range(3)]
            survey.append([speaker, team] + [round(v, 2) for v in process + conflicts])
        n_ipus = int(rng.integers(60, 100))
        duration = int(rng.integers(8 * 60_000, 12 * 60_000))
        starts = np.sort(rng.integers(0, duration - 4000, n_ipus))
        for start in starts:
            speaker_index = int(rng.integers(size))
            length = int(rng.integers(400, 4000))
            words = []
            for _ in range(max(1, int(rng.integers(2, 14)))):
                u = rng.random()
                if u < 0.55:
                    words.append(function_words[int(rng.integers(len(function_words)))])
                elif u < 0.92:
                    words.append(_CONTENT_WORDS[int(rng.integers(len(_CONTENT_WORDS)))])
                else:
                    words.append(_FILLERS[int(rng.integers(len(_FILLERS)))])
            transcripts.append(
                [team, speakers[speaker_index], ROLES[speaker_index], int(start),
                 int(start) + length, " ".join(words)]
            )

    root.mkdir(parents=True, exist_ok=True)
    return {
        "transcripts": write_csv(
            root / "transcripts.csv",
            ["team_id", "speaker_id", "role", "start_ms", "end_ms", "text"],
            transcripts,
        ),
        "roster": write_csv(
            root / "roster.csv", ["speaker_id", "team_id", "gender", "age", "ethnicity"], roster
        ),
        "survey": write_csv(root / "survey.csv", SURVEY_HEADER, survey),
    }


def make_toy_corpus(root: Path) -> dict[str, Path]:
    """Two small teams with hand-written rows, for fast CLI/pipeline tests."""
    transcripts = []
    for team, speakers in (("alpha", ["a1", "a2", "a3"]), ("beta", ["b1", "b2", "b3"])):
        lines = [
            "we should go north now",
            "no I don't think so",
            "okay the water is rising",
            "you take the helicopter card",
            "I have to move east",
            "they are not on the island",
            "we can fly to the temple",
            "that is a very good idea",
        ]
        for i, text in enumerate(lines):
            speaker = speakers[i % 3]
            start = 1000 * i + (0 if team == "alpha" else 500)
            transcripts.append([team, speaker, ROLES[i % 3], start, start + 900, text])
    roster = [
        ["a1", "alpha", "female", 25, "Caucasian"],
        ["a2", "alpha", "male", 31, "EastAsian"],
        ["a3", "alpha", "male", 44, "Caucasian"],
        ["b1", "beta", "female", 22, "Black"],
        ["b2", "beta", "female", 28, "Hispanic"],
        ["b3", "beta", "male", 59, "Caucasian"],
    ]
    survey = [
        ["a1", "alpha", 4.0, 4.2, 3.8, 4.1, 1.5, 1.2, 1.0],
        ["a2", "alpha", 3.6, 3.9, 3.5, 3.7, 2.0, 1.8, 1.4],
        ["a3", "alpha", 4.4, 4.0, 4.2, 4.3, 1.2, 1.0, 1.1],
        ["b1", "beta", 2.9, 3.1, 3.0, 2.8, 2.8, 2.5, 1.9],
        ["b2", "beta", 3.2, 3.0, 2.7, 3.1, 3.1, 2.2, 2.0],
        ["b3", "beta", 2.5, 2.8, 3.3, 2.6, 2.6, 2.9, 1.7],
    ]
    root.mkdir(parents=True, exist_ok=True)
    return {
        "transcripts": write_csv(
            root / "transcripts.csv",
            ["team_id", "speaker_id", "role", "start_ms", "end_ms", "text"],
            transcripts,
        ),
        "roster": write_csv(
            root / "roster.csv", ["speaker_id", "team_id", "gender", "age", "ethnicity"], roster
        ),
        "survey": write_csv(root / "survey.csv", SURVEY_HEADER, survey),
    }


@pytest.fixture(scope="session")
def synthetic_corpus(tmp_path_factory) -> dict[str, Path]:
    return make_corpus(tmp_path_factory.mktemp("corpus62"))


@pytest.fixture()
def toy_corpus(tmp_path) -> dict[str, Path]:
    return make_toy_corpus(tmp_path / "toy")


# one pass/fail line per acceptance criterion at the end of the run
_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance.py" in report.nodeid and "::test_criterion_" in report.nodeid:
        name = report.nodeid.split("::test_criterion_")[-1]
        _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        status = "PASS" if _ACCEPTANCE[name] == "passed" else _ACCEPTANCE[name].upper()
        terminalreporter.write_line(f"criterion {name}: {status}")
