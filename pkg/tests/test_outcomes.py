import io

import numpy as np
import pytest

from entrain.errors import ParseError
from entrain.outcomes import (
    PROCESS_SCALES,
    SCALES,
    SurveyResponse,
    compute_outcomes,
    cronbach_alpha,
    parse_survey,
    team_scale_means,
    zscore_composite,
)

SURVEY_HEADER = (
    "speaker_id,team_id,cohesion,satisfaction,potency,shared_cognition,"
    "task_conflict,process_conflict,relationship_conflict\n"
)


def response(speaker, team, values):
    return SurveyResponse(speaker, team, dict(zip(SCALES, values)))


def test_team_scale_means_single_respondent():
    resp = response("s1", "t1", [4, 3, 5, 4, 2, 1, 1])
    means = team_scale_means([resp])
    assert means["t1"] == resp.scores


def test_team_scale_means_pair():
    responses = [
        response("s1", "t1", [1, 1, 1, 1, 1, 1, 1]),
        response("s2", "t1", [3, 3, 3, 3, 3, 3, 3]),
    ]
    assert team_scale_means(responses)["t1"]["task_conflict"] == 2.0


def test_team_scale_means_matches_groupby_oracle():
    rng = np.random.default_rng(21)
    responses = []
    oracle: dict[str, list] = {}
    for t in range(15):
        team = f"t{t:02d}"
        for s in range(int(rng.integers(1, 5))):
            values = rng.uniform(1, 5, size=7)
            responses.append(response(f"{team}s{s}", team, values))
            oracle.setdefault(team, []).append(values)
    means = team_scale_means(responses)
    for team, rows in oracle.items():
        expected = np.mean(rows, axis=0)
        got = [means[team][scale] for scale in SCALES]
        assert got == pytest.approx(list(expected), rel=1e-12)


def test_cronbach_alpha_identical_items():
    rng = np.random.default_rng(22)
    col = rng.uniform(1, 5, size=40)
    items = np.column_stack([col, col, col, col])
    assert cronbach_alpha(items) == pytest.approx(1.0, abs=1e-12)


def test_cronbach_alpha_independent_items_near_zero():
    rng = np.random.default_rng(23)
    items = rng.normal(size=(20_000, 2))
    assert abs(cronbach_alpha(items)) < 0.1


def test_cronbach_alpha_three_item_fixture():
    # 10 units x 3 items; oracle is the formula evaluated with plain loops
    items = np.array(
        [
            [3, 4, 3],
            [4, 5, 4],
            [3, 4, 4],
            [3, 3, 2],
            [3, 4, 4],
            [4, 5, 5],
            [2, 3, 3],
            [3, 4, 4],
            [3, 5, 4],
            [3, 3, 2],
        ],
        dtype=float,
    )

    def pvar(xs):
        mean = sum(xs) / len(xs)
        return sum((x - mean) ** 2 for x in xs) / len(xs)

    k = 3
    item_vars = sum(pvar([row[j] for row in items]) for j in range(k))
    total_var = pvar([sum(row) for row in items])
    expected = (k / (k - 1)) * (1 - item_vars / total_var)
    assert cronbach_alpha(items) == pytest.approx(expected, rel=1e-12)


def test_cronbach_alpha_preconditions():
    with pytest.raises(ValueError, match="at least 2 items"):
        cronbach_alpha(np.ones((5, 1)))
    with pytest.raises(ValueError, match="at least 2 rows"):
        cronbach_alpha(np.ones((1, 3)))
    with pytest.raises(ValueError, match="zero variance"):
        cronbach_alpha(np.ones((5, 3)))


def test_cronbach_alpha_shift_invariant():
    rng = np.random.default_rng(24)
    items = rng.uniform(1, 5, size=(30, 4))
    shifted = items.copy()
    shifted[:, 2] += 11.0
    assert cronbach_alpha(shifted) == pytest.approx(cronbach_alpha(items), rel=1e-12)


def test_zscore_composite_degenerate_and_centering():
    with pytest.raises(ValueError, match="zero variance"):
        zscore_composite(np.ones((4, 4)))
    rng = np.random.default_rng(25)
    # third row is the mean of the first two, hence exactly the column
    # means of the full matrix: its composite must be 0
    first, second = rng.uniform(1, 5, size=(2, 4))
    scales = np.vstack([first, second, (first + second) / 2.0])
    composite = zscore_composite(scales)
    assert composite[2] == pytest.approx(0.0, abs=1e-12)


def test_zscore_composite_matches_two_step_oracle():
    rng = np.random.default_rng(26)
    scales = rng.uniform(1, 5, size=(5, 4))
    z = (scales - scales.mean(axis=0)) / scales.std(axis=0)
    expected = z.mean(axis=1)
    assert zscore_composite(scales) == pytest.approx(list(expected), rel=1e-12)


def test_zscore_composite_affine_invariance():
    rng = np.random.default_rng(27)
    scales = rng.uniform(1, 5, size=(8, 4))
    transformed = scales.copy()
    transformed[:, 0] = 3.0 * transformed[:, 0] + 2.0
    transformed[:, 3] = 0.5 * transformed[:, 3] - 1.0
    assert zscore_composite(transformed) == pytest.approx(
        list(zscore_composite(scales)), abs=1e-12
    )


def test_compute_outcomes_wiring():
    rng = np.random.default_rng(28)
    responses = []
    for t in range(10):
        team = f"t{t:02d}"
        for s in range(3):
            responses.append(response(f"{team}s{s}", team, rng.uniform(1, 5, size=7)))
    outcomes, alpha = compute_outcomes(responses)
    assert [o.team_id for o in outcomes] == sorted({r.team_id for r in responses})
    composite = np.array([o.team_processes for o in outcomes])
    assert composite.mean() == pytest.approx(0.0, abs=1e-9)
    assert alpha <= 1.0
    means = team_scale_means(responses)
    for outcome in outcomes:
        assert outcome.task_conflict == pytest.approx(means[outcome.team_id]["task_conflict"])


def test_compute_outcomes_single_team_fails():
    responses = [response("s1", "t1", [3, 3, 3, 3, 2, 2, 2])]
    with pytest.raises(ValueError):
        compute_outcomes(responses)


def test_parse_survey_happy_and_bounds():
    good = "s1,t1,4.0,3.5,4.2,3.8,1.5,1.2,1.0\n"
    responses = parse_survey(io.StringIO(SURVEY_HEADER + good))
    assert responses[0].scores["cohesion"] == 4.0
    bad = "s1,t1,6.0,3.5,4.2,3.8,1.5,1.2,1.0\n"
    with pytest.raises(ParseError, match="outside"):
        parse_survey(io.StringIO(SURVEY_HEADER + bad))
    with pytest.raises(ParseError, match="non-numeric"):
        parse_survey(io.StringIO(SURVEY_HEADER + "s1,t1,x,3.5,4.2,3.8,1.5,1.2,1.0\n"))


def test_parse_survey_custom_bounds():
    wide = "s1,t1,6.5,3.5,4.2,3.8,1.5,1.2,1.0\n"
    responses = parse_survey(io.StringIO(SURVEY_HEADER + wide), scale_min=1, scale_max=7)
    assert responses[0].scores["cohesion"] == 6.5


def test_process_scales_are_first_four():
    assert PROCESS_SCALES == ("cohesion", "satisfaction", "potency", "shared_cognition")
