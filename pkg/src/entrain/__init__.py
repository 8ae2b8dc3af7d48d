"""Multi-party linguistic style entrainment measures and team analyses."""

__version__ = "0.1.0"

from .entrainment import (
    ConvergenceMeasures,
    ConvergenceSummary,
    TeamDifferenceSeries,
    convergence_matrix,
    convergence_measures,
    kdiff,
    measure_team,
    pair_diff_unweighted,
    pair_diff_weighted,
    team_diff,
    team_diff_series,
)
from .errors import ConfigError, DataError, EntrainError, ParseError
from .lexicon import (
    CategoryProfile,
    Lexicon,
    categories_of,
    load_default_lexicon,
    load_lexicon,
    parse_lexicon,
    score_categories,
)
from .outcomes import (
    SurveyResponse,
    TeamOutcomes,
    compute_outcomes,
    cronbach_alpha,
    team_scale_means,
    zscore_composite,
)
from .team_profile import (
    MemberRecord,
    TeamCharacteristics,
    age_diversity,
    blau_index,
    characterize,
    female_bucket,
)
from .transcript import (
    DEFAULT_INTERJECTIONS,
    GameSession,
    IntervalGrid,
    IpuRecord,
    concatenate_speaker,
    parse_transcripts,
    preprocess,
    segment_intervals,
)

__all__ = [
    "__version__",
    "CategoryProfile",
    "ConfigError",
    "ConvergenceMeasures",
    "ConvergenceSummary",
    "DataError",
    "DEFAULT_INTERJECTIONS",
    "EntrainError",
    "GameSession",
    "IntervalGrid",
    "IpuRecord",
    "Lexicon",
    "MemberRecord",
    "ParseError",
    "SurveyResponse",
    "TeamCharacteristics",
    "TeamDifferenceSeries",
    "TeamOutcomes",
    "age_diversity",
    "blau_index",
    "categories_of",
    "characterize",
    "compute_outcomes",
    "concatenate_speaker",
    "convergence_matrix",
    "convergence_measures",
    "cronbach_alpha",
    "female_bucket",
    "kdiff",
    "load_default_lexicon",
    "load_lexicon",
    "measure_team",
    "pair_diff_unweighted",
    "pair_diff_weighted",
    "parse_lexicon",
    "parse_transcripts",
    "preprocess",
    "score_categories",
    "segment_intervals",
    "team_diff",
    "team_diff_series",
    "team_scale_means",
    "zscore_composite",
]
