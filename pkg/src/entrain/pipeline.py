"""End-to-end orchestration: ingest, measure, join, analyze, report.

A run reads the declared inputs, computes per-team entrainment measures,
characteristics, and outcomes, inner-joins them into one team-level
table, executes the requested analyses, and writes everything to the
output directory together with a manifest of input/output digests.
Outputs are fully deterministic: no timestamps, no randomness, and a
fixed serialization, so identical inputs and configuration produce
byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import __version__
from .entrainment import ConvergenceMeasures, measure_team
from .errors import ConfigError, DataError
from .lexicon import Lexicon, load_default_lexicon, load_lexicon
from .outcomes import (
    DEFAULT_SCALE_MAX,
    DEFAULT_SCALE_MIN,
    TeamOutcomes,
    compute_outcomes,
    load_survey,
)
from .stats import (
    hierarchical_regression,
    one_way_anova,
    spearman,
    stepwise_select,
    tukey_hsd,
)
from .team_profile import TeamCharacteristics, characterize, female_bucket, load_roster
from .transcript import DEFAULT_INTERJECTIONS, load_interjections, load_transcripts

log = logging.getLogger(__name__)

LEXICON_ENV_VAR = "ENTRAIN_LEXICON"

MEASURE_COLUMNS = (
    "unw_max",
    "unw_min",
    "unw_absmax",
    "unw_absmin",
    "w_max",
    "w_min",
    "w_absmax",
    "w_absmin",
)
CHARACTERISTIC_COLUMNS = ("team_size", "female_pct", "gender_blau", "ethnic_blau", "age_sd")
OUTCOME_COLUMNS = ("team_processes", "task_conflict", "process_conflict", "relationship_conflict")

# the replicate battery: correlations against the continuous
# characteristics, ANOVA groupings, and the two-block regression design
CORRELATE_CHARACTERISTICS = ("gender_blau", "ethnic_blau", "age_sd")
ANOVA_GROUPINGS = ("female_bucket", "team_size")
HLR_BLOCK1 = ("age_sd", "ethnic_blau", "gender_blau", "female_pct", "team_size")

ANALYSIS_KINDS = ("correlate", "anova", "hlr", "hlr_flipped")
OUTPUT_FORMATS = ("csv", "json")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class AnalysisSpec:
    """One declared analysis over the joined team table."""

    kind: str
    dv: str
    blocks: tuple[tuple[str, ...], ...] = ()
    grouping: str | None = None

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any], index: int) -> "AnalysisSpec":
        if not isinstance(raw, Mapping):
            raise ConfigError(f"analyses[{index}] must be an object")
        kind = raw.get("kind")
        if kind not in ANALYSIS_KINDS:
            raise ConfigError(f"analyses[{index}]: unknown kind {kind!r}")
        dv = raw.get("dv")
        if not dv or not isinstance(dv, str):
            raise ConfigError(f"analyses[{index}]: missing dv")
        blocks_raw = raw.get("blocks", [])
        if not isinstance(blocks_raw, Sequence) or isinstance(blocks_raw, str):
            raise ConfigError(f"analyses[{index}]: blocks must be a list of lists")
        blocks = []
        for block in blocks_raw:
            if not isinstance(block, Sequence) or isinstance(block, str):
                raise ConfigError(f"analyses[{index}]: blocks must be a list of lists")
            blocks.append(tuple(str(v) for v in block))
        grouping = raw.get("grouping")
        if kind == "anova":
            if not grouping:
                raise ConfigError(f"analyses[{index}]: anova requires a grouping variable")
        elif kind == "correlate":
            if len(blocks) != 1 or not blocks[0]:
                raise ConfigError(f"analyses[{index}]: correlate requires one nonempty block")
        else:
            if len(blocks) != 2 or not blocks[0]:
                raise ConfigError(f"analyses[{index}]: {kind} requires two blocks")
        return cls(kind=kind, dv=dv, blocks=tuple(blocks), grouping=grouping)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "dv": self.dv}
        if self.blocks:
            out["blocks"] = [list(block) for block in self.blocks]
        if self.grouping is not None:
            out["grouping"] = self.grouping
        return out


@dataclass(frozen=True)
class RunConfig:
    transcripts: Path | None = None
    roster: Path | None = None
    survey: Path | None = None
    lexicon: Path | None = None
    interjections: Path | None = None
    output_dir: Path = Path("entrain_out")
    intervals: int = 10
    alpha: float = 0.05
    entry_p: float = 0.05
    formats: tuple[str, ...] = OUTPUT_FORMATS
    jobs: int | None = None
    scale_min: float = DEFAULT_SCALE_MIN
    scale_max: float = DEFAULT_SCALE_MAX
    analyses: tuple[AnalysisSpec, ...] = ()


CONFIG_PATH_KEYS = ("transcripts", "roster", "survey", "lexicon", "interjections", "output_dir")
CONFIG_KEYS = CONFIG_PATH_KEYS + (
    "intervals",
    "alpha",
    "entry_p",
    "formats",
    "jobs",
    "scale_min",
    "scale_max",
    "analyses",
)


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a flat JSON config document; relative paths resolve against it."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    for key in CONFIG_PATH_KEYS:
        if raw.get(key) is not None:
            candidate = Path(str(raw[key]))
            if not candidate.is_absolute():
                candidate = path.parent / candidate
            raw[key] = candidate
    return raw


def build_config(values: Mapping[str, Any]) -> RunConfig:
    """Construct and validate a RunConfig from merged config values."""
    cfg: dict[str, Any] = {}
    for key in CONFIG_PATH_KEYS:
        value = values.get(key)
        cfg[key] = Path(value) if value is not None else None
    if cfg["output_dir"] is None:
        cfg["output_dir"] = Path("entrain_out")

    def _number(key, default, caster):
        value = values.get(key)
        if value is None:
            return default
        try:
            return caster(value)
        except (TypeError, ValueError):
            raise ConfigError(f"config key {key!r} must be numeric, got {value!r}") from None

    cfg["intervals"] = _number("intervals", 10, int)
    cfg["alpha"] = _number("alpha", 0.05, float)
    cfg["entry_p"] = _number("entry_p", 0.05, float)
    cfg["scale_min"] = _number("scale_min", DEFAULT_SCALE_MIN, float)
    cfg["scale_max"] = _number("scale_max", DEFAULT_SCALE_MAX, float)
    jobs = values.get("jobs")
    cfg["jobs"] = None if jobs is None else _number("jobs", None, int)

    formats = values.get("formats")
    if formats is None:
        cfg["formats"] = OUTPUT_FORMATS
    else:
        if isinstance(formats, str):
            formats = [f.strip() for f in formats.split(",") if f.strip()]
        cfg["formats"] = tuple(formats)

    analyses_raw = values.get("analyses") or []
    cfg["analyses"] = tuple(
        AnalysisSpec.from_dict(item, i) for i, item in enumerate(analyses_raw)
    )

    config = RunConfig(**cfg)
    if config.intervals < 2:
        raise ConfigError(f"intervals must be at least 2, got {config.intervals}")
    if not 0 < config.alpha < 1:
        raise ConfigError(f"alpha must be in (0, 1), got {config.alpha}")
    if not 0 < config.entry_p < 1:
        raise ConfigError(f"entry_p must be in (0, 1), got {config.entry_p}")
    if not config.formats or any(f not in OUTPUT_FORMATS for f in config.formats):
        raise ConfigError(f"formats must be a nonempty subset of {OUTPUT_FORMATS}")
    if config.jobs is not None and config.jobs < 1:
        raise ConfigError(f"jobs must be at least 1, got {config.jobs}")
    if config.scale_min >= config.scale_max:
        raise ConfigError("scale_min must be below scale_max")
    return config


def _require_inputs(config: RunConfig, names: Sequence[str]) -> None:
    for name in names:
        if getattr(config, name) is None:
            raise ConfigError(f"missing required input: {name}")
    # every declared path must resolve at run start, used or not
    for name in CONFIG_PATH_KEYS:
        if name == "output_dir":
            continue
        path = getattr(config, name)
        if path is not None and not Path(path).is_file():
            raise ConfigError(f"{name} file not found: {path}")


def _resolve_lexicon(config: RunConfig) -> tuple[Lexicon, Path | None]:
    if config.lexicon is not None:
        return load_lexicon(config.lexicon), config.lexicon
    env = os.environ.get(LEXICON_ENV_VAR)
    if env:
        path = Path(env)
        if not path.is_file():
            raise ConfigError(f"{LEXICON_ENV_VAR} points to a missing file: {path}")
        return load_lexicon(path), path
    return load_default_lexicon(), None


# ---------------------------------------------------------------------------
# team-level measures and the joined table


def _summary_fields(measures: ConvergenceMeasures) -> dict[str, Any]:
    fields: dict[str, Any] = {}
    for prefix, summary in (("unw", measures.unweighted), ("w", measures.weighted)):
        for tag, value, pair in (
            ("max", summary.max_conv, summary.max_pair),
            ("min", summary.min_conv, summary.min_pair),
            ("absmax", summary.abs_max, summary.abs_max_pair),
            ("absmin", summary.abs_min, summary.abs_min_pair),
        ):
            fields[f"{prefix}_{tag}"] = value
            fields[f"{prefix}_{tag}_i"] = pair[0] if pair is not None else None
            fields[f"{prefix}_{tag}_j"] = pair[1] if pair is not None else None
    return fields


def _measure_worker(payload):
    session, lex, n, interjections = payload
    try:
        return session.team_id, measure_team(session, lex, n, interjections)
    except ValueError as exc:
        raise DataError(f"team {session.team_id!r}: {exc}") from None


def compute_measure_rows(
    sessions,
    lex: Lexicon,
    n: int,
    interjections: frozenset[str],
    jobs: int | None = None,
) -> list[dict[str, Any]]:
    """Per-team measure rows in team_id order; parallel across teams."""
    payloads = [(session, lex, n, interjections) for session in sessions]
    workers = jobs if jobs is not None else (os.cpu_count() or 1)
    workers = max(1, min(workers, len(payloads) or 1))
    if workers == 1 or len(payloads) < 2:
        results = [_measure_worker(p) for p in payloads]
    else:
        chunk = max(1, len(payloads) // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_measure_worker, payloads, chunksize=chunk))
    rows = []
    for team_id, measures in results:
        row: dict[str, Any] = {"team_id": team_id, "n": n}
        row.update(_summary_fields(measures))
        rows.append(row)
    return rows


@dataclass(frozen=True)
class TeamTable:
    """Joined team-level variables, one row per team."""

    team_ids: tuple[str, ...]
    columns: Mapping[str, tuple[Any, ...]]

    def column(self, name: str) -> tuple[Any, ...]:
        if name not in self.columns:
            raise ConfigError(f"unknown variable {name!r}; available: {', '.join(sorted(self.columns))}")
        return self.columns[name]


def _check_unique_teams(ids: Sequence[str], source: str) -> None:
    seen = set()
    for team_id in ids:
        if team_id in seen:
            raise DataError(f"duplicate team_id {team_id!r} in {source}")
        seen.add(team_id)


def join_team_table(
    measure_rows: Sequence[Mapping[str, Any]],
    characteristics: Sequence[tuple[str, TeamCharacteristics]],
    outcomes: Sequence[TeamOutcomes],
) -> TeamTable:
    """Inner-join the three per-team sources on team_id.

    Teams missing from any source are dropped with a warning; an empty
    join or a duplicated team_id is an error.
    """
    _check_unique_teams([r["team_id"] for r in measure_rows], "measures")
    _check_unique_teams([t for t, _ in characteristics], "characteristics")
    _check_unique_teams([o.team_id for o in outcomes], "outcomes")
    m_by_id = {r["team_id"]: r for r in measure_rows}
    c_by_id = dict(characteristics)
    o_by_id = {o.team_id: o for o in outcomes}
    shared = sorted(set(m_by_id) & set(c_by_id) & set(o_by_id))
    for label, ids in (("measures", m_by_id), ("characteristics", c_by_id), ("outcomes", o_by_id)):
        dropped = sorted(set(ids) - set(shared))
        if dropped:
            log.warning(
                "join: %d team(s) present in %s but missing elsewhere: %s",
                len(dropped),
                label,
                ", ".join(dropped),
            )
    if not shared:
        raise DataError("empty join: no team_id present in measures, characteristics, and outcomes")

    columns: dict[str, tuple[Any, ...]] = {}
    for name in MEASURE_COLUMNS:
        columns[name] = tuple(m_by_id[t][name] for t in shared)
    for name in CHARACTERISTIC_COLUMNS:
        columns[name] = tuple(getattr(c_by_id[t], name) for t in shared)
    for name in OUTCOME_COLUMNS:
        columns[name] = tuple(getattr(o_by_id[t], name) for t in shared)
    return TeamTable(team_ids=tuple(shared), columns=columns)


# ---------------------------------------------------------------------------
# display helpers


def round_half_up(value: float, digits: int) -> float:
    """Decimal round-half-up, the convention used for displayed values."""
    quantum = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP))


def p_display(p: float | None) -> str:
    """Three-decimal display form of a p-value ('' when undefined)."""
    if p is None or not math.isfinite(p):
        return ""
    return f"{round_half_up(p, 3):.3f}"


def significance_stars(p: float | None, alpha: float) -> str:
    """Report markers: '*' below alpha, '**' below alpha/5.

    With the default alpha of .05 this is the usual * p<.05, ** p<.01.
    """
    if p is None or not math.isfinite(p):
        return ""
    if p < alpha / 5.0:
        return "**"
    if p < alpha:
        return "*"
    return ""


def _safe(value: Any) -> Any:
    """JSON-safe scalar: NaN/inf become None, numpy scalars become native."""
    if value is None or isinstance(value, (str, bool, int)):
        return value
    value = float(value)
    return value if math.isfinite(value) else None


# ---------------------------------------------------------------------------
# analyses over the joined table


def _grouping_values(table: TeamTable, grouping: str) -> tuple[Any, ...]:
    if grouping == "female_bucket":
        return tuple(female_bucket(v) for v in table.column("female_pct"))
    return table.column(grouping)


def _level_label(value: Any) -> str:
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def _run_correlate(table: TeamTable, dv: str, iv: str, alpha: float) -> dict[str, Any]:
    record: dict[str, Any] = {"kind": "correlate", "dv": dv, "iv": iv}
    x = table.column(dv)
    y = table.column(iv)
    n_used = sum(
        1
        for a, b in zip(x, y)
        if a is not None
        and b is not None
        and math.isfinite(float(a))
        and math.isfinite(float(b))
    )
    try:
        result = spearman(x, y)
    except ValueError as exc:
        record.update({"skipped": True, "reason": str(exc), "n_used": n_used})
        return record
    record.update(
        {
            "skipped": False,
            "n_used": result.n,
            "rho": _safe(result.rho),
            "t_stat": _safe(result.t_stat),
            "p_two_sided": _safe(result.p_two_sided),
            "p_one_sided": _safe(result.p_one_sided),
            "p_two_display": p_display(result.p_two_sided),
            "p_one_display": p_display(result.p_one_sided),
            "stars": significance_stars(result.p_two_sided, alpha),
        }
    )
    return record


def _run_anova(table: TeamTable, dv: str, grouping: str, alpha: float) -> dict[str, Any]:
    record: dict[str, Any] = {"kind": "anova", "dv": dv, "grouping": grouping}
    values = table.column(dv)
    levels = _grouping_values(table, grouping)
    by_level: dict[Any, list[float]] = {}
    for value, level in zip(values, levels):
        if value is None or level is None:
            continue
        value = float(value)
        if not math.isfinite(value):
            continue
        by_level.setdefault(level, []).append(value)
    ordered = sorted(by_level)
    groups = [by_level[level] for level in ordered]
    labels = [_level_label(level) for level in ordered]
    n_used = sum(len(g) for g in groups)
    try:
        anova = one_way_anova(groups, labels=labels)
        tukey = tukey_hsd(groups, alpha=alpha, labels=labels, anova=anova)
    except ValueError as exc:
        record.update({"skipped": True, "reason": str(exc), "n_used": n_used})
        return record
    record.update(
        {
            "skipped": False,
            "n_used": anova.n_used,
            "k": len(anova.groups),
            "f_stat": _safe(anova.f_stat),
            "df_between": anova.df_between,
            "df_within": anova.df_within,
            "ms_within": _safe(anova.ms_within),
            "p_value": _safe(anova.p_value),
            "p_display": p_display(anova.p_value),
            "stars": significance_stars(anova.p_value, alpha),
            "groups": [
                {"level": g.label, "n": g.n, "mean": _safe(g.mean), "sd": _safe(g.sd)}
                for g in anova.groups
            ],
            "tukey": {
                "alpha": alpha,
                "comparisons": [
                    {
                        "group_a": c.group_a,
                        "group_b": c.group_b,
                        "mean_diff": _safe(c.mean_diff),
                        "q_stat": _safe(c.q_stat),
                        "p_adjusted": _safe(c.p_adjusted),
                        "p_display": p_display(c.p_adjusted),
                        "significant": c.significant,
                    }
                    for c in tukey.comparisons
                ],
            },
        }
    )
    return record


def _model_dict(model, alpha: float) -> dict[str, Any]:
    return {
        "predictors": [c.name for c in model.coefficients if c.name != "intercept"],
        "r_squared": _safe(model.r_squared),
        "f_stat": _safe(model.f_stat),
        "f_df": list(model.f_df),
        "f_p": _safe(model.f_p),
        "f_p_display": p_display(model.f_p),
        "f_stars": significance_stars(model.f_p, alpha),
        "coefficients": [
            {
                "term": c.name,
                "b": _safe(c.b),
                "beta": _safe(c.beta),
                "se": _safe(c.se),
                "t": _safe(c.t),
                "p": _safe(c.p),
                "p_display": p_display(c.p),
                "stars": significance_stars(c.p, alpha),
            }
            for c in model.coefficients
        ],
    }


def _block(table: TeamTable, names: Sequence[str]):
    return [(name, table.column(name)) for name in names]


def _run_hlr(
    table: TeamTable,
    dv: str,
    block1: Sequence[str],
    candidates: Sequence[str],
    alpha: float,
    entry_p: float,
) -> dict[str, Any]:
    """Forward design: fixed block1, stepwise-selected candidates in M2."""
    record: dict[str, Any] = {
        "kind": "hlr",
        "dv": dv,
        "block1": list(block1),
        "block2_candidates": list(candidates),
    }
    y = table.column(dv)
    try:
        selected = stepwise_select(y, _block(table, candidates), _block(table, block1), entry_p)
        result = hierarchical_regression(y, _block(table, block1), _block(table, selected))
    except ValueError as exc:
        record.update({"skipped": True, "reason": str(exc)})
        return record
    record.update(
        {
            "block2_selected": selected,
            "skipped": False,
            "n_used": result.n_used,
            "m1": _model_dict(result.m1, alpha),
            "m2": _model_dict(result.m2, alpha),
            "delta": {
                "r_squared": _safe(result.delta_r_squared),
                "f": _safe(result.delta_f),
                "df": list(result.delta_df),
                "p": _safe(result.delta_p),
                "p_display": p_display(result.delta_p),
                "stars": significance_stars(result.delta_p, alpha),
            },
        }
    )
    return record


def _run_hlr_flipped(
    table: TeamTable,
    dv: str,
    candidates: Sequence[str],
    block2: Sequence[str],
    alpha: float,
    entry_p: float,
) -> dict[str, Any]:
    """Flipped design: stepwise-selected candidates form M1, block2 is fixed."""
    record: dict[str, Any] = {
        "kind": "hlr_flipped",
        "dv": dv,
        "block1_candidates": list(candidates),
        "block2": list(block2),
    }
    y = table.column(dv)
    try:
        selected = stepwise_select(y, _block(table, candidates), (), entry_p)
        if not selected:
            record.update(
                {
                    "skipped": True,
                    "reason": "no candidate met the stepwise entry threshold",
                    "block1_selected": [],
                }
            )
            return record
        result = hierarchical_regression(y, _block(table, selected), _block(table, block2))
    except ValueError as exc:
        record.update({"skipped": True, "reason": str(exc)})
        return record
    record.update(
        {
            "block1_selected": selected,
            "skipped": False,
            "n_used": result.n_used,
            "m1": _model_dict(result.m1, alpha),
            "m2": _model_dict(result.m2, alpha),
            "delta": {
                "r_squared": _safe(result.delta_r_squared),
                "f": _safe(result.delta_f),
                "df": list(result.delta_df),
                "p": _safe(result.delta_p),
                "p_display": p_display(result.delta_p),
                "stars": significance_stars(result.delta_p, alpha),
            },
        }
    )
    return record


def run_analysis(
    table: TeamTable, spec: AnalysisSpec, alpha: float, entry_p: float
) -> list[dict[str, Any]]:
    """Evaluate one AnalysisSpec into test records (correlate may yield several)."""
    if spec.kind == "correlate":
        return [_run_correlate(table, spec.dv, iv, alpha) for iv in spec.blocks[0]]
    if spec.kind == "anova":
        return [_run_anova(table, spec.dv, spec.grouping, alpha)]
    if spec.kind == "hlr":
        return [_run_hlr(table, spec.dv, spec.blocks[0], spec.blocks[1], alpha, entry_p)]
    if spec.kind == "hlr_flipped":
        return [_run_hlr_flipped(table, spec.dv, spec.blocks[0], spec.blocks[1], alpha, entry_p)]
    raise ConfigError(f"unknown analysis kind {spec.kind!r}")


def _validate_spec_variables(table: TeamTable, specs: Sequence[AnalysisSpec]) -> None:
    known = set(table.columns) | {"female_bucket"}
    for spec in specs:
        referenced = [spec.dv] + [name for block in spec.blocks for name in block]
        if spec.grouping is not None:
            referenced.append(spec.grouping)
        unknown = sorted(set(referenced) - known)
        if unknown:
            raise ConfigError(
                f"analysis {spec.kind}/{spec.dv}: unknown variable(s): {', '.join(unknown)}"
            )


def run_analyses(
    table: TeamTable, specs: Sequence[AnalysisSpec], alpha: float, entry_p: float
) -> list[dict[str, Any]]:
    """Run declared specs; returns [{'spec': ..., 'tests': [...]}, ...]."""
    _validate_spec_variables(table, specs)
    return [
        {"spec": spec.to_dict(), "tests": run_analysis(table, spec, alpha, entry_p)}
        for spec in specs
    ]


def replicate_battery(table: TeamTable, alpha: float, entry_p: float) -> list[dict[str, Any]]:
    """The fixed analysis battery behind the replicate subcommand.

    Spearman of each measure against the continuous diversity variables,
    ANOVA (with Tukey HSD) over female-percentage buckets and team size,
    a forward HLR per outcome (characteristics first, stepwise-selected
    measures second), and a flipped HLR for every outcome whose forward
    M2 admitted at least one measure (its fixed second block being the
    characteristics significant in the forward M2).
    """
    specs: list[AnalysisSpec] = []
    for measure in MEASURE_COLUMNS:
        for characteristic in CORRELATE_CHARACTERISTICS:
            specs.append(AnalysisSpec(kind="correlate", dv=measure, blocks=((characteristic,),)))
    for measure in MEASURE_COLUMNS:
        for grouping in ANOVA_GROUPINGS:
            specs.append(AnalysisSpec(kind="anova", dv=measure, grouping=grouping))
    for outcome in OUTCOME_COLUMNS:
        specs.append(
            AnalysisSpec(kind="hlr", dv=outcome, blocks=(HLR_BLOCK1, MEASURE_COLUMNS))
        )
    results = run_analyses(table, specs, alpha, entry_p)

    # flipped HLRs depend on the forward results
    for outcome in OUTCOME_COLUMNS:
        forward = next(
            r["tests"][0]
            for r in results
            if r["spec"]["kind"] == "hlr" and r["spec"]["dv"] == outcome
        )
        if forward.get("skipped") or not forward.get("block2_selected"):
            continue
        significant = [
            c["term"]
            for c in forward["m2"]["coefficients"]
            if c["term"] in HLR_BLOCK1 and c["p"] is not None and c["p"] < alpha
        ]
        spec = AnalysisSpec(
            kind="hlr_flipped", dv=outcome, blocks=(MEASURE_COLUMNS, tuple(significant))
        )
        results.append(
            {"spec": spec.to_dict(), "tests": run_analysis(table, spec, alpha, entry_p)}
        )
    return results


# ---------------------------------------------------------------------------
# serialization


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(float(value)) if math.isfinite(value) else ""
    return str(value)


def _csv_bytes(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue().encode("utf-8")


def measures_csv(rows: Sequence[Mapping[str, Any]]) -> bytes:
    header = ["team_id", "n"] + list(MEASURE_COLUMNS)
    for name in MEASURE_COLUMNS:
        header += [f"{name}_i", f"{name}_j"]
    return _csv_bytes(header, [[row.get(col) for col in header] for row in rows])


def characteristics_csv(characteristics: Sequence[tuple[str, TeamCharacteristics]]) -> bytes:
    header = ["team_id"] + list(CHARACTERISTIC_COLUMNS)
    rows = [
        [team_id] + [getattr(c, name) for name in CHARACTERISTIC_COLUMNS]
        for team_id, c in characteristics
    ]
    return _csv_bytes(header, rows)


def outcomes_csv(outcomes: Sequence[TeamOutcomes]) -> bytes:
    header = ["team_id"] + list(OUTCOME_COLUMNS)
    rows = [[o.team_id] + [getattr(o, name) for name in OUTCOME_COLUMNS] for o in outcomes]
    return _csv_bytes(header, rows)


def teams_csv(table: TeamTable) -> bytes:
    header = ["team_id"] + list(MEASURE_COLUMNS + CHARACTERISTIC_COLUMNS + OUTCOME_COLUMNS)
    rows = []
    for i, team_id in enumerate(table.team_ids):
        rows.append([team_id] + [table.columns[name][i] for name in header[1:]])
    return _csv_bytes(header, rows)


def _analysis_csvs(results: Sequence[Mapping[str, Any]]) -> dict[str, bytes]:
    spearman_rows = []
    anova_rows = []
    tukey_rows = []
    hlr_models: dict[str, list] = {"hlr": [], "hlr_flipped": []}
    hlr_coefficients: dict[str, list] = {"hlr": [], "hlr_flipped": []}

    for result in results:
        for test in result["tests"]:
            kind = test["kind"]
            if kind == "correlate":
                spearman_rows.append(
                    [
                        test["dv"],
                        test["iv"],
                        test["skipped"],
                        test.get("reason"),
                        test.get("n_used"),
                        test.get("rho"),
                        test.get("t_stat"),
                        test.get("p_two_sided"),
                        test.get("p_one_sided"),
                        test.get("p_two_display"),
                        test.get("p_one_display"),
                        test.get("stars"),
                    ]
                )
            elif kind == "anova":
                anova_rows.append(
                    [
                        test["dv"],
                        test["grouping"],
                        test["skipped"],
                        test.get("reason"),
                        test.get("n_used"),
                        test.get("k"),
                        test.get("f_stat"),
                        test.get("df_between"),
                        test.get("df_within"),
                        test.get("ms_within"),
                        test.get("p_value"),
                        test.get("p_display"),
                        test.get("stars"),
                    ]
                )
                for comp in test.get("tukey", {}).get("comparisons", []):
                    tukey_rows.append(
                        [
                            test["dv"],
                            test["grouping"],
                            comp["group_a"],
                            comp["group_b"],
                            comp["mean_diff"],
                            comp["q_stat"],
                            comp["p_adjusted"],
                            comp["p_display"],
                            comp["significant"],
                        ]
                    )
            elif kind in ("hlr", "hlr_flipped"):
                selected_key = "block2_selected" if kind == "hlr" else "block1_selected"
                if test["skipped"]:
                    hlr_models[kind].append(
                        [test["dv"], "", test["skipped"], test.get("reason"), None]
                        + [None] * 13
                    )
                    continue
                delta = test["delta"]
                for model_name in ("m1", "m2"):
                    model = test[model_name]
                    is_m2 = model_name == "m2"
                    hlr_models[kind].append(
                        [
                            test["dv"],
                            model_name.upper(),
                            False,
                            None,
                            test["n_used"],
                            ";".join(model["predictors"]),
                            model["r_squared"],
                            model["f_stat"],
                            model["f_df"][0],
                            model["f_df"][1],
                            model["f_p"],
                            model["f_p_display"],
                            model["f_stars"],
                            ";".join(test.get(selected_key, [])),
                            delta["r_squared"] if is_m2 else None,
                            delta["f"] if is_m2 else None,
                            delta["p"] if is_m2 else None,
                            delta["stars"] if is_m2 else None,
                        ]
                    )
                    for coef in model["coefficients"]:
                        hlr_coefficients[kind].append(
                            [
                                test["dv"],
                                model_name.upper(),
                                coef["term"],
                                coef["b"],
                                coef["beta"],
                                coef["se"],
                                coef["t"],
                                coef["p"],
                                coef["p_display"],
                                coef["stars"],
                            ]
                        )

    out: dict[str, bytes] = {}
    if spearman_rows:
        out["spearman.csv"] = _csv_bytes(
            [
                "dv",
                "iv",
                "skipped",
                "reason",
                "n_used",
                "rho",
                "t_stat",
                "p_two_sided",
                "p_one_sided",
                "p_two_display",
                "p_one_display",
                "stars",
            ],
            spearman_rows,
        )
    if anova_rows:
        out["anova.csv"] = _csv_bytes(
            [
                "dv",
                "grouping",
                "skipped",
                "reason",
                "n_used",
                "k",
                "f_stat",
                "df_between",
                "df_within",
                "ms_within",
                "p_value",
                "p_display",
                "stars",
            ],
            anova_rows,
        )
    if tukey_rows:
        out["tukey.csv"] = _csv_bytes(
            [
                "dv",
                "grouping",
                "group_a",
                "group_b",
                "mean_diff",
                "q_stat",
                "p_adjusted",
                "p_display",
                "significant",
            ],
            tukey_rows,
        )
    model_header = [
        "dv",
        "model",
        "skipped",
        "reason",
        "n_used",
        "predictors",
        "r_squared",
        "f_stat",
        "f_df1",
        "f_df2",
        "f_p",
        "f_p_display",
        "f_stars",
        "selected",
        "delta_r_squared",
        "delta_f",
        "delta_p",
        "delta_stars",
    ]
    coef_header = ["dv", "model", "term", "b", "beta", "se", "t", "p", "p_display", "stars"]
    for kind in ("hlr", "hlr_flipped"):
        if hlr_models[kind]:
            out[f"{kind}_models.csv"] = _csv_bytes(model_header, hlr_models[kind])
        if hlr_coefficients[kind]:
            out[f"{kind}_coefficients.csv"] = _csv_bytes(coef_header, hlr_coefficients[kind])
    return out


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in text.lower())


def _analysis_jsons(results: Sequence[Mapping[str, Any]]) -> dict[str, bytes]:
    out: dict[str, bytes] = {}
    lines = []
    for index, result in enumerate(results):
        spec = result["spec"]
        parts = [f"{index:03d}", spec["kind"], _slug(spec["dv"])]
        if spec["kind"] == "correlate":
            parts.append(_slug(spec["blocks"][0][0]))
        elif spec["kind"] == "anova":
            parts.append(_slug(spec["grouping"]))
        out["analyses/" + "_".join(parts) + ".json"] = (
            json.dumps(result, indent=2, ensure_ascii=False, allow_nan=False) + "\n"
        ).encode("utf-8")
        for test in result["tests"]:
            lines.append(json.dumps(test, ensure_ascii=False, allow_nan=False, separators=(",", ":")))
    out["analyses.jsonl"] = ("\n".join(lines) + "\n").encode("utf-8") if lines else b""
    return out


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _manifest(
    command: str,
    config: RunConfig,
    inputs: Mapping[str, Path],
    artifacts: Mapping[str, bytes],
) -> bytes:
    # output_dir and jobs are execution details, not analysis settings;
    # leaving them out keeps reruns byte-identical wherever they land
    config_view = {
        "intervals": config.intervals,
        "alpha": config.alpha,
        "entry_p": config.entry_p,
        "formats": list(config.formats),
        "scale_min": config.scale_min,
        "scale_max": config.scale_max,
        "analyses": [spec.to_dict() for spec in config.analyses],
    }
    payload = {
        "tool": {"name": "entrain", "version": __version__},
        "command": command,
        "config": config_view,
        "config_sha256": _sha256(
            json.dumps(config_view, sort_keys=True, separators=(",", ":")).encode("utf-8")
        ),
        "inputs": {
            name: {"path": str(path), "sha256": _sha256_file(Path(path))}
            for name, path in sorted(inputs.items())
        },
        "outputs": {name: _sha256(data) for name, data in sorted(artifacts.items())},
    }
    return (json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")


def _write_artifacts(output_dir: Path, artifacts: Mapping[str, bytes]) -> None:
    output_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for name in sorted(artifacts):
            target = output_dir / name
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(artifacts[name])
            written.append(target)
    except BaseException:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        raise


# ---------------------------------------------------------------------------
# command entry points


def _gather_characteristics(config: RunConfig) -> list[tuple[str, TeamCharacteristics]]:
    members = load_roster(config.roster)
    by_team: dict[str, list] = {}
    for member in members:
        by_team.setdefault(member.team_id, []).append(member)
    characteristics = []
    for team_id in sorted(by_team):
        try:
            characteristics.append((team_id, characterize(by_team[team_id])))
        except ValueError as exc:
            raise DataError(f"team {team_id!r}: {exc}") from None
    return characteristics


def _gather_measures(config: RunConfig) -> tuple[list[dict[str, Any]], Path | None]:
    lex, lexicon_path = _resolve_lexicon(config)
    interjections = (
        load_interjections(config.interjections)
        if config.interjections is not None
        else DEFAULT_INTERJECTIONS
    )
    sessions = load_transcripts(config.transcripts)
    if not sessions:
        raise DataError(f"no transcripts found in {config.transcripts}")
    rows = compute_measure_rows(sessions, lex, config.intervals, interjections, config.jobs)
    return rows, lexicon_path


def _input_map(config: RunConfig, names: Sequence[str], lexicon_path: Path | None) -> dict[str, Path]:
    inputs = {name: getattr(config, name) for name in names if getattr(config, name) is not None}
    if lexicon_path is not None:
        inputs["lexicon"] = lexicon_path
    if config.interjections is not None:
        inputs["interjections"] = config.interjections
    return inputs


def run_measure(config: RunConfig) -> int:
    _require_inputs(config, ("transcripts",))
    rows, lexicon_path = _gather_measures(config)
    artifacts = {"measures.csv": measures_csv(rows)}
    artifacts["manifest.json"] = _manifest(
        "measure", config, _input_map(config, ("transcripts",), lexicon_path), artifacts
    )
    _write_artifacts(config.output_dir, artifacts)
    return 0


def run_characterize(config: RunConfig) -> int:
    _require_inputs(config, ("roster",))
    characteristics = _gather_characteristics(config)
    artifacts = {"characteristics.csv": characteristics_csv(characteristics)}
    artifacts["manifest.json"] = _manifest(
        "characterize", config, _input_map(config, ("roster",), None), artifacts
    )
    _write_artifacts(config.output_dir, artifacts)
    return 0


def run_outcomes(config: RunConfig) -> int:
    _require_inputs(config, ("survey",))
    responses = load_survey(config.survey, config.scale_min, config.scale_max)
    try:
        outcomes, alpha = compute_outcomes(responses)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    log.info("team-process scales: Cronbach's alpha = %.3f over %d teams", alpha, len(outcomes))
    artifacts = {"outcomes.csv": outcomes_csv(outcomes)}
    artifacts["manifest.json"] = _manifest(
        "outcomes", config, _input_map(config, ("survey",), None), artifacts
    )
    _write_artifacts(config.output_dir, artifacts)
    return 0


def run_pipeline(config: RunConfig, command: str = "analyze", battery: bool = False) -> int:
    """Full run: measures + characteristics + outcomes + join + analyses."""
    _require_inputs(config, ("transcripts", "roster", "survey"))
    measure_rows, lexicon_path = _gather_measures(config)
    characteristics = _gather_characteristics(config)
    responses = load_survey(config.survey, config.scale_min, config.scale_max)
    try:
        outcomes, scale_alpha = compute_outcomes(responses)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    log.info(
        "team-process scales: Cronbach's alpha = %.3f over %d teams", scale_alpha, len(outcomes)
    )
    table = join_team_table(measure_rows, characteristics, outcomes)

    if battery:
        results = replicate_battery(table, config.alpha, config.entry_p)
    else:
        results = run_analyses(table, config.analyses, config.alpha, config.entry_p)

    artifacts: dict[str, bytes] = {
        "measures.csv": measures_csv(measure_rows),
        "characteristics.csv": characteristics_csv(characteristics),
        "outcomes.csv": outcomes_csv(outcomes),
        "teams.csv": teams_csv(table),
    }
    if results:
        if "csv" in config.formats:
            artifacts.update(_analysis_csvs(results))
        if "json" in config.formats:
            artifacts.update(_analysis_jsons(results))
    inputs = _input_map(config, ("transcripts", "roster", "survey"), lexicon_path)
    artifacts["manifest.json"] = _manifest(command, config, inputs, artifacts)
    _write_artifacts(config.output_dir, artifacts)
    skipped = sum(1 for r in results for t in r["tests"] if t.get("skipped"))
    ran = sum(len(r["tests"]) for r in results)
    log.info("ran %d analysis test(s), %d skipped; outputs in %s", ran, skipped, config.output_dir)
    return 0


def run_replicate(config: RunConfig) -> int:
    """Run the fixed analysis battery (ignores config.analyses)."""
    return run_pipeline(config, command="replicate", battery=True)
