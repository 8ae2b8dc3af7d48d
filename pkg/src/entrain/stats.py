"""Statistical kernels: Spearman, ANOVA, Tukey HSD, OLS, and hierarchical
regression with stepwise entry.

Everything here is a pure function over numeric sequences. Missing values
(None or NaN) are handled where documented: pairwise deletion for
correlations, listwise deletion for regression. Tail probabilities come
from the regularized incomplete beta (t, F) and from adaptive
Gauss-Legendre evaluation of the studentized range's standard double
integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import linalg, optimize, special

# ---------------------------------------------------------------------------
# distribution kernels


def student_t_sf(t: float, df: float) -> float:
    """P(T > t) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    p = 0.5 * special.betainc(df / 2.0, 0.5, df / (df + t * t))
    return float(p) if t >= 0 else float(1.0 - p)


def f_sf(f: float, d1: float, d2: float) -> float:
    """P(F > f) for the F distribution with (d1, d2) degrees of freedom."""
    if d1 <= 0 or d2 <= 0:
        raise ValueError(f"degrees of freedom must be positive, got ({d1}, {d2})")
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return float(special.betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)))


def _range_cdf_standard(x: np.ndarray, k: int, nodes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # P(range of k iid standard normals <= x), integrating
    # k * phi(z) * [Phi(z) - Phi(z - x)]^(k-1) over z at fixed nodes
    z = nodes
    span = special.ndtr(z) - special.ndtr(z - x[..., None])
    span = np.clip(span, 0.0, 1.0)
    integrand = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi) * span ** (k - 1)
    return k * (integrand @ weights)


def _studentized_range_cdf_at(q: float, k: int, df: float, m_outer: int, m_inner: int) -> float:
    z_nodes, z_weights = np.polynomial.legendre.leggauss(m_inner)
    z_lo, z_hi = -9.0, 9.0
    z_nodes = 0.5 * (z_hi - z_lo) * z_nodes + 0.5 * (z_hi + z_lo)
    z_weights = 0.5 * (z_hi - z_lo) * z_weights
    if math.isinf(df):
        return float(_range_cdf_standard(np.array([q]), k, z_nodes, z_weights)[0])
    # outer variable s = sqrt(W/df) for W ~ chi-square(df); its support is
    # bracketed by extreme chi-square quantiles
    s_lo = math.sqrt(special.gammaincinv(df / 2.0, 1e-15) * 2.0 / df)
    s_hi = math.sqrt(special.gammaincinv(df / 2.0, 1.0 - 1e-15) * 2.0 / df)
    s_nodes, s_weights = np.polynomial.legendre.leggauss(m_outer)
    s_nodes = 0.5 * (s_hi - s_lo) * s_nodes + 0.5 * (s_hi + s_lo)
    s_weights = 0.5 * (s_hi - s_lo) * s_weights
    log_norm = (df / 2.0) * math.log(df / 2.0) - special.gammaln(df / 2.0) + math.log(2.0)
    log_pdf = log_norm + (df - 1.0) * np.log(s_nodes) - df * s_nodes * s_nodes / 2.0
    pdf = np.exp(log_pdf)
    inner = _range_cdf_standard(q * s_nodes, k, z_nodes, z_weights)
    return float(np.dot(pdf * inner, s_weights))


def studentized_range_sf(q: float, k: int, df: float, tol: float = 1e-7) -> float:
    """P(Q > q) for the studentized range with k groups and df error dof.

    Evaluated by Gauss-Legendre quadrature of the standard double
    integral, refining node counts until two successive estimates agree
    within ``tol``. ``df`` may be math.inf.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    if q <= 0:
        return 1.0
    if math.isinf(q):
        return 0.0
    if df > 1e7:
        df = math.inf
    m_outer, m_inner = 48, 96
    previous = _studentized_range_cdf_at(q, k, df, m_outer, m_inner)
    while m_inner < 1024:
        m_outer, m_inner = m_outer * 2, m_inner * 2
        current = _studentized_range_cdf_at(q, k, df, m_outer, m_inner)
        if abs(current - previous) < tol:
            previous = current
            break
        previous = current
    return float(min(max(1.0 - previous, 0.0), 1.0))


def studentized_range_crit(alpha: float, k: int, df: float) -> float:
    """Critical value q with P(Q > q) = alpha."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return float(optimize.brentq(lambda q: studentized_range_sf(q, k, df) - alpha, 1e-4, 100.0))


# ---------------------------------------------------------------------------
# missing-value helpers


def _as_float_array(values: Sequence[float | None]) -> np.ndarray:
    return np.array([math.nan if v is None else float(v) for v in values], dtype=float)


def _complete_rows(*columns: np.ndarray) -> np.ndarray:
    mask = np.ones(columns[0].shape[0], dtype=bool)
    for col in columns:
        mask &= np.isfinite(col)
    return mask


# ---------------------------------------------------------------------------
# ranking and correlation


def rank_average_ties(values: Sequence[float]) -> np.ndarray:
    """Ranks 1..n with tied values sharing the mean of their positions."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot rank an empty vector")
    order = np.argsort(arr, kind="mergesort")
    ranks = np.empty(arr.size, dtype=float)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass(frozen=True)
class SpearmanResult:
    rho: float
    n: int
    t_stat: float
    p_two_sided: float
    p_one_sided: float


def spearman(x: Sequence[float | None], y: Sequence[float | None]) -> SpearmanResult:
    """Spearman rho with average-tie ranks and t-based p-values.

    Pairs with a missing value on either side are deleted. The one-sided
    p is the tail in the direction of the observed rho (p_two / 2).
    """
    x_arr = _as_float_array(x)
    y_arr = _as_float_array(y)
    if x_arr.shape != y_arr.shape:
        raise ValueError("x and y must have the same length")
    mask = _complete_rows(x_arr, y_arr)
    n = int(mask.sum())
    if n < 4:
        raise ValueError(f"need at least 4 complete pairs, got {n}")
    rx = rank_average_ties(x_arr[mask])
    ry = rank_average_ties(y_arr[mask])
    sx, sy = rx.std(), ry.std()
    if sx == 0 or sy == 0:
        raise ValueError("constant vector: rank variance is zero")
    rho = float(np.mean((rx - rx.mean()) * (ry - ry.mean())) / (sx * sy))
    rho = min(max(rho, -1.0), 1.0)
    if 1.0 - abs(rho) < 1e-12:  # identical/reversed rankings, up to rounding
        rho = math.copysign(1.0, rho)
    if abs(rho) == 1.0:
        t_stat = math.copysign(math.inf, rho)
        p_two = 0.0
    else:
        t_stat = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        p_two = 2.0 * student_t_sf(abs(t_stat), n - 2)
    return SpearmanResult(rho=rho, n=n, t_stat=t_stat, p_two_sided=p_two, p_one_sided=p_two / 2.0)


# ---------------------------------------------------------------------------
# one-way ANOVA and Tukey HSD


@dataclass(frozen=True)
class GroupSummary:
    label: str
    n: int
    mean: float
    sd: float | None


@dataclass(frozen=True)
class AnovaResult:
    f_stat: float
    df_between: int
    df_within: int
    p_value: float
    ms_within: float
    groups: tuple[GroupSummary, ...]
    n_used: int


def one_way_anova(
    groups: Sequence[Sequence[float]], labels: Sequence[str] | None = None
) -> AnovaResult:
    """One-way fixed-effects ANOVA over k independent groups."""
    if len(groups) < 2:
        raise ValueError(f"need at least 2 groups, got {len(groups)}")
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if any(a.size == 0 for a in arrays):
        raise ValueError("every group must be nonempty")
    if labels is None:
        labels = [str(i) for i in range(len(arrays))]
    k = len(arrays)
    n_total = sum(a.size for a in arrays)
    if n_total <= k:
        raise ValueError(f"need more observations ({n_total}) than groups ({k})")
    grand = sum(a.sum() for a in arrays) / n_total
    ss_between = sum(a.size * (a.mean() - grand) ** 2 for a in arrays)
    ss_within = sum(((a - a.mean()) ** 2).sum() for a in arrays)
    df_between = k - 1
    df_within = n_total - k
    if ss_within == 0:
        raise ValueError("zero within-group variance")
    ms_between = ss_between / df_between
    ms_within = ss_within / df_within
    f_stat = ms_between / ms_within
    summaries = tuple(
        GroupSummary(
            label=str(label),
            n=int(a.size),
            mean=float(a.mean()),
            sd=float(a.std(ddof=1)) if a.size > 1 else None,
        )
        for label, a in zip(labels, arrays)
    )
    return AnovaResult(
        f_stat=float(f_stat),
        df_between=df_between,
        df_within=df_within,
        p_value=f_sf(f_stat, df_between, df_within),
        ms_within=float(ms_within),
        groups=summaries,
        n_used=n_total,
    )


@dataclass(frozen=True)
class TukeyComparison:
    group_a: str
    group_b: str
    mean_diff: float
    q_stat: float
    p_adjusted: float
    significant: bool


@dataclass(frozen=True)
class TukeyResult:
    comparisons: tuple[TukeyComparison, ...]
    k: int
    df_within: int
    ms_within: float
    alpha: float


def tukey_hsd(
    groups: Sequence[Sequence[float]],
    alpha: float = 0.05,
    labels: Sequence[str] | None = None,
    anova: AnovaResult | None = None,
) -> TukeyResult:
    """Tukey-Kramer all-pairs comparisons via the studentized range.

    q = |mean_a - mean_b| / sqrt((ms_within / 2) (1/n_a + 1/n_b)), with
    the adjusted p from the studentized range at (k, N - k).
    """
    if anova is None:
        anova = one_way_anova(groups, labels=labels)
    k = len(anova.groups)
    comparisons = []
    for i in range(k):
        for j in range(i + 1, k):
            a, b = anova.groups[i], anova.groups[j]
            diff = a.mean - b.mean
            se = math.sqrt(anova.ms_within / 2.0 * (1.0 / a.n + 1.0 / b.n))
            q_stat = abs(diff) / se
            p_adj = studentized_range_sf(q_stat, k, anova.df_within)
            comparisons.append(
                TukeyComparison(
                    group_a=a.label,
                    group_b=b.label,
                    mean_diff=float(diff),
                    q_stat=float(q_stat),
                    p_adjusted=p_adj,
                    significant=p_adj < alpha,
                )
            )
    return TukeyResult(
        comparisons=tuple(comparisons),
        k=k,
        df_within=anova.df_within,
        ms_within=anova.ms_within,
        alpha=alpha,
    )


# ---------------------------------------------------------------------------
# ordinary least squares


@dataclass(frozen=True)
class Coefficient:
    name: str
    b: float
    beta: float | None  # standardized; None for the intercept
    se: float
    t: float
    p: float


@dataclass(frozen=True)
class OlsResult:
    coefficients: tuple[Coefficient, ...]
    r_squared: float
    f_stat: float
    f_df: tuple[int, int]
    f_p: float
    n: int

    def coefficient(self, name: str) -> Coefficient:
        for coef in self.coefficients:
            if coef.name == name:
                return coef
        raise KeyError(name)


def _collinear_columns(design: np.ndarray, names: Sequence[str]) -> list[str]:
    # QR with column pivoting: pivots past the numerical rank are the
    # columns that fail to add independent information
    _, r, pivots = linalg.qr(design, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag[0] * max(design.shape) * np.finfo(float).eps if diag.size else 0.0
    rank = int((diag > tol).sum())
    bad = sorted(pivots[rank:])
    labels = ["intercept"] + list(names)
    return [labels[i] for i in bad]


def ols(
    y: Sequence[float],
    x: np.ndarray,
    names: Sequence[str] | None = None,
) -> OlsResult:
    """Least-squares fit of y on x (an n-by-p matrix) plus an intercept.

    Standard errors use the unbiased residual variance with the inverse
    normal-equations matrix; standardized betas rescale each slope by
    SD(x_j)/SD(y) (population SDs). Raises on rank deficiency, naming the
    collinear columns.
    """
    y_arr = np.asarray(y, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if x_arr.ndim == 1:
        x_arr = x_arr[:, None]
    n, p = x_arr.shape
    if p < 1:
        raise ValueError("need at least one predictor")
    if names is None:
        names = [f"x{j + 1}" for j in range(p)]
    if len(names) != p:
        raise ValueError(f"{len(names)} names for {p} predictors")
    if y_arr.shape[0] != n:
        raise ValueError("y and x row counts differ")
    if n <= p + 1:
        raise ValueError(f"need n > p + 1 (n={n}, p={p})")

    design = np.column_stack([np.ones(n), x_arr])
    if np.linalg.matrix_rank(design) < p + 1:
        bad = _collinear_columns(design, names)
        raise ValueError(f"rank-deficient design; collinear column(s): {', '.join(bad)}")

    coeffs, *_ = np.linalg.lstsq(design, y_arr, rcond=None)
    residuals = y_arr - design @ coeffs
    sse = float(residuals @ residuals)
    sst = float(((y_arr - y_arr.mean()) ** 2).sum())
    if sst == 0:
        raise ValueError("response has zero variance")
    r_squared = 1.0 - sse / sst

    df_resid = n - p - 1
    sigma2 = sse / df_resid
    cov = sigma2 * np.linalg.inv(design.T @ design)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    sd_y = y_arr.std()
    table = []
    for idx in range(p + 1):
        b = float(coeffs[idx])
        if se[idx] > 0:
            t_stat = b / float(se[idx])
            p_val = 2.0 * student_t_sf(abs(t_stat), df_resid)
        else:  # perfect fit: residual variance is exactly zero
            t_stat = math.copysign(math.inf, b) if b != 0 else 0.0
            p_val = 0.0 if b != 0 else 1.0
        beta = None
        if idx > 0:
            beta = b * float(x_arr[:, idx - 1].std()) / sd_y
        table.append(
            Coefficient(
                name="intercept" if idx == 0 else str(names[idx - 1]),
                b=b,
                beta=beta,
                se=float(se[idx]),
                t=t_stat,
                p=p_val,
            )
        )

    if r_squared < 1.0:
        f_stat = (r_squared / p) / ((1.0 - r_squared) / df_resid)
    else:
        f_stat = math.inf
    return OlsResult(
        coefficients=tuple(table),
        r_squared=r_squared,
        f_stat=float(f_stat),
        f_df=(p, df_resid),
        f_p=f_sf(f_stat, p, df_resid),
        n=n,
    )


# ---------------------------------------------------------------------------
# hierarchical regression and stepwise entry

Block = Sequence[tuple[str, Sequence[float | None]]]


@dataclass(frozen=True)
class HlrResult:
    m1: OlsResult
    m2: OlsResult
    delta_r_squared: float
    delta_f: float | None
    delta_df: tuple[int, int]
    delta_p: float | None
    n_used: int


def hierarchical_regression(
    y: Sequence[float | None],
    block1: Block,
    block2: Block,
) -> HlrResult:
    """Two nested OLS models with an incremental-variance F test.

    Rows are listwise-deleted over y and every predictor in both blocks,
    so M1 and M2 fit the same sample. With an empty block2, M2 is M1 and
    the delta terms are zero / undefined.
    """
    names1 = [name for name, _ in block1]
    names2 = [name for name, _ in block2]
    if not names1:
        raise ValueError("block1 must contain at least one predictor")
    duplicates = {n for n in names2 if n in set(names1)}
    if duplicates or len(set(names1)) != len(names1) or len(set(names2)) != len(names2):
        raise ValueError("predictor names must be unique across blocks")

    y_arr = _as_float_array(y)
    cols1 = [_as_float_array(values) for _, values in block1]
    cols2 = [_as_float_array(values) for _, values in block2]
    mask = _complete_rows(y_arr, *cols1, *cols2)
    n = int(mask.sum())
    y_used = y_arr[mask]
    x1 = np.column_stack([c[mask] for c in cols1])

    m1 = ols(y_used, x1, names1)
    if not names2:
        return HlrResult(
            m1=m1,
            m2=m1,
            delta_r_squared=0.0,
            delta_f=None,
            delta_df=(0, n - len(names1) - 1),
            delta_p=None,
            n_used=n,
        )
    x2 = np.column_stack([x1] + [c[mask][:, None] for c in cols2])
    m2 = ols(y_used, x2, names1 + names2)

    k1, k2 = len(names1), len(names1) + len(names2)
    delta_k = k2 - k1
    den_df = n - k2 - 1
    delta_r2 = m2.r_squared - m1.r_squared
    if m2.r_squared < 1.0:
        delta_f = (delta_r2 / delta_k) / ((1.0 - m2.r_squared) / den_df)
    else:
        delta_f = math.inf
    return HlrResult(
        m1=m1,
        m2=m2,
        delta_r_squared=delta_r2,
        delta_f=float(delta_f),
        delta_df=(delta_k, den_df),
        delta_p=f_sf(delta_f, delta_k, den_df),
        n_used=n,
    )


def stepwise_select(
    y: Sequence[float | None],
    candidates: Block,
    base_block: Block = (),
    entry_p: float = 0.05,
) -> list[str]:
    """Forward selection of candidates by coefficient p-value.

    Each round fits base + selected + one candidate (rows listwise
    complete for exactly those variables) and admits the candidate with
    the smallest coefficient p if it is below ``entry_p``; ties keep the
    earlier-declared candidate. Candidates whose trial fit is infeasible
    (too few rows, collinearity) are passed over that round.
    """
    if not 0 < entry_p < 1:
        raise ValueError(f"entry_p must be in (0, 1), got {entry_p}")
    y_arr = _as_float_array(y)
    base = [(name, _as_float_array(values)) for name, values in base_block]
    remaining = [(name, _as_float_array(values)) for name, values in candidates]
    selected: list[tuple[str, np.ndarray]] = []

    while remaining:
        best_name = None
        best_p = None
        for name, values in remaining:
            cols = [col for _, col in base] + [col for _, col in selected] + [values]
            mask = _complete_rows(y_arr, *cols)
            if int(mask.sum()) <= len(cols) + 1:
                continue
            x = np.column_stack([c[mask] for c in cols])
            col_names = [n for n, _ in base] + [n for n, _ in selected] + [name]
            try:
                fit = ols(y_arr[mask], x, col_names)
            except ValueError:
                continue
            p_val = fit.coefficient(name).p
            if best_p is None or p_val < best_p:
                best_name, best_p = name, p_val
        if best_name is None or best_p >= entry_p:
            break
        index = next(i for i, (n, _) in enumerate(remaining) if n == best_name)
        selected.append(remaining.pop(index))
    return [name for name, _ in selected]
