"""Two-stage popular-vs-niche analysis: group comparisons, then size-controlled regressions."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from . import METRIC_NAMES

POPULAR, NICHE, MIDDLE = "popular", "niche", "middle"
EFFECT_THRESHOLDS = ((0.474, "large"), (0.33, "medium"), (0.147, "small"))


class SingularDesignError(ValueError):
    pass


@dataclass
class TopicSummary:
    topic_id: int
    paper_count: int
    n_authors: int
    metrics: dict[str, Optional[float]]
    popularity_class: str = MIDDLE


@dataclass
class ComparisonResult:
    metric: str
    popular_mean: float
    popular_sd: float
    niche_mean: float
    niche_sd: float
    n_popular: int
    n_niche: int
    U: float
    p_value: float
    cliffs_delta: float
    delta_ci_low: float
    delta_ci_high: float
    effect_label: str
    significant_bonferroni: bool = False


@dataclass
class RegressionResult:
    metric: str
    n: int
    beta_simple: float
    p_simple: float
    beta_control: float
    p_control: float
    beta_size: float
    p_size: float
    interaction_beta: float
    interaction_p: float
    adj_r2_simple: float
    adj_r2_control: float
    adj_r2_interaction: float
    classification: str = "none"


@dataclass
class OLSResult:
    coef: np.ndarray
    se: np.ndarray
    p: np.ndarray
    r2: float
    adj_r2: float
    df: int
    names: list[str] = field(default_factory=list)


# -- popularity classes ---------------------------------------------------------

def classify_popularity(summaries: Sequence[TopicSummary], cutoff: float = 0.20) -> list[TopicSummary]:
    """Top floor(cutoff N) topics by paper count are popular, bottom ones niche.

    Boundary ties are settled by topic id ascending in both directions; a topic
    already taken as popular is never also counted as niche.
    """
    if not 0 < cutoff <= 0.5:
        raise ValueError(f"cutoff {cutoff} outside (0, 0.5]")
    n = len(summaries)
    k = math.floor(round(cutoff * n, 9))
    if k == 0:
        raise ValueError(f"cutoff {cutoff} selects no topics out of {n}")
    top = sorted(summaries, key=lambda s: (-s.paper_count, s.topic_id))[:k]
    top_ids = {s.topic_id for s in top}
    rest = [s for s in summaries if s.topic_id not in top_ids]
    bottom = sorted(rest, key=lambda s: (s.paper_count, s.topic_id))[:k]
    bottom_ids = {s.topic_id for s in bottom}
    out = []
    for s in summaries:
        cls = POPULAR if s.topic_id in top_ids else NICHE if s.topic_id in bottom_ids else MIDDLE
        out.append(TopicSummary(s.topic_id, s.paper_count, s.n_authors, s.metrics, cls))
    return out


# -- Mann-Whitney and Cliff's delta --------------------------------------------------

def rankdata(values: Sequence[float]) -> np.ndarray:
    """Ranks starting at 1, ties given their mean rank."""
    a = np.asarray(values, float)
    order = np.argsort(a, kind="mergesort")
    ranks = np.empty(len(a))
    sorted_a = a[order]
    i = 0
    while i < len(a):
        j = i
        while j + 1 < len(a) and sorted_a[j + 1] == sorted_a[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


@lru_cache(maxsize=None)
def _u_counts(n: int, m: int) -> tuple[int, ...]:
    """Number of rank arrangements giving each U in 0..n*m (no ties)."""
    if n == 0 or m == 0:
        return (1,)
    # f(n, m, u) = f(n-1, m, u-m) + f(n, m-1, u): the largest value is either an x or a y
    a = _u_counts(n - 1, m)
    b = _u_counts(n, m - 1)
    out = [0] * (n * m + 1)
    for u, c in enumerate(a):
        out[u + m] += c
    for u, c in enumerate(b):
        out[u] += c
    return tuple(out)


def mann_whitney_exact_p(u: float, n: int, m: int) -> float:
    counts = _u_counts(n, m)
    total = sum(counts)
    u_int = int(round(u))
    lower = sum(counts[: u_int + 1]) / total
    upper = sum(counts[u_int:]) / total
    return min(1.0, 2 * min(lower, upper))


def mann_whitney_u(x: Sequence[float], y: Sequence[float], exact_below: int = 8) -> tuple[float, float]:
    """U for x (count of x > y, ties counting one half) and a two-sided p.

    Exact enumeration is used when the smaller sample has fewer than
    `exact_below` observations and there are no ties; otherwise the normal
    approximation with tie-corrected variance and continuity correction.
    """
    n, m = len(x), len(y)
    if n < 1 or m < 1:
        raise ValueError("both samples need at least one observation")
    allv = np.concatenate([np.asarray(x, float), np.asarray(y, float)])
    ranks = rankdata(allv)
    u_x = float(ranks[:n].sum() - n * (n + 1) / 2)
    if np.all(allv == allv[0]):
        return u_x, 1.0
    _, tie_counts = np.unique(allv, return_counts=True)
    has_ties = bool((tie_counts > 1).any())
    if min(n, m) < exact_below and not has_ties:
        return u_x, mann_whitney_exact_p(u_x, n, m)
    N = n + m
    tie_term = float((tie_counts ** 3 - tie_counts).sum())
    var = n * m / 12.0 * ((N + 1) - tie_term / (N * (N - 1)))
    if var <= 0:
        return u_x, 1.0
    mu = n * m / 2.0
    z = (abs(u_x - mu) - 0.5) / math.sqrt(var)
    if z <= 0:
        return u_x, 1.0
    return u_x, normal_two_sided_p(z)


def cliffs_delta(x: Sequence[float], y: Sequence[float]) -> float:
    """P(X > Y) - P(Y > X) over all cross pairs."""
    xa = np.asarray(x, float)
    ys = np.sort(np.asarray(y, float))
    if len(xa) == 0 or len(ys) == 0:
        raise ValueError("both samples need at least one observation")
    below = np.searchsorted(ys, xa, side="left")
    above = len(ys) - np.searchsorted(ys, xa, side="right")
    return float((below.sum() - above.sum()) / (len(xa) * len(ys)))


def effect_label(delta: float) -> str:
    d = abs(delta)
    for bound, name in EFFECT_THRESHOLDS:
        if d >= bound:
            return name
    return "negligible"


def _delta_batch(xb: np.ndarray, yb: np.ndarray) -> np.ndarray:
    # rows are resamples
    ys = np.sort(yb, axis=1)
    out = np.empty(len(xb))
    for i in range(len(xb)):
        below = np.searchsorted(ys[i], xb[i], side="left").sum()
        above = (ys.shape[1] - np.searchsorted(ys[i], xb[i], side="right")).sum()
        out[i] = (below - above) / (xb.shape[1] * ys.shape[1])
    return out


def bootstrap_ci(
    statistic: Callable,
    x: Sequence[float],
    y: Sequence[float],
    iterations: int = 10000,
    level: float = 0.95,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile interval from resampling both samples with replacement."""
    if iterations < 1:
        raise ValueError("iterations must be positive")
    xa = np.asarray(x, float)
    ya = np.asarray(y, float)
    rng = np.random.default_rng(seed)
    stats_ = np.empty(iterations)
    chunk = 1000
    for start in range(0, iterations, chunk):
        size = min(chunk, iterations - start)
        xb = xa[rng.integers(0, len(xa), size=(size, len(xa)))]
        yb = ya[rng.integers(0, len(ya), size=(size, len(ya)))]
        if statistic is cliffs_delta:
            stats_[start:start + size] = _delta_batch(xb, yb)
        else:
            stats_[start:start + size] = [statistic(a, b) for a, b in zip(xb, yb)]
    alpha = (1 - level) / 2
    lo, hi = np.quantile(stats_, [alpha, 1 - alpha])
    return float(lo), float(hi)


def bonferroni(p_values: Sequence[float], m: int = 10, alpha: float = 0.05) -> list[bool]:
    if m < 1:
        raise ValueError("m must be >= 1")
    return [p < alpha / m for p in p_values]


# -- special functions ------------------------------------------------------------------

def _beta_cf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    tiny = 1e-300
    c, d = 1.0, 1.0 - (a + b) * x / (a + 1)
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, 10000):
        m2 = 2 * m
        num = m * (b - m) * x / ((a + m2 - 1) * (a + m2))
        d = 1.0 + num * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + num / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1))
        d = 1.0 + num * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + num / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0:
        return 0.0
    if x >= 1:
        return 1.0
    ln_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    if x < (a + 1) / (a + b + 2):
        return math.exp(ln_front) * _beta_cf(a, b, x) / a
    return 1.0 - math.exp(ln_front) * _beta_cf(b, a, 1 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student t with `df` degrees of freedom."""
    if math.isnan(t):
        return 1.0
    if math.isinf(t):
        return 0.0
    return min(1.0, betainc(df / 2.0, 0.5, df / (df + t * t)))


def normal_two_sided_p(z: float) -> float:
    return min(1.0, math.erfc(abs(z) / math.sqrt(2)))


# -- correlation and regression -------------------------------------------------------

def pearson_size_correlation(values: Sequence[float], sizes: Sequence[float]) -> tuple[Optional[float], Optional[float]]:
    """Pearson r of the metric against ln(size), with a Student-t p-value."""
    v = np.asarray(values, float)
    s = np.asarray(sizes, float)
    if len(v) != len(s):
        raise ValueError("length mismatch")
    if len(v) < 3:
        raise ValueError("need at least 3 pairs")
    if (s < 1).any():
        raise ValueError("sizes must be >= 1")
    ls = np.log(s)
    dv, ds = v - v.mean(), ls - ls.mean()
    den = math.sqrt((dv ** 2).sum() * (ds ** 2).sum())
    if den == 0:
        return None, None
    r = float(np.clip((dv * ds).sum() / den, -1.0, 1.0))
    df = len(v) - 2
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt(df / (1 - r * r))
    return r, t_two_sided_p(t, df)


def standardize(column: Sequence[float], name: str = "column") -> np.ndarray:
    """(x - mean) / sd with the n-1 sample sd."""
    x = np.asarray(column, float)
    if len(x) < 2:
        raise ValueError(f"{name}: need at least 2 values to standardize")
    sd = x.std(ddof=1)
    if sd == 0 or not np.isfinite(sd):
        raise ValueError(f"{name}: zero variance, cannot standardize")
    return (x - x.mean()) / sd


def ols_fit(design: np.ndarray, response: Sequence[float], names: Optional[Sequence[str]] = None) -> OLSResult:
    """Least squares with an added intercept, solved through the normal equations.

    Returned arrays include the intercept first. p-values are two-sided from
    Student t with n - k - 1 degrees of freedom.
    """
    X = np.asarray(design, float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(response, float)
    n, k = X.shape
    names = list(names) if names is not None else [f"x{i}" for i in range(k)]
    if n < k + 2:
        raise ValueError(f"need at least {k + 2} rows for {k} predictors, got {n}")
    A = np.column_stack([np.ones(n), X])
    if np.linalg.matrix_rank(A) < k + 1:
        raise SingularDesignError(f"design is rank deficient in columns {names}")
    xtx = A.T @ A
    coef = np.linalg.solve(xtx, A.T @ y)
    resid = y - A @ coef
    rss = float(resid @ resid)
    tss = float(((y - y.mean()) ** 2).sum())
    df = n - k - 1
    sigma2 = rss / df
    cov = sigma2 * np.linalg.inv(xtx)
    se = np.sqrt(np.clip(np.diag(cov), 0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, coef / se, np.inf * np.sign(coef))
    p = np.array([t_two_sided_p(float(v), df) for v in t])
    r2 = 1 - rss / tss if tss > 0 else 1.0
    adj = 1 - (1 - r2) * (n - 1) / df
    return OLSResult(coef, se, p, r2, adj, df, ["intercept"] + names)


def classify_effect(r: RegressionResult, alpha: float = 0.005) -> str:
    sig_s = r.p_simple < alpha
    sig_c = r.p_control < alpha
    if sig_c and not sig_s:
        return "emergent"
    if sig_s and sig_c:
        if np.sign(r.beta_simple) != np.sign(r.beta_control):
            return "robust_reversed"
        return "robust"
    if sig_s and not sig_c:
        return "confounded"
    return "none"


def _pairs(summaries, metric):
    rows = [s for s in summaries if s.popularity_class in (POPULAR, NICHE)]
    return [s for s in rows if s.metrics.get(metric) is not None and not math.isnan(s.metrics[metric])]


def regress_metric(summaries: Sequence[TopicSummary], metric: str, alpha: float = 0.005) -> RegressionResult:
    rows = _pairs(summaries, metric)
    if not any(s.popularity_class == POPULAR for s in rows) or not any(s.popularity_class == NICHE for s in rows):
        raise ValueError(f"{metric}: needs both popular and niche topics with defined values")
    y = standardize([s.metrics[metric] for s in rows], metric)
    pop = standardize([1.0 if s.popularity_class == POPULAR else 0.0 for s in rows], "popularity")
    size = standardize([math.log(s.n_authors) for s in rows], "log_size")
    m1 = ols_fit(pop, y, ["popularity"])
    m2 = ols_fit(np.column_stack([pop, size]), y, ["popularity", "log_size"])
    m3 = ols_fit(np.column_stack([pop, size, pop * size]), y, ["popularity", "log_size", "interaction"])
    res = RegressionResult(
        metric, len(rows),
        float(m1.coef[1]), float(m1.p[1]),
        float(m2.coef[1]), float(m2.p[1]),
        float(m2.coef[2]), float(m2.p[2]),
        float(m3.coef[3]), float(m3.p[3]),
        m1.adj_r2, m2.adj_r2, m3.adj_r2,
    )
    res.classification = classify_effect(res, alpha)
    return res


def run_regression_suite(summaries, metrics: Sequence[str] = METRIC_NAMES, alpha: float = 0.005) -> list[RegressionResult]:
    return [regress_metric(summaries, m, alpha) for m in metrics]


def compare_metric(summaries, metric: str, iterations: int = 10000, seed: int = 0,
                   n_tests: int = 10, alpha: float = 0.05) -> ComparisonResult:
    rows = _pairs(summaries, metric)
    pop = [s.metrics[metric] for s in rows if s.popularity_class == POPULAR]
    nic = [s.metrics[metric] for s in rows if s.popularity_class == NICHE]
    if not pop or not nic:
        raise ValueError(f"{metric}: one group has no defined values")
    u, p = mann_whitney_u(pop, nic)
    d = cliffs_delta(pop, nic)
    if iterations:
        lo, hi = bootstrap_ci(cliffs_delta, pop, nic, iterations, 0.95, seed)
        lo, hi = min(lo, d), max(hi, d)
    else:
        lo = hi = d
    sd = lambda v: float(np.std(v, ddof=1)) if len(v) > 1 else 0.0
    return ComparisonResult(
        metric, float(np.mean(pop)), sd(pop), float(np.mean(nic)), sd(nic), len(pop), len(nic),
        u, p, d, lo, hi, effect_label(d), bonferroni([p], n_tests, alpha)[0],
    )


def compare_groups(summaries, metrics: Sequence[str] = METRIC_NAMES, iterations: int = 10000,
                   seed: int = 0, alpha: float = 0.005) -> list[ComparisonResult]:
    """Stage 1 for every metric; significance uses the already-corrected alpha."""
    return [compare_metric(summaries, m, iterations, metric_seed(seed, m), n_tests=1, alpha=alpha)
            for m in metrics]


def metric_seed(seed: int, metric: str) -> int:
    """Bootstrap seed for one metric, fixed by its position in the canonical order."""
    i = METRIC_NAMES.index(metric) if metric in METRIC_NAMES else len(METRIC_NAMES) + sum(map(ord, metric))
    return int(np.random.SeedSequence([seed, i]).generate_state(1)[0])


def size_correlations(summaries, metrics: Sequence[str] = METRIC_NAMES) -> list[dict]:
    out = []
    for m in metrics:
        rows = _pairs(summaries, m)
        if len(rows) < 3:
            out.append({"metric": m, "r": None, "p": None, "n": len(rows)})
            continue
        r, p = pearson_size_correlation([s.metrics[m] for s in rows], [s.n_authors for s in rows])
        out.append({"metric": m, "r": r, "p": p, "n": len(rows)})
    return out


def sensitivity_over_cutoffs(summaries, cutoffs=(0.15, 0.20, 0.25, 0.30), metrics: Sequence[str] = METRIC_NAMES,
                             iterations: int = 0, seed: int = 0, alpha: float = 0.005) -> dict:
    """Stage-1 reruns per cutoff plus a per-metric sign/significance consistency table."""
    per_cutoff = {}
    for c in cutoffs:
        classified = classify_popularity(summaries, c)
        per_cutoff[c] = compare_groups(classified, metrics, iterations, seed, alpha)
    consistency = []
    for i, m in enumerate(metrics):
        deltas = [per_cutoff[c][i].cliffs_delta for c in cutoffs]
        sig = [per_cutoff[c][i].significant_bonferroni for c in cutoffs]
        signs = {int(np.sign(d)) for d in deltas}
        consistency.append({
            "metric": m,
            "deltas": deltas,
            "significant": sig,
            "consistent": len(signs) == 1 and (all(sig) or not any(sig)),
        })
    return {"cutoffs": list(cutoffs), "results": per_cutoff, "consistency": consistency}


def summaries_from_metrics(vectors) -> list[TopicSummary]:
    return [TopicSummary(v.topic_id, v.n_papers, v.n_authors, dict(v.values)) for v in vectors]


def analyze(vectors, cutoff: float = 0.20, alpha: float = 0.005, bootstrap: int = 10000, seed: int = 0,
            cutoffs: Optional[Sequence[float]] = (0.15, 0.20, 0.25, 0.30)) -> dict:
    """Full two-stage analysis as a JSON-ready dictionary.

    A metric that cannot be compared or regressed (an empty group, too few
    rows, zero variance) is listed under "skipped" instead of failing the run.
    """
    summaries = classify_popularity(summaries_from_metrics(vectors), cutoff)
    skipped = []
    comparisons, regressions = [], []
    for m in METRIC_NAMES:
        try:
            comparisons.append(compare_metric(summaries, m, bootstrap, metric_seed(seed, m), n_tests=1, alpha=alpha))
        except ValueError as exc:
            skipped.append({"metric": m, "section": "comparison", "reason": str(exc)})
        try:
            regressions.append(regress_metric(summaries, m, alpha))
        except ValueError as exc:
            skipped.append({"metric": m, "section": "regression", "reason": str(exc)})
    usable = [c.metric for c in comparisons]
    report = {
        "settings": {"cutoff": cutoff, "alpha": alpha, "bootstrap": bootstrap, "seed": seed},
        "groups": {
            "n_topics": len(summaries),
            "popular": sum(s.popularity_class == POPULAR for s in summaries),
            "niche": sum(s.popularity_class == NICHE for s in summaries),
        },
        "comparisons": [asdict(c) for c in comparisons],
        "size_correlations": size_correlations(summaries),
        "regressions": [asdict(r) for r in regressions],
        "skipped": skipped,
    }
    if cutoffs and usable:
        try:
            sens = sensitivity_over_cutoffs(summaries, tuple(cutoffs), usable, 0, seed, alpha)
        except ValueError as exc:
            skipped.append({"metric": None, "section": "sensitivity", "reason": str(exc)})
        else:
            report["sensitivity"] = {
                "cutoffs": sens["cutoffs"],
                "results": {f"{c:.2f}": [asdict(r) for r in rs] for c, rs in sens["results"].items()},
                "consistency": sens["consistency"],
            }
    return report
