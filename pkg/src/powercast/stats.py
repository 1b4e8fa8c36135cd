"""Rank-based model comparison: Friedman test and Nemenyi post-hoc."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaincc


@dataclass(frozen=True)
class ScoreMatrix:
    """Lower-is-better scores: one row per dataset block, one column per model."""

    scores: np.ndarray  # (n_blocks, n_models)
    row_labels: tuple
    col_labels: tuple

    def __post_init__(self):
        s = self.scores
        if s.ndim != 2 or s.shape[0] < 2 or s.shape[1] < 2:
            raise ValueError("score matrix needs at least 2 rows and 2 columns")
        if not np.all(np.isfinite(s)):
            raise ValueError("score matrix entries must be finite")
        if len(self.row_labels) != s.shape[0] or len(self.col_labels) != s.shape[1]:
            raise ValueError("label lengths must match matrix shape")


def make_score_matrix(scores, row_labels=None, col_labels=None) -> ScoreMatrix:
    scores = np.asarray(scores, dtype=float)
    rows = tuple(row_labels or [f"block{i + 1}" for i in range(scores.shape[0])])
    cols = tuple(col_labels or [f"model{j + 1}" for j in range(scores.shape[1])])
    return ScoreMatrix(scores, rows, cols)


def rank_rows(scores) -> np.ndarray:
    """Within-row ascending ranks 1..k; ties share the mean of their span."""
    scores = np.asarray(scores, dtype=float)
    if not np.all(np.isfinite(scores)):
        raise ValueError("cannot rank nonfinite scores")
    ranks = np.empty_like(scores)
    for r, row in enumerate(scores):
        order = np.argsort(row, kind="stable")
        sorted_vals = row[order]
        pos = 0
        while pos < row.size:
            end = pos
            while end + 1 < row.size and sorted_vals[end + 1] == sorted_vals[pos]:
                end += 1
            ranks[r, order[pos : end + 1]] = 0.5 * (pos + end) + 1.0
            pos = end + 1
    return ranks


@dataclass(frozen=True)
class FriedmanResult:
    chi2: float
    df: int
    p_value: float
    mean_ranks: np.ndarray


def friedman(scores: ScoreMatrix) -> FriedmanResult:
    """Friedman rank statistic over N blocks and k models, chi-squared tail."""
    n, k = scores.scores.shape
    ranks = rank_rows(scores.scores)
    mean_ranks = ranks.mean(axis=0)
    chi2 = 12.0 * n / (k * (k + 1)) * (
        float(np.sum(mean_ranks**2)) - k * (k + 1) ** 2 / 4.0
    )
    df = k - 1
    return FriedmanResult(chi2=chi2, df=df, p_value=chi2_upper_tail(chi2, df),
                          mean_ranks=mean_ranks)


def chi2_upper_tail(x: float, df: int) -> float:
    """P(Chi2_df >= x) via the regularized upper incomplete gamma."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if x < 0 or not math.isfinite(x):
        raise ValueError("statistic must be finite and nonnegative")
    return float(gammaincc(df / 2.0, x / 2.0))


def _norm_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def _norm_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def studentized_range_upper_tail(q: float, k: int) -> float:
    """Upper tail of the studentized range with infinite degrees of freedom.

    p = 1 - integral over z of k * phi(z) * [Phi(z) - Phi(z - q)]^(k-1),
    evaluated by adaptive quadrature on [-10, 10].
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if q < 0:
        raise ValueError("q must be >= 0")
    if q == 0.0:
        return 1.0

    def integrand(z):
        return k * _norm_pdf(z) * (_norm_cdf(z) - _norm_cdf(z - q)) ** (k - 1)

    cdf, _ = quad(integrand, -10.0, 10.0, epsabs=1e-12, limit=200)
    return float(min(1.0, max(0.0, 1.0 - cdf)))


def q_critical(k: int, alpha: float) -> float:
    """Studentized-range quantile q with upper tail alpha (bisection)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    lo, hi = 0.0, 2.0
    while studentized_range_upper_tail(hi, k) > alpha:
        hi *= 2.0
        if hi > 1e3:
            raise RuntimeError("q_critical failed to bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if studentized_range_upper_tail(mid, k) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class NemenyiResult:
    pairwise_p: np.ndarray  # (k, k), symmetric, diag 1
    critical_difference: float


def nemenyi(rank_matrix, n_blocks: int, k: int, alpha: float = 0.05) -> NemenyiResult:
    """All-pairs comparison of mean ranks via the studentized-range tail.

    q_ij = |R_i - R_j| / sqrt(k(k+1)/(12N));
    CD = q_alpha(k, inf) * sqrt(k(k+1)/(6N)).
    """
    ranks = np.asarray(rank_matrix, dtype=float)
    if ranks.shape != (n_blocks, k):
        raise ValueError("rank matrix shape must be (n_blocks, k)")
    mean_ranks = ranks.mean(axis=0)
    se = math.sqrt(k * (k + 1) / (12.0 * n_blocks))
    p = np.ones((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            q = abs(mean_ranks[i] - mean_ranks[j]) / se
            p[i, j] = p[j, i] = studentized_range_upper_tail(q, k)
    cd = q_critical(k, alpha) * math.sqrt(k * (k + 1) / (6.0 * n_blocks))
    return NemenyiResult(pairwise_p=p, critical_difference=cd)


@dataclass(frozen=True)
class ComparisonResult:
    """Full output of the rank comparison pipeline."""

    col_labels: tuple
    row_labels: tuple
    rank_matrix: np.ndarray
    mean_ranks: np.ndarray
    chi2: float
    df: int
    p_friedman: float
    nemenyi_p: np.ndarray
    critical_difference: float
    alpha: float


def compare_models(scores: ScoreMatrix, alpha: float = 0.05) -> ComparisonResult:
    """Rank, run Friedman, then Nemenyi post-hoc on one score matrix."""
    n, k = scores.scores.shape
    ranks = rank_rows(scores.scores)
    fr = friedman(scores)
    nem = nemenyi(ranks, n, k, alpha)
    return ComparisonResult(
        col_labels=scores.col_labels,
        row_labels=scores.row_labels,
        rank_matrix=ranks,
        mean_ranks=fr.mean_ranks,
        chi2=fr.chi2,
        df=fr.df,
        p_friedman=fr.p_value,
        nemenyi_p=nem.pairwise_p,
        critical_difference=nem.critical_difference,
        alpha=alpha,
    )


def read_score_matrix(text: str) -> ScoreMatrix:
    """Parse a delimited score matrix: header of model names, rows of scores."""
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) < 3:
        raise ValueError("score matrix needs a header and at least two rows")
    header = [c.strip() for c in lines[0].split(",")]
    col_labels = header[1:]
    row_labels, rows = [], []
    for ln in lines[1:]:
        cells = [c.strip() for c in ln.split(",")]
        if len(cells) != len(header):
            raise ValueError(f"row {ln!r} does not match header width")
        row_labels.append(cells[0])
        rows.append([float(c) for c in cells[1:]])
    return make_score_matrix(np.array(rows), row_labels, col_labels)


def format_score_matrix(scores: ScoreMatrix) -> str:
    lines = ["dataset," + ",".join(scores.col_labels)]
    for label, row in zip(scores.row_labels, scores.scores):
        lines.append(label + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def format_comparison(result: ComparisonResult) -> str:
    """Delimited report: mean ranks, Friedman block, pairwise p, CD."""
    lines = ["section,field,value"]
    for label, rank in zip(result.col_labels, result.mean_ranks):
        lines.append(f"mean_rank,{label},{float(rank)!r}")
    lines.append(f"friedman,chi2,{float(result.chi2)!r}")
    lines.append(f"friedman,df,{result.df}")
    lines.append(f"friedman,p,{float(result.p_friedman)!r}")
    lines.append(f"friedman,reject_at_alpha,{str(result.p_friedman < result.alpha).lower()}")
    for i, a in enumerate(result.col_labels):
        for j, b in enumerate(result.col_labels):
            if j > i:
                lines.append(f"nemenyi_p,{a}|{b},{float(result.nemenyi_p[i, j])!r}")
    lines.append(f"nemenyi,critical_difference,{float(result.critical_difference)!r}")
    lines.append(f"nemenyi,alpha,{float(result.alpha)!r}")
    return "\n".join(lines) + "\n"
