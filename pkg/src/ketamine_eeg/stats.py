"""Wilcoxon rank tests and Hochberg step-up correction.

Exact p-values come from the null distribution of the rank statistic,
counted exactly with integer dynamic programming over rank subsets (this
gives the same counts as enumerating every assignment). Inputs with ties,
or too large for the exact path, use the normal approximation with tie
and continuity corrections.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.stats import norm, rankdata

from .errors import AllZeroDifferences, EmptySample, InvalidPValue, LengthMismatch, UnknownFeature

EXACT_MAX_N = 20
ALTERNATIVES = ("two-sided", "less", "greater")


class Method(str, enum.Enum):
    RANK_SUM_EXACT = "RankSumExact"
    RANK_SUM_NORMAL = "RankSumNormal"
    SIGNED_RANK_EXACT = "SignedRankExact"
    SIGNED_RANK_NORMAL = "SignedRankNormal"


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: Method
    n1: int
    n2: int
    alternative: str = "two-sided"

    __test__ = False  # not a pytest class


@lru_cache(maxsize=None)
def _rank_sum_counts(n1: int, n: int) -> tuple[int, ...]:
    """Number of size-``n1`` subsets of ``{1..n}`` with each possible sum."""
    max_sum = sum(range(n - n1 + 1, n + 1))
    # table[k][s]: subsets of size k summing to s, built over ranks 1..n
    table = [[0] * (max_sum + 1) for _ in range(n1 + 1)]
    table[0][0] = 1
    for r in range(1, n + 1):
        for k in range(min(r, n1), 0, -1):
            prev, cur = table[k - 1], table[k]
            for s in range(max_sum, r - 1, -1):
                if prev[s - r]:
                    cur[s] += prev[s - r]
    return tuple(table[n1])


@lru_cache(maxsize=None)
def _signed_rank_counts(n: int) -> tuple[int, ...]:
    """Number of subsets of ``{1..n}`` with each possible sum."""
    max_sum = n * (n + 1) // 2
    counts = [0] * (max_sum + 1)
    counts[0] = 1
    for r in range(1, n + 1):
        for s in range(max_sum, r - 1, -1):
            counts[s] += counts[s - r]
    return tuple(counts)


def _tail_probs(counts: Sequence[int], stat: int) -> tuple[float, float]:
    total = sum(counts)
    le = sum(counts[: stat + 1])
    ge = sum(counts[stat:])
    return le / total, ge / total


def _combine(p_less: float, p_greater: float, alternative: str) -> float:
    if alternative == "less":
        return min(1.0, p_less)
    if alternative == "greater":
        return min(1.0, p_greater)
    return min(1.0, 2.0 * min(p_less, p_greater))


def _normal_tails(stat: float, mean: float, var: float) -> tuple[float, float]:
    if var <= 0:
        return 1.0, 1.0
    sd = math.sqrt(var)
    p_less = float(norm.cdf((stat - mean + 0.5) / sd))
    p_greater = float(norm.sf((stat - mean - 0.5) / sd))
    return p_less, p_greater


def _check_alternative(alternative):
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}")


def _tie_term(ranked_values) -> float:
    _, t = np.unique(ranked_values, return_counts=True)
    return float(np.sum(t.astype(float) ** 3 - t))


def wilcoxon_rank_sum(x, y, alternative: str = "two-sided",
                      exact_max_n: int = EXACT_MAX_N) -> TestResult:
    """Rank-sum test; the statistic is the rank sum W of ``x``.

    ``less`` tests whether ``x`` tends to be smaller than ``y``.
    """
    _check_alternative(alternative)
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0 or y.size == 0:
        raise EmptySample("both samples need at least one value")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("samples must be finite")
    n1, n2 = x.size, y.size
    n = n1 + n2
    pooled = np.concatenate([x, y])
    ranks = rankdata(pooled)
    w = float(ranks[:n1].sum())
    ties = np.unique(pooled).size < n

    if n <= exact_max_n and not ties:
        p_less, p_greater = _tail_probs(_rank_sum_counts(n1, n), int(round(w)))
        method = Method.RANK_SUM_EXACT
    else:
        mean = n1 * (n + 1) / 2.0
        var = n1 * n2 / 12.0 * ((n + 1) - _tie_term(pooled) / (n * (n - 1))) if n > 1 else 0.0
        p_less, p_greater = _normal_tails(w, mean, var)
        method = Method.RANK_SUM_NORMAL
    return TestResult(w, _combine(p_less, p_greater, alternative), method, n1, n2, alternative)


def wilcoxon_signed_rank(before, after, alternative: str = "two-sided",
                         exact_max_n: int = EXACT_MAX_N) -> TestResult:
    """Signed-rank test on ``d = before - after``; statistic is T+.

    Zero differences are dropped. ``greater`` tests whether ``before``
    tends to exceed ``after``.
    """
    _check_alternative(alternative)
    b = np.asarray(before, dtype=float).ravel()
    a = np.asarray(after, dtype=float).ravel()
    if b.size != a.size:
        raise LengthMismatch(f"{b.size} before vs {a.size} after values")
    if b.size == 0:
        raise EmptySample("no pairs")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("samples must be finite")
    d = b - a
    d = d[d != 0]
    if d.size == 0:
        raise AllZeroDifferences("every paired difference is zero")
    n = d.size
    absd = np.abs(d)
    ranks = rankdata(absd)
    t_plus = float(ranks[d > 0].sum())
    ties = np.unique(absd).size < n

    if n <= exact_max_n and not ties:
        p_less, p_greater = _tail_probs(_signed_rank_counts(n), int(round(t_plus)))
        method = Method.SIGNED_RANK_EXACT
    else:
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - _tie_term(absd) / 48.0
        p_less, p_greater = _normal_tails(t_plus, mean, var)
        method = Method.SIGNED_RANK_NORMAL
    return TestResult(t_plus, _combine(p_less, p_greater, alternative), method, n, n, alternative)


# -- multiplicity -----------------------------------------------------------------

@dataclass(frozen=True)
class AdjustedResults:
    raw_p: tuple
    reject: tuple
    alpha: float
    adjusted_p: tuple = field(default=())


def hochberg_adjust(p_values, alpha: float = 0.05) -> AdjustedResults:
    """Hochberg step-up: reject the k smallest p, k the largest index with
    ``p_(k) <= alpha / (m - k + 1)``. Output keeps the input order."""
    p = np.asarray(p_values, dtype=float).ravel()
    if not (0 < alpha < 1):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
        raise InvalidPValue("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    sorted_p = p[order]
    ranks = np.arange(1, m + 1)
    ok = sorted_p <= alpha / (m - ranks + 1)
    k = int(ranks[ok].max()) if ok.any() else 0
    reject = np.zeros(m, dtype=bool)
    reject[order[:k]] = True

    adj_sorted = np.minimum.accumulate(((m - ranks + 1) * sorted_p)[::-1])[::-1]
    adjusted = np.empty(m)
    adjusted[order] = np.minimum(adj_sorted, 1.0)
    return AdjustedResults(tuple(p.tolist()), tuple(reject.tolist()), alpha,
                           tuple(adjusted.tolist()))


def bonferroni_reject(p_values, alpha: float = 0.05) -> list[bool]:
    p = np.asarray(p_values, dtype=float)
    return (p <= alpha / max(p.size, 1)).tolist()


# -- table-level comparisons ------------------------------------------------------

@dataclass
class Comparison:
    feature: str
    groups: tuple
    test: str = "ranksum"  # ranksum | signedrank
    family: str = ""


@dataclass
class ComparisonResult:
    feature: str
    groups: tuple
    family: str
    status: str  # ok | insufficient-n | all-zero-differences
    statistic: float | None = None
    p: float | None = None
    method: str | None = None
    n1: int = 0
    n2: int = 0
    reject_primary: bool = False
    reject_secondary: bool = False
    means: tuple = ()
    sds: tuple = ()

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "feature": self.feature,
            "groups": list(self.groups),
            "status": self.status,
            "statistic": self.statistic,
            "p": self.p,
            "method": self.method,
            "n1": self.n1,
            "n2": self.n2,
            "reject_primary": self.reject_primary,
            "reject_secondary": self.reject_secondary,
            "mean": list(self.means),
            "sd": list(self.sds),
        }


def _mean_sd(v: np.ndarray):
    if v.size == 0:
        return (None, None)
    return float(np.mean(v)), (float(np.std(v, ddof=1)) if v.size > 1 else 0.0)


def group_compare(table, by: str, comparisons: Sequence[Comparison], pair_on: str = "subject_id",
                  alpha: float = 0.05, secondary: float = 0.025,
                  alternative: str = "two-sided",
                  allowed_groups=None) -> tuple[list[ComparisonResult], dict]:
    """Run each comparison and apply Hochberg within each family.

    ``table`` is a DataFrame; ``by`` names the column whose values are the
    groups. Rank-sum comparisons contrast the two groups' rows; signed-rank
    comparisons pair rows of the two groups on ``pair_on``. Comparisons that
    cannot run are reported with a status and left out of their family.
    Returns the per-comparison results and ``{family: (primary, secondary)}``
    adjusted results. ``allowed_groups`` lists group values that are valid
    even when absent from ``table`` (they then count as empty groups).
    """
    if by not in table.columns:
        raise UnknownFeature(f"unknown grouping column {by!r}")
    results = []
    for comp in comparisons:
        if comp.feature not in table.columns:
            raise UnknownFeature(f"unknown feature {comp.feature!r}")
        g1, g2 = comp.groups
        known = set(table[by].unique()) | set(allowed_groups or ())
        for g in (g1, g2):
            if g not in known:
                raise UnknownFeature(f"unknown group {g!r} in column {by!r}")
        a_rows = table[table[by] == g1]
        b_rows = table[table[by] == g2]
        res = ComparisonResult(comp.feature, (g1, g2), comp.family, "ok")
        if comp.test == "ranksum":
            x = a_rows[comp.feature].to_numpy(float)
            y = b_rows[comp.feature].to_numpy(float)
        elif comp.test == "signedrank":
            merged = a_rows[[pair_on, comp.feature]].merge(
                b_rows[[pair_on, comp.feature]], on=pair_on, suffixes=("_a", "_b"))
            merged = merged.sort_values(pair_on)
            x = merged[comp.feature + "_a"].to_numpy(float)
            y = merged[comp.feature + "_b"].to_numpy(float)
        else:
            raise ValueError(f"unknown test {comp.test!r}")
        res.n1, res.n2 = x.size, y.size
        ma, sa = _mean_sd(x)
        mb, sb = _mean_sd(y)
        res.means, res.sds = (ma, mb), (sa, sb)

        if comp.test == "ranksum" and (x.size < 2 or y.size < 2):
            res.status = "insufficient-n"
        elif comp.test == "signedrank" and x.size < 2:
            res.status = "insufficient-n"
        else:
            try:
                if comp.test == "ranksum":
                    tr = wilcoxon_rank_sum(x, y, alternative)
                else:
                    tr = wilcoxon_signed_rank(x, y, alternative)
            except AllZeroDifferences:
                res.status = "all-zero-differences"
            else:
                res.statistic, res.p, res.method = tr.statistic, tr.p_value, tr.method.value
        results.append(res)

    adjusted = {}
    for fam in sorted({r.family for r in results}):
        members = [r for r in results if r.family == fam and r.status == "ok"]
        if not members:
            continue
        ps = [r.p for r in members]
        prim = hochberg_adjust(ps, alpha)
        sec = hochberg_adjust(ps, secondary)
        for r, a, b in zip(members, prim.reject, sec.reject):
            r.reject_primary, r.reject_secondary = bool(a), bool(b)
        adjusted[fam] = (prim, sec)
    return results, adjusted
