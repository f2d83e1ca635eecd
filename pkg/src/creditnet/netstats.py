"""Descriptive network statistics and model benchmark metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BipartiteNetwork, derived_degrees

__all__ = [
    "StatsError",
    "EmptyInput",
    "ConstantSequence",
    "NoValidEntries",
    "EmptyNetwork",
    "SummaryStats",
    "CcdfCurve",
    "ComparisonStats",
    "summarize",
    "ccdf",
    "compare",
    "rmsre",
    "precision_at_l",
]


class StatsError(ValueError):
    pass


class EmptyInput(StatsError):
    pass


class ConstantSequence(StatsError):
    pass


class NoValidEntries(StatsError):
    pass


class EmptyNetwork(StatsError):
    pass


@dataclass(frozen=True)
class SummaryStats:
    """Headline network statistics (counts, density, degree moments)."""

    n_firms: int
    n_banks: int
    n_links: int
    density: float
    mean_firm_degree: float
    mean_bank_degree: float
    cv_firm_degree: float
    cv_bank_degree: float

    def to_json(self) -> dict:
        return {
            "n_firms": self.n_firms,
            "n_banks": self.n_banks,
            "n_links": self.n_links,
            "density": self.density,
            "mean_firm_degree": self.mean_firm_degree,
            "mean_bank_degree": self.mean_bank_degree,
            "cv_firm_degree": self.cv_firm_degree,
            "cv_bank_degree": self.cv_bank_degree,
        }


@dataclass(frozen=True)
class CcdfCurve:
    """Survival function P(X >= x) over the distinct observed values."""

    values: np.ndarray
    survival: np.ndarray


@dataclass(frozen=True)
class ComparisonStats:
    """Agreement between empirical and model-expected node statistics.

    Binned summaries describe the expected values within equal-width bins
    of the empirical axis; both the standard deviation and the empirical
    90% interval of each bin are reported.
    """

    pearson: float | None
    spearman: float | None
    bin_edges: np.ndarray
    binned_means: np.ndarray
    binned_stds: np.ndarray
    binned_p05: np.ndarray
    binned_p95: np.ndarray


def summarize(net: BipartiteNetwork) -> SummaryStats:
    """Compute the summary statistics of a network.

    Coefficients of variation use the population standard deviation.
    """
    k, h = derived_degrees(net)
    k_mean = float(k.mean())
    h_mean = float(h.mean())
    return SummaryStats(
        n_firms=net.n_firms,
        n_banks=net.n_banks,
        n_links=net.n_links,
        density=net.density,
        mean_firm_degree=k_mean,
        mean_bank_degree=h_mean,
        cv_firm_degree=float(k.std() / k_mean) if k_mean > 0 else 0.0,
        cv_bank_degree=float(h.std() / h_mean) if h_mean > 0 else 0.0,
    )


def ccdf(values) -> CcdfCurve:
    """Complementary cumulative distribution P(X >= x)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise EmptyInput("ccdf of an empty sequence")
    distinct = np.unique(arr)
    # count of entries >= x, for x scanning the distinct values
    counts = arr.size - np.searchsorted(np.sort(arr), distinct, side="left")
    return CcdfCurve(values=distinct, survival=counts / arr.size)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1  # average rank, 1-based
        i = j + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    return float(xc @ yc / np.sqrt((xc @ xc) * (yc @ yc)))


def compare(empirical, expected, n_bins: int = 10) -> ComparisonStats:
    """Correlations and binned profile of expected vs empirical values."""
    emp = np.asarray(empirical, dtype=float)
    exp = np.asarray(expected, dtype=float)
    if emp.shape != exp.shape or emp.ndim != 1 or emp.size < 2:
        raise EmptyInput("need two equal-length sequences of length >= 2")
    if np.ptp(emp) == 0 or np.ptp(exp) == 0:
        raise ConstantSequence("correlation undefined for a constant sequence")

    pearson = _pearson(emp, exp)
    spearman = _pearson(_average_ranks(emp), _average_ranks(exp))

    edges = np.linspace(emp.min(), emp.max(), n_bins + 1)
    idx = np.clip(np.digitize(emp, edges[1:-1]), 0, n_bins - 1)
    means = np.full(n_bins, np.nan)
    stds = np.full(n_bins, np.nan)
    p05 = np.full(n_bins, np.nan)
    p95 = np.full(n_bins, np.nan)
    for b in range(n_bins):
        sel = exp[idx == b]
        if sel.size:
            means[b] = sel.mean()
            stds[b] = sel.std()
            p05[b] = np.percentile(sel, 5)
            p95[b] = np.percentile(sel, 95)
    return ComparisonStats(pearson, spearman, edges, means, stds, p05, p95)


def rmsre(empirical, model) -> float:
    """Root mean square relative error, skipping zero empirical entries."""
    emp = np.asarray(empirical, dtype=float)
    mod = np.asarray(model, dtype=float)
    if emp.shape != mod.shape:
        raise StatsError("shape mismatch")
    mask = emp != 0
    if not mask.any():
        raise NoValidEntries("all empirical entries are zero")
    rel = (mod[mask] - emp[mask]) / emp[mask]
    return float(np.sqrt(np.mean(rel**2)))


def precision_at_l(prob_matrix, net: BipartiteNetwork) -> float:
    """Fraction of the top-L_obs probability pairs that are observed links.

    Ties are broken deterministically by (firm, bank) lexicographic order.
    """
    p = np.asarray(prob_matrix, dtype=float)
    if p.shape != net.weights.shape:
        raise StatsError("probability matrix shape mismatch")
    if np.any(p < 0) or np.any(p > 1):
        raise StatsError("probabilities must lie in [0, 1]")
    n_links = net.n_links
    if n_links == 0:
        raise EmptyNetwork("precision undefined on a network without links")
    flat = p.ravel()
    # stable sort on -p keeps lexicographic (i, j) order within ties
    top = np.argsort(-flat, kind="stable")[:n_links]
    observed = (net.weights > 0).ravel()
    return float(observed[top].sum() / n_links)
