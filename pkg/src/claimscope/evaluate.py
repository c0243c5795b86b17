"""Evaluation against positive-unlabeled labels: PR/AP, lift, KS, covariates.

Unlabeled providers are treated as negatives, so every metric is a lower
bound on true targeting performance.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .fusion import RankList

LIFT_KS = (10, 50, 100)


@dataclass
class LabelSet:
    positives: set[str]
    provenance: str  # "planted" | "external file"


@dataclass
class CurvePoints:
    points: list[tuple[float, float]]
    summary: dict


@dataclass
class MatchResult:
    labels: LabelSet
    review_candidates: list[dict] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Label matching
# ---------------------------------------------------------------------------

def _tokens(name: str) -> set[str]:
    return {t for t in name.lower().split() if t and t != "hospital"}


def match_labels(
    names: list[str],
    providers: dict[str, str],
    accepted_reviews: dict[str, str] | None = None,
) -> MatchResult:
    """Match external label names onto the provider table.

    Exact case-insensitive name matches are auto-accepted. Otherwise, any
    provider whose name contains all of a label's tokens (minus "hospital")
    becomes a review candidate; candidates are never auto-accepted, even when
    unique. accepted_reviews maps label name -> provider id from a completed
    manual review and is merged into the result.
    """
    by_exact = {}
    for pid, pname in providers.items():
        by_exact.setdefault(pname.strip().lower(), pid)
    positives: set[str] = set()
    review = []
    for name in names:
        exact = by_exact.get(name.strip().lower())
        if exact is not None:
            positives.add(exact)
            continue
        want = _tokens(name)
        if not want:
            continue
        candidates = [(pid, pname) for pid, pname in sorted(providers.items())
                      if want <= _tokens(pname)]
        for pid, pname in candidates:
            review.append({"label_name": name, "provider_id": pid,
                           "provider_name": pname, "n_candidates": len(candidates)})
    if accepted_reviews:
        unknown = set(accepted_reviews.values()) - set(providers)
        if unknown:
            raise InputError(f"accepted reviews name unknown providers: {sorted(unknown)}")
        positives.update(accepted_reviews.values())
    return MatchResult(labels=LabelSet(positives, "external file"),
                       review_candidates=review)


# ---------------------------------------------------------------------------
# Ranking metrics
# ---------------------------------------------------------------------------

def pr_curve(ranking: RankList, labels: LabelSet) -> CurvePoints:
    """Precision/recall at every prefix; AP = sum(precision@k * rel_k) / n_pos."""
    relevant = [1 if p in labels.positives else 0 for p in ranking.entries]
    n_pos = sum(relevant)
    if n_pos == 0:
        raise InputError("no labeled positives appear in the ranking")
    points = []
    hits = 0
    ap = 0.0
    for k, rel in enumerate(relevant, start=1):
        hits += rel
        precision = hits / k
        recall = hits / n_pos
        points.append((recall, precision))
        ap += precision * rel
    ap /= n_pos
    return CurvePoints(points=points, summary={"ap": ap, "n_positives": n_pos})


def lift_at(ranking: RankList, labels: LabelSet, k: int) -> float:
    """precision@k / base rate, computed as hits*n / (k*n_pos) so the published
    8.4 example reproduces exactly."""
    n = len(ranking.entries)
    n_pos = sum(1 for p in ranking.entries if p in labels.positives)
    if n_pos == 0:
        raise InputError("no labeled positives appear in the ranking")
    if not 1 <= k <= n:
        raise InputError(f"k={k} outside [1, {n}]")
    hits = sum(1 for p in ranking.entries[:k] if p in labels.positives)
    return (hits * n) / (k * n_pos)


def lift_curve(ranking: RankList, labels: LabelSet, ks: tuple[int, ...] = LIFT_KS) -> CurvePoints:
    """Lift over 100 evenly spaced prefix fractions plus exact top-k cuts."""
    n = len(ranking.entries)
    points = []
    for i in range(1, 101):
        f = i / 100.0
        k = max(1, math.ceil(f * n))
        points.append((f, lift_at(ranking, labels, k)))
    table = {k: lift_at(ranking, labels, k) for k in ks if 1 <= k <= n}
    n_pos = sum(1 for p in ranking.entries if p in labels.positives)
    return CurvePoints(points=points,
                       summary={"lift_at_k": table, "base_rate": n_pos / n})


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov D and asymptotic p.

    D is the sup over pooled sample points of the ECDF gap; p comes from the
    Kolmogorov series with effective size n_a*n_b/(n_a+n_b).
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise InputError("both samples must be non-empty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / len(a)
    cdf_b = np.searchsorted(b, grid, side="right") / len(b)
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    n_eff = len(a) * len(b) / (len(a) + len(b))
    lam = math.sqrt(n_eff) * d
    p = kolmogorov_sf(lam)
    return d, p


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the Kolmogorov distribution, 2*sum (-1)^(j-1) exp(-2 j^2 lam^2)."""
    if lam <= 0.0:
        return 1.0
    total = 0.0
    for j in range(1, 101):
        term = 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
        total += term
        if abs(term) < 1e-16:
            break
    return min(1.0, max(0.0, total))


# ---------------------------------------------------------------------------
# Covariate characterization of top-ranked providers
# ---------------------------------------------------------------------------

CATEGORICAL_COVARIATES = ("rating", "ownership", "location", "state")
NUMERIC_COVARIATES = ("avg_length_of_stay", "n_unique_patients")

UNKNOWN = "unknown"


def _categorical_hist(values: list[str]) -> dict[str, float]:
    counts = Counter(values)
    total = sum(counts.values())
    return {k: v / total for k, v in sorted(counts.items())}


def _numeric_summary(values: np.ndarray) -> dict:
    if len(values) == 0:
        return {"n": 0}
    qs = np.percentile(values, [25, 50, 75])
    return {"n": int(len(values)), "mean": float(values.mean()),
            "std": float(values.std()), "q25": float(qs[0]),
            "median": float(qs[1]), "q75": float(qs[2])}


def characterize_outliers(
    ranking: RankList,
    covariates: dict[str, dict],
    quantile: float = 0.05,
    n_bins: int = 20,
) -> dict:
    """Compare covariate distributions of the top quantile with all providers.

    covariates maps provider id -> {rating, ownership, urban, state,
    avg_length_of_stay, n_unique_patients}; missing providers or missing
    values land in the "unknown" bucket. Numeric covariates get a shared-bin
    normalized histogram plus summary stats. The result is plot-ready.
    """
    if not 0.0 < quantile <= 1.0:
        raise InputError("quantile must be in (0, 1]")
    n_top = max(1, math.ceil(quantile * len(ranking.entries)))
    top_ids = ranking.entries[:n_top]
    all_ids = ranking.entries

    def cat_value(pid: str, key: str) -> str:
        row = covariates.get(pid)
        if row is None or row.get(key) in (None, ""):
            return UNKNOWN
        if key == "location":
            return "urban" if row.get("urban") in (1, "1", True) else "rural"
        return str(row[key])

    out = {"quantile": quantile, "n_top": n_top, "categorical": {}, "numeric": {}}
    for key in CATEGORICAL_COVARIATES:
        source_key = "location" if key == "location" else key
        out["categorical"][key] = {
            "top": _categorical_hist([cat_value(p, source_key) for p in top_ids]),
            "all": _categorical_hist([cat_value(p, source_key) for p in all_ids]),
        }
    for key in NUMERIC_COVARIATES:
        def num_values(ids):
            vals = []
            for pid in ids:
                row = covariates.get(pid)
                if row is None or row.get(key) in (None, ""):
                    continue
                vals.append(float(row[key]))
            return np.array(vals)

        top_vals, all_vals = num_values(top_ids), num_values(all_ids)
        if len(all_vals):
            lo, hi = float(all_vals.min()), float(all_vals.max())
            if hi <= lo:
                hi = lo + 1.0
            edges = np.linspace(lo, hi, n_bins + 1)
            def hist(vals):
                if not len(vals):
                    return []
                counts, _ = np.histogram(vals, bins=edges)
                total = counts.sum() or 1
                return [(float(edges[i]), float(edges[i + 1]), counts[i] / total)
                        for i in range(n_bins)]
            bins = {"top": hist(top_vals), "all": hist(all_vals)}
        else:
            bins = {"top": [], "all": []}
        out["numeric"][key] = {
            "bins": bins,
            "summary": {"top": _numeric_summary(top_vals),
                        "all": _numeric_summary(all_vals)},
        }
    return out
