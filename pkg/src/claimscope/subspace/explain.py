"""Feature attributions for subspace anomaly scores, with dollar context.

A ridge linear surrogate is fit from standardized ICD features to a
detector's anomaly scores. For a linear model under feature independence the
Shapley value has the closed form w_f * (x_f - mean_f), which is exact and
additive: attributions plus the prediction at the mean recover the surrogate
prediction. Each highlighted code is tied back to money through its most
frequent DRG and that DRG's average base price.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..model import DrgCostTable, InpatientClaim
from .detectors import DetectorScores

LOW_FIDELITY_R2 = 0.1
_STD_FLOOR = 1e-12


@dataclass
class LinearSurrogate:
    weights: np.ndarray          # per standardized feature
    intercept: float
    feature_means: np.ndarray    # raw-feature means
    feature_stds: np.ndarray     # raw-feature stds, floored
    r2: float

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (X - self.feature_means) / self.feature_stds

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.standardize(X) @ self.weights + self.intercept


@dataclass
class IcdDollarContext:
    code: str
    drg: str
    avg_price_usd: float
    percentile: float
    n_claims: int


@dataclass
class ShapExplanation:
    provider_id: str
    detector: str
    attributions: dict[str, float]       # top-k codes by |phi|
    surrogate_r2: float
    low_fidelity: bool
    baseline: float                      # surrogate prediction at the feature means
    prediction: float                    # surrogate prediction for this provider
    dollar_context: dict[str, IcdDollarContext | None]


def fit_surrogate(X: np.ndarray, scores: np.ndarray, ridge: float = 1.0) -> LinearSurrogate:
    """Ridge regression of anomaly scores onto z-scored features."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(scores, dtype=float)
    if X.shape[0] != y.shape[0]:
        raise InputError("feature matrix and scores disagree on row count")
    means = X.mean(axis=0)
    stds = np.maximum(X.std(axis=0), _STD_FLOOR)
    Z = (X - means) / stds
    d = Z.shape[1]
    y_bar = float(y.mean())
    w = np.linalg.solve(Z.T @ Z + ridge * np.eye(d), Z.T @ (y - y_bar))
    pred = Z @ w + y_bar
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y_bar) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return LinearSurrogate(weights=w, intercept=y_bar, feature_means=means,
                           feature_stds=stds, r2=r2)


def linear_shap_values(surrogate: LinearSurrogate, X: np.ndarray, row: int) -> np.ndarray:
    """Exact Shapley values of the linear surrogate for one row."""
    Z = surrogate.standardize(np.asarray(X, dtype=float))
    z_means = Z.mean(axis=0)
    return surrogate.weights * (Z[row] - z_means)


def shap_explain(
    X: np.ndarray,
    codes: list[str],
    provider_ids: list[str],
    scores: DetectorScores,
    provider_id: str,
    top_k: int = 10,
    ridge: float = 1.0,
    context_table: "DollarContextTable | None" = None,
) -> ShapExplanation:
    """Top-k signed code attributions for one provider's anomaly score."""
    if provider_id not in provider_ids:
        raise InputError(f"unknown provider {provider_id}")
    row = provider_ids.index(provider_id)
    surrogate = fit_surrogate(X, scores.scores, ridge=ridge)
    phi = linear_shap_values(surrogate, X, row)

    Z = surrogate.standardize(np.asarray(X, dtype=float))
    z_means = Z.mean(axis=0)
    baseline = float(surrogate.weights @ z_means + surrogate.intercept)
    prediction = float(Z[row] @ surrogate.weights + surrogate.intercept)

    top = sorted(range(len(codes)), key=lambda f: (-abs(phi[f]), codes[f]))[:top_k]
    attributions = {codes[f]: float(phi[f]) for f in top}
    context = {}
    for code in attributions:
        context[code] = context_table.lookup(code) if context_table is not None else None
    return ShapExplanation(
        provider_id=provider_id,
        detector=scores.detector,
        attributions=attributions,
        surrogate_r2=surrogate.r2,
        low_fidelity=surrogate.r2 < LOW_FIDELITY_R2,
        baseline=baseline,
        prediction=prediction,
        dollar_context=context,
    )


class DollarContextTable:
    """ICD code -> (most frequent DRG, average base price, price percentile).

    Ties on DRG frequency resolve to the cheaper DRG. The percentile of a
    mapped price is taken within the list of mapped prices over all codes
    seen in the claims.
    """

    def __init__(self, claims: list[InpatientClaim], costs: DrgCostTable):
        pair_counts: dict[str, Counter] = defaultdict(Counter)
        for claim in claims:
            for code in set(claim.icd_codes):
                pair_counts[code][claim.drg] += 1
        self._entries: dict[str, tuple[str, float, int]] = {}
        for code, counter in pair_counts.items():
            best = min(counter.items(), key=lambda kv: (-kv[1], costs[kv[0]], kv[0]))
            drg = best[0]
            self._entries[code] = (drg, costs[drg], sum(counter.values()))
        self._prices = np.sort(np.array([v[1] for v in self._entries.values()]))

    def mapped_prices(self) -> np.ndarray:
        return self._prices.copy()

    def percentile_of(self, price: float) -> float:
        if len(self._prices) == 0:
            return 0.0
        return 100.0 * float(np.searchsorted(self._prices, price, side="right")) / len(self._prices)

    def lookup(self, code: str) -> IcdDollarContext | None:
        """None marks a code with no claims."""
        entry = self._entries.get(code)
        if entry is None:
            return None
        drg, price, n = entry
        return IcdDollarContext(code=code, drg=drg, avg_price_usd=price,
                                percentile=self.percentile_of(price), n_claims=n)


def icd_dollar_context(
    claims: list[InpatientClaim], costs: DrgCostTable, icd_code: str
) -> IcdDollarContext | None:
    """One-shot lookup; returns None when the code appears in no claim."""
    return DollarContextTable(claims, costs).lookup(icd_code)
