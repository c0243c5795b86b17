"""Global expenditure detector: sparse fixed-effects regression on patient spend.

Each included patient contributes one row; regressors are the patient's
five-year history counts, chronic flags, and zip3 indicators, plus one
visit-count column per provider. The provider coefficients are read as
excess dollars per hospitalization and drive the regression rank list.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import lsqr

from .errors import ConsistencyError, InputError
from .fusion import RankList
from .model import PatientHistory
from .tableio import read_csv, write_csv

INTERCEPT = "intercept"
PROVIDER_PREFIX = "prov:"


@dataclass
class DesignMatrix:
    X: sp.csr_matrix
    y: np.ndarray
    column_index: list[str]  # descriptor per column, in column order
    row_ids: list[str]
    dropped_columns: list[str] = field(default_factory=list)

    @property
    def col_of(self) -> dict[str, int]:
        return {d: i for i, d in enumerate(self.column_index)}

    def provider_columns(self) -> list[tuple[str, int]]:
        return [(d.removeprefix(PROVIDER_PREFIX), i)
                for i, d in enumerate(self.column_index)
                if d.startswith(PROVIDER_PREFIX)]


@dataclass
class SolverDiagnostics:
    iterations: int
    relative_residual: float
    converged: bool
    istop: int


@dataclass
class RegressionFit:
    coefficients: dict[str, float]
    residuals: np.ndarray
    diagnostics: SolverDiagnostics
    ridge_lambda: float


def build_design(histories: list[PatientHistory]) -> DesignMatrix:
    """Assemble the sparse design matrix with a deterministic column order.

    Columns: intercept, sorted (visit-type, code) history counts, sorted
    chronic flags, sorted zip3 indicators, sorted provider visit counts.
    Target-year hospitalization codes are deliberately not features. Columns
    that would be all-zero are dropped and recorded.
    """
    if not histories:
        raise InputError("no patient histories supplied")
    seen = set()
    for h in histories:
        if h.beneficiary_id in seen:
            raise InputError(f"duplicate beneficiary id {h.beneficiary_id}")
        seen.add(h.beneficiary_id)
        if not h.provider_visits:
            raise ConsistencyError(
                f"beneficiary {h.beneficiary_id} has no target-year providers")

    hist_keys = sorted({k for h in histories for k in h.history_counts})
    all_chronic = {c for h in histories for c in h.chronic_flags}
    chronic_keys = sorted({c for h in histories for c, v in h.chronic_flags.items() if v})
    dropped = sorted(f"chronic:{c}" for c in all_chronic - set(chronic_keys))
    zip_keys = sorted({h.zip3 for h in histories})
    provider_keys = sorted({p for h in histories for p in h.provider_visits})

    columns = ([INTERCEPT]
               + [f"hist:{vt}:{code}" for vt, code in hist_keys]
               + [f"chronic:{c}" for c in chronic_keys]
               + [f"zip3:{z}" for z in zip_keys]
               + [f"{PROVIDER_PREFIX}{p}" for p in provider_keys])
    col = {d: i for i, d in enumerate(columns)}

    data, indices, indptr = [], [], [0]
    y = np.empty(len(histories))
    row_ids = []
    for r, h in enumerate(sorted(histories, key=lambda h: h.beneficiary_id)):
        entries = {0: 1.0}
        for key, n in h.history_counts.items():
            vt, code = key
            entries[col[f"hist:{vt}:{code}"]] = float(n)
        for c, v in h.chronic_flags.items():
            if v:
                entries[col[f"chronic:{c}"]] = 1.0
        entries[col[f"zip3:{h.zip3}"]] = 1.0
        for p, n in h.provider_visits.items():
            entries[col[f"{PROVIDER_PREFIX}{p}"]] = float(n)
        for c_idx in sorted(entries):
            indices.append(c_idx)
            data.append(entries[c_idx])
        indptr.append(len(indices))
        y[r] = h.target_spend
        row_ids.append(h.beneficiary_id)

    X = sp.csr_matrix((np.array(data), np.array(indices), np.array(indptr)),
                      shape=(len(histories), len(columns)))
    return DesignMatrix(X=X, y=y, column_index=columns, row_ids=row_ids,
                        dropped_columns=dropped)


def default_ridge(design: DesignMatrix) -> float:
    """1e-6 times the mean diagonal of X'X; symmetric shrinkage for identifiability."""
    colsq = np.asarray(design.X.multiply(design.X).sum(axis=0)).ravel()
    return 1e-6 * float(colsq.mean())


def fit_fixed_effects(
    design: DesignMatrix,
    ridge_lambda: float | None = None,
    tol: float = 1e-8,
    max_iter: int | None = None,
) -> RegressionFit:
    """Minimize ||y - Xb||^2 + lambda * ||b_noIntercept||^2 with sparse LSQR.

    The intercept column is left unpenalized by augmenting the system with
    sqrt(lambda) rows only for the remaining columns. Non-convergence within
    max_iter is flagged in the diagnostics; coefficients are still returned.
    """
    X, y = design.X, design.y
    n_rows, n_cols = X.shape
    if ridge_lambda is None:
        ridge_lambda = default_ridge(design)
    if ridge_lambda < 0:
        raise InputError("ridge_lambda must be nonnegative")
    if max_iter is None:
        max_iter = 10 * n_cols

    if ridge_lambda > 0:
        penalized = np.array([0.0 if d == INTERCEPT else 1.0 for d in design.column_index])
        D = sp.diags(np.sqrt(ridge_lambda) * penalized, format="csr")
        A = sp.vstack([X, D], format="csr")
        b = np.concatenate([y, np.zeros(n_cols)])
    else:
        A, b = X, y

    result = lsqr(A, b, atol=tol, btol=tol, iter_lim=max_iter)
    beta, istop, itn = result[0], result[1], result[2]

    residuals = y - X @ beta
    norm_y = float(np.linalg.norm(y))
    rel = float(np.linalg.norm(residuals) / norm_y) if norm_y > 0 else 0.0
    converged = istop in (0, 1, 2)
    return RegressionFit(
        coefficients={d: float(beta[i]) for i, d in enumerate(design.column_index)},
        residuals=residuals,
        diagnostics=SolverDiagnostics(iterations=int(itn), relative_residual=rel,
                                      converged=converged, istop=int(istop)),
        ridge_lambda=float(ridge_lambda),
    )


def rank_by_coefficient(fit: RegressionFit) -> RankList:
    """Providers sorted by fixed-effect coefficient, largest excess dollars first."""
    provider_coefs = [(d.removeprefix(PROVIDER_PREFIX), v)
                      for d, v in fit.coefficients.items()
                      if d.startswith(PROVIDER_PREFIX)]
    if not provider_coefs:
        raise InputError("fit contains no provider columns")
    ordered = sorted(provider_coefs, key=lambda kv: (-kv[1], kv[0]))
    return RankList(source="REGRESSION",
                    entries=[p for p, _ in ordered],
                    scores=[v for _, v in ordered])


def write_coefficients(path, fit: RegressionFit) -> None:
    write_csv(path, ["descriptor", "value"],
              [(d, repr(v)) for d, v in fit.coefficients.items()])


def read_coefficients(path) -> dict[str, float]:
    _, rows = read_csv(path)
    return {d: float(v) for d, v in rows}
