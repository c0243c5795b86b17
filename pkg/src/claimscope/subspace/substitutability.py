"""ICD code substitutability from hierarchical description overlap.

A code's description is the concatenation of its ancestors' descriptions from
chapter root down to the code. Pairwise Jaccard similarity of the lowercased
token sets is computed within each chapter; across chapters similarity is
zero, giving a block-diagonal matrix. Multiplying the provider-by-ICD count
matrix by this similarity spreads each code's frequency onto substitutable
neighbors that were never directly reported.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import InputError
from ..model import IcdHierarchy, ProviderProfile


def description_tokens(hierarchy: IcdHierarchy, code: str) -> frozenset[str]:
    parts = []
    for node in hierarchy.ancestry(code):
        if not node.description.strip():
            raise InputError(f"ICD code {node.code} has an empty description")
        parts.append(node.description)
    return frozenset(" ".join(parts).lower().split())


def jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a and not b:
        return 1.0
    inter = len(a & b)
    union = len(a) + len(b) - inter
    return inter / union


def build_substitutability(
    hierarchy: IcdHierarchy, codes: list[str] | None = None
) -> tuple[sp.csr_matrix, list[str]]:
    """Similarity matrix J over the leaf codes (or a given code list).

    Returns (J, code order). J is symmetric with unit diagonal, entries in
    [0, 1], and zero across chapters.
    """
    if codes is None:
        codes = hierarchy.leaf_codes()
    by_chapter: dict[str, list[int]] = {}
    for i, code in enumerate(codes):
        by_chapter.setdefault(hierarchy.chapter_of(code), []).append(i)

    tokens = [description_tokens(hierarchy, code) for code in codes]
    n = len(codes)
    J = sp.lil_matrix((n, n))
    for members in by_chapter.values():
        for a_pos, i in enumerate(members):
            J[i, i] = 1.0
            for j in members[a_pos + 1:]:
                s = jaccard(tokens[i], tokens[j])
                if s > 0.0:
                    J[i, j] = s
                    J[j, i] = s
    return J.tocsr(), list(codes)


def apply_substitutability(X_icd, J) -> sp.csr_matrix:
    """Sparse-aware product X_icd @ J."""
    X = sp.csr_matrix(X_icd)
    J = sp.csr_matrix(J)
    if X.shape[1] != J.shape[0]:
        raise InputError(f"dimension mismatch: X has {X.shape[1]} columns, J is {J.shape[0]}x{J.shape[1]}")
    return (X @ J).tocsr()


def build_feature_matrix(
    profiles: list[ProviderProfile],
    hierarchy: IcdHierarchy,
    normalize_rows: bool = True,
) -> tuple[np.ndarray, list[str], list[str]]:
    """Provider-by-ICD matrix smoothed by substitutability.

    Rows are L1-normalized before smoothing when normalize_rows is set
    (default), so claim volume does not dominate the geometry.
    Returns (dense X_sim, provider ids, code order).
    """
    J, codes = build_substitutability(hierarchy)
    code_idx = {c: i for i, c in enumerate(codes)}
    providers = [p.provider_id for p in profiles]
    X = sp.lil_matrix((len(profiles), len(codes)))
    for r, profile in enumerate(profiles):
        for code, count in profile.icd_counts.items():
            if code not in code_idx:
                raise InputError(f"provider {profile.provider_id} uses unknown ICD code {code}")
            X[r, code_idx[code]] = float(count)
    X = X.tocsr()
    if normalize_rows:
        sums = np.asarray(X.sum(axis=1)).ravel()
        sums[sums == 0.0] = 1.0
        X = sp.diags(1.0 / sums) @ X
    X_sim = apply_substitutability(X, J)
    return np.asarray(X_sim.todense()), providers, codes
