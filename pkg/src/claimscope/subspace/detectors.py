"""Five subspace outlier detectors over the smoothed provider-by-ICD matrix.

All scores are oriented so that higher means more anomalous. Randomized
detectors draw per-component generators from a spawned seed sequence, so
scores are bit-identical for a fixed seed regardless of execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..fusion import RankList, irv_aggregate

DETECTOR_NAMES = ("SOD", "IF", "RRCF", "LODA", "RSHASH")

_EULER_GAMMA = 0.5772156649015329


@dataclass
class DetectorScores:
    detector: str
    scores: np.ndarray
    seed: int | None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        if not np.all(np.isfinite(self.scores)):
            raise InputError(f"{self.detector}: scores contain non-finite values")


def _check_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InputError("detector input must be a 2-D matrix with at least 2 rows")
    return X


# ---------------------------------------------------------------------------
# Subspace outlier degree
# ---------------------------------------------------------------------------

def sod_scores(
    X,
    k_shared_nn: int = 20,
    ref_set_size: int = 20,
    variance_threshold: float = 0.8,
) -> DetectorScores:
    """Deviation from the shared-nearest-neighbor reference set, restricted to
    the low-variance dimensions of that set.

    For each point: k nearest neighbors define a candidate pool; the reference
    set is the ref_set_size points with the largest nearest-neighbor overlap.
    Dimensions whose variance within the reference set falls below
    variance_threshold times the mean variance span the local subspace, and
    the score is the RMS deviation from the reference mean inside it. A fully
    degenerate reference set yields score 0.
    """
    X = _check_matrix(X)
    n, d = X.shape
    if n <= ref_set_size:
        raise InputError(f"need more than ref_set_size={ref_set_size} points, got {n}")
    k = min(k_shared_nn, n - 1)
    ref = min(ref_set_size, n - 1)

    sq = np.einsum("ij,ij->i", X, X)
    D2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.fill_diagonal(D2, np.inf)

    member = np.zeros((n, n), dtype=np.int32)
    order = np.argsort(D2, axis=1, kind="stable")
    rows = np.repeat(np.arange(n), k)
    member[rows, order[:, :k].ravel()] = 1
    snn = member @ member.T

    scores = np.zeros(n)
    idx = np.arange(n)
    for i in range(n):
        sim = snn[i].copy()
        sim[i] = -1
        pool = sorted(idx, key=lambda j: (-sim[j], j))[:ref]
        R = X[pool]
        mu = R.mean(axis=0)
        var = R.var(axis=0)
        mean_var = var.mean()
        subspace = var < variance_threshold * mean_var
        m = int(subspace.sum())
        if mean_var <= 0.0 or m == 0:
            continue
        dev = X[i, subspace] - mu[subspace]
        scores[i] = math.sqrt(float(dev @ dev) / m)
    return DetectorScores("SOD", scores, seed=None,
                          params={"k_shared_nn": k, "ref_set_size": ref,
                                  "variance_threshold": variance_threshold})


# ---------------------------------------------------------------------------
# Isolation forest
# ---------------------------------------------------------------------------

def average_path_length(n: int) -> float:
    """Expected unsuccessful-search depth in a random binary search tree of n points."""
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    harmonic = math.log(n - 1) + _EULER_GAMMA
    return 2.0 * harmonic - 2.0 * (n - 1) / n


def _build_itree(X, points, rng, depth, limit):
    if len(points) <= 1 or depth >= limit:
        return (len(points),)
    sub = X[points]
    lo, hi = sub.min(axis=0), sub.max(axis=0)
    splittable = np.flatnonzero(hi > lo)
    if splittable.size == 0:
        return (len(points),)
    dim = int(splittable[rng.integers(0, splittable.size)])
    cut = float(rng.uniform(lo[dim], hi[dim]))
    mask = sub[:, dim] < cut
    if not mask.any() or mask.all():
        mask = sub[:, dim] <= lo[dim]
    left = _build_itree(X, points[mask], rng, depth + 1, limit)
    right = _build_itree(X, points[~mask], rng, depth + 1, limit)
    return (dim, cut, left, right)


def _itree_depth(tree, x) -> float:
    depth = 0
    while len(tree) == 4:
        dim, cut, left, right = tree
        tree = left if x[dim] < cut else right
        depth += 1
    return depth + average_path_length(tree[0])


def iforest_scores(X, n_trees: int = 200, subsample: int = 256, seed: int = 0) -> DetectorScores:
    """Isolation-forest score 2^(-E[h]/c(psi)) with the standard unsplit-node
    depth adjustment c(.) at truncated leaves."""
    X = _check_matrix(X)
    n = X.shape[0]
    if subsample < 2:
        raise InputError("subsample must be >= 2")
    psi = min(subsample, n)
    limit = math.ceil(math.log2(psi))
    streams = np.random.SeedSequence(seed).spawn(n_trees)
    depths = np.zeros(n)
    for stream in streams:
        rng = np.random.default_rng(stream)
        sample = rng.choice(n, size=psi, replace=False)
        tree = _build_itree(X, sample, rng, 0, limit)
        for i in range(n):
            depths[i] += _itree_depth(tree, X[i])
    expected = depths / n_trees
    scores = np.power(2.0, -expected / average_path_length(psi))
    return DetectorScores("IF", scores, seed=seed,
                          params={"n_trees": n_trees, "subsample": psi})


# ---------------------------------------------------------------------------
# Robust random cut forest
# ---------------------------------------------------------------------------

def _build_rctree(X, points, rng):
    sub = X[points]
    lo, hi = sub.min(axis=0), sub.max(axis=0)
    lengths = hi - lo
    total = float(lengths.sum())
    if len(points) <= 1 or total <= 0.0:
        return {"size": len(points), "points": points}
    r = float(rng.uniform(0.0, total))
    cum = np.cumsum(lengths)
    dim = int(np.searchsorted(cum, r, side="right"))
    dim = min(dim, len(lengths) - 1)
    prev = float(cum[dim - 1]) if dim > 0 else 0.0
    cut = float(lo[dim] + (r - prev))
    mask = sub[:, dim] <= cut
    if mask.all():
        mask = sub[:, dim] < hi[dim]
    left = _build_rctree(X, points[mask], rng)
    right = _build_rctree(X, points[~mask], rng)
    return {"size": len(points), "left": left, "right": right}


def _collect_codisp(node, best, out):
    if "points" in node:
        for p in node["points"]:
            out[p] = best
        return
    left, right = node["left"], node["right"]
    _collect_codisp(left, max(best, right["size"] / left["size"]), out)
    _collect_codisp(right, max(best, left["size"] / right["size"]), out)


def rrcf_scores(X, n_trees: int = 200, subsample: int = 256, seed: int = 0) -> DetectorScores:
    """Average collusive displacement over random cut trees.

    Cut dimensions are chosen proportionally to bounding-box side length. Each
    tree scores the points of its own sample; a point's score averages over
    the trees that sampled it. Duplicate points share multi-point leaves.
    """
    X = _check_matrix(X)
    n = X.shape[0]
    if subsample < 2:
        raise InputError("subsample must be >= 2")
    psi = min(subsample, n)
    streams = np.random.SeedSequence(seed).spawn(n_trees)
    totals = np.zeros(n)
    counts = np.zeros(n)
    for stream in streams:
        rng = np.random.default_rng(stream)
        sample = rng.choice(n, size=psi, replace=False)
        tree = _build_rctree(X, sample, rng)
        codisp: dict[int, float] = {}
        _collect_codisp(tree, 0.0, codisp)
        for p, v in codisp.items():
            totals[p] += v
            counts[p] += 1
    scores = np.divide(totals, counts, out=np.zeros(n), where=counts > 0)
    return DetectorScores("RRCF", scores, seed=seed,
                          params={"n_trees": n_trees, "subsample": psi})


# ---------------------------------------------------------------------------
# LODA
# ---------------------------------------------------------------------------

def _fd_bin_count(values: np.ndarray) -> int:
    n = len(values)
    q75, q25 = np.percentile(values, [75.0, 25.0])
    iqr = q75 - q25
    span = float(values.max() - values.min())
    if iqr <= 0.0 or span <= 0.0:
        return max(1, math.ceil(math.sqrt(n)))
    width = 2.0 * iqr / n ** (1.0 / 3.0)
    return int(np.clip(math.ceil(span / width), 1, 10_000))


def loda_scores(X, n_projections: int = 100, seed: int = 0,
                epsilon: float | None = None) -> DetectorScores:
    """Mean negative log of leave-one-out bin probability over sparse random
    1-D projections.

    Each projection keeps sqrt(d) unit-normal coordinates; histogram bin
    counts follow a Freedman-Diaconis-style rule. A point alone in its bin
    has probability 0 and is floored at epsilon (default 1/(10n)).
    Zero-variance projections are skipped.
    """
    X = _check_matrix(X)
    n, d = X.shape
    if n_projections < 1:
        raise InputError("n_projections must be >= 1")
    if epsilon is None:
        epsilon = 1.0 / (10.0 * n)
    k = max(1, int(round(math.sqrt(d))))
    streams = np.random.SeedSequence(seed).spawn(n_projections)
    totals = np.zeros(n)
    used = 0
    for stream in streams:
        rng = np.random.default_rng(stream)
        nonzero = rng.choice(d, size=k, replace=False)
        w = np.zeros(d)
        w[nonzero] = rng.standard_normal(k)
        z = X @ w
        if z.max() <= z.min():
            continue
        bins = _fd_bin_count(z)
        edges = np.linspace(z.min(), z.max(), bins + 1)
        idx = np.clip(np.searchsorted(edges, z, side="right") - 1, 0, bins - 1)
        counts = np.bincount(idx, minlength=bins)
        loo = (counts[idx] - 1) / (n - 1)
        totals += -np.log(np.maximum(loo, epsilon))
        used += 1
    scores = totals / used if used else np.zeros(n)
    return DetectorScores("LODA", scores, seed=seed,
                          params={"n_projections": n_projections, "used": used,
                                  "epsilon": epsilon})


# ---------------------------------------------------------------------------
# RS hash
# ---------------------------------------------------------------------------

def rshash_scores(X, n_hashes: int = 200, sample_size: int | None = None,
                  seed: int = 0) -> DetectorScores:
    """Grid-cell sparsity in random subspaces over random samples.

    Per component: sample points, pick a random subspace and a randomly
    offset grid (cell width is a random fraction of the sample's min-max
    span), then count sampled points per cell. A point scores
    -log(1 + count of its cell among sampled points, excluding itself), so
    an empty cell scores 0, the maximum.
    """
    X = _check_matrix(X)
    n, d = X.shape
    if sample_size is None or sample_size <= 0:
        sample_size = min(n, 1000)
    if sample_size > n:
        raise InputError(f"sample_size {sample_size} exceeds n={n}")
    streams = np.random.SeedSequence(seed).spawn(n_hashes)
    totals = np.zeros(n)
    r_high = max(1, int(round(math.sqrt(d))))
    for stream in streams:
        rng = np.random.default_rng(stream)
        sample = rng.choice(n, size=sample_size, replace=False)
        in_sample = np.zeros(n, dtype=bool)
        in_sample[sample] = True
        f = float(rng.uniform(1.0 / math.sqrt(sample_size),
                              1.0 - 1.0 / math.sqrt(sample_size)))
        r = int(rng.integers(1, r_high + 1))
        dims = rng.choice(d, size=min(r, d), replace=False)
        lo = X[sample][:, dims].min(axis=0)
        span = X[sample][:, dims].max(axis=0) - lo
        keep = span > 0.0
        if not keep.any():
            # Every sampled point shares the single cell.
            c = np.full(n, sample_size, dtype=float)
            c[in_sample] -= 1.0
            totals += -np.log1p(c)
            continue
        dims = dims[keep]
        lo, span = lo[keep], span[keep]
        offsets = rng.uniform(0.0, f, size=len(dims))
        norm = (X[:, dims] - lo) / span
        cells = np.floor((norm + offsets) / f).astype(np.int64)
        cell_keys = [tuple(row) for row in cells]
        counts: dict[tuple, int] = {}
        for i in sample:
            counts[cell_keys[i]] = counts.get(cell_keys[i], 0) + 1
        c = np.fromiter((counts.get(key, 0) for key in cell_keys), dtype=float, count=n)
        c[in_sample] -= 1.0
        totals += -np.log1p(c)
    scores = totals / n_hashes
    return DetectorScores("RSHASH", scores, seed=seed,
                          params={"n_hashes": n_hashes, "sample_size": sample_size})


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

def run_all_detectors(X, seed: int = 0, params: dict | None = None) -> dict[str, DetectorScores]:
    """Run the five detectors with per-detector derived seeds."""
    p = params or {}
    base = np.random.SeedSequence(seed)
    seeds = [int(s.generate_state(1)[0]) for s in base.spawn(4)]
    return {
        "SOD": sod_scores(X,
                          k_shared_nn=p.get("sod_k", 20),
                          ref_set_size=p.get("sod_ref_size", 20),
                          variance_threshold=p.get("sod_var_threshold", 0.8)),
        "IF": iforest_scores(X, n_trees=p.get("if_trees", 200),
                             subsample=p.get("if_subsample", 256), seed=seeds[0]),
        "RRCF": rrcf_scores(X, n_trees=p.get("rrcf_trees", 200),
                            subsample=p.get("rrcf_subsample", 256), seed=seeds[1]),
        "LODA": loda_scores(X, n_projections=p.get("loda_projections", 100), seed=seeds[2]),
        "RSHASH": rshash_scores(X, n_hashes=p.get("rshash_hashes", 200),
                                sample_size=p.get("rshash_sample", 0) or None,
                                seed=seeds[3]),
    }


def scores_to_ranklist(provider_ids: list[str], scores: DetectorScores) -> RankList:
    if len(provider_ids) != len(scores.scores):
        raise InputError(f"{scores.detector}: {len(scores.scores)} scores for "
                         f"{len(provider_ids)} providers")
    order = sorted(range(len(provider_ids)),
                   key=lambda i: (-scores.scores[i], provider_ids[i]))
    return RankList(source=scores.detector,
                    entries=[provider_ids[i] for i in order],
                    scores=[float(scores.scores[i]) for i in order])


def fuse_subspace_rankings(
    provider_ids: list[str], detector_scores: dict[str, DetectorScores]
) -> tuple[RankList, list[RankList]]:
    """Fuse the five per-detector rankings into the subspace family ranking."""
    missing = set(DETECTOR_NAMES) - set(detector_scores)
    if missing:
        raise InputError(f"missing detector scores: {sorted(missing)}")
    lists = [scores_to_ranklist(provider_ids, detector_scores[name])
             for name in DETECTOR_NAMES]
    supports = {frozenset(lst.support) for lst in lists}
    if len(supports) != 1:
        raise InputError("detector rank lists cover different provider sets")
    fused, _ = irv_aggregate(lists)
    return RankList(source="SUBSPACE", entries=fused.entries), lists
