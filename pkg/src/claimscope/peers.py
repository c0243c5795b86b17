"""Contextual detector: DRG excess spending against similarity-weighted peers.

Peers are providers whose MDC (services) or chronic-condition (population)
profile sits within Hellinger similarity tau. A provider's DRG frequency
vector is contrasted with the claim-count- and similarity-weighted summary of
its peers' vectors; pricing each frequency gap by the DRG's average base cost
gives dollars of excess spending per claim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConsistencyError, InputError
from .fusion import RankList
from .model import DrgCostTable, ProviderProfile

BASES = ("MDC", "CHRONIC")

_SUM_TOL = 1e-9


@dataclass
class PeerGroup:
    provider_id: str
    basis: str
    peers: list[tuple[str, float]]  # (peer id, similarity), similarity descending
    tau: float

    @property
    def nearest_peer(self) -> str | None:
        return self.peers[0][0] if self.peers else None


@dataclass
class ExcessReport:
    provider_id: str
    basis: str
    excess_per_claim: float
    # (drg, provider freq, peer freq, avg cost, contribution), |contribution| descending
    drg_discrepancies: list[tuple[str, float, float, float, float]]


def hellinger_distance(p, q) -> float:
    """(1/sqrt(2)) * ||sqrt(p) - sqrt(q)||_2 for aligned probability vectors."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise InputError("probability vectors have different lengths")
    for name, v in (("p", p), ("q", q)):
        if np.any(v < 0):
            raise InputError(f"{name} has negative entries")
        if abs(v.sum() - 1.0) > _SUM_TOL:
            raise InputError(f"{name} does not sum to 1 (sum={v.sum()!r})")
    return float(np.linalg.norm(np.sqrt(p) - np.sqrt(q)) / np.sqrt(2.0))


def _profile_vectors(profiles: list[ProviderProfile], basis: str) -> tuple[np.ndarray, list[str]]:
    if basis == "MDC":
        dists = [p.mdc_dist for p in profiles]
    elif basis == "CHRONIC":
        dists = [p.chronic_dist for p in profiles]
    else:
        raise InputError(f"unknown peer basis {basis!r}; expected one of {BASES}")
    keys = sorted({k for d in dists for k in d})
    M = np.zeros((len(profiles), len(keys)))
    idx = {k: i for i, k in enumerate(keys)}
    for r, d in enumerate(dists):
        for k, v in d.items():
            M[r, idx[k]] = v
    return M, keys


def pairwise_similarities(profiles: list[ProviderProfile], basis: str) -> np.ndarray:
    """Similarity matrix 1 - d_jk over the aligned basis distributions."""
    M, _ = _profile_vectors(profiles, basis)
    sums = M.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > _SUM_TOL):
        bad = [profiles[i].provider_id for i in np.flatnonzero(np.abs(sums - 1.0) > _SUM_TOL)]
        raise InputError(f"profiles with non-normalized {basis} distribution: {bad[:5]}")
    S = np.sqrt(M)
    gram = np.clip(S @ S.T, 0.0, 1.0)
    d = np.sqrt(np.clip(1.0 - gram, 0.0, 1.0))
    np.fill_diagonal(d, 0.0)
    return 1.0 - d


def build_peer_groups(
    profiles: list[ProviderProfile],
    basis: str,
    tau: float = 0.8,
    min_peers: int = 5,
) -> list[PeerGroup]:
    """Peers of j are all k != j with similarity >= tau.

    Groups smaller than min_peers are still returned; ranking marks those
    providers unranked for this basis.
    """
    sims = pairwise_similarities(profiles, basis)
    groups = []
    for j, profile in enumerate(profiles):
        peers = [(profiles[k].provider_id, float(sims[j, k]))
                 for k in range(len(profiles))
                 if k != j and sims[j, k] >= tau]
        peers.sort(key=lambda kv: (-kv[1], kv[0]))
        groups.append(PeerGroup(profile.provider_id, basis, peers, tau))
    return groups


def peer_summary(
    group: PeerGroup,
    drg_dists: dict[str, dict[str, float]],
    claim_counts: dict[str, int],
    drg_index: list[str],
) -> np.ndarray:
    """Similarity- and volume-weighted mixture of the peers' DRG distributions."""
    if not group.peers:
        raise InputError(f"provider {group.provider_id} has no peers")
    idx = {d: i for i, d in enumerate(drg_index)}
    q = np.zeros(len(drg_index))
    Z = 0.0
    for peer_id, sim in group.peers:
        n_k = claim_counts[peer_id]
        weight = n_k * sim
        Z += weight
        for drg, freq in drg_dists[peer_id].items():
            q[idx[drg]] += weight * freq
    if Z <= 0.0:
        raise ConsistencyError("peer weights sum to zero despite tau > 0")
    return q / Z


def excess_spending(
    provider_id: str,
    basis: str,
    p: np.ndarray,
    q: np.ndarray,
    costs: DrgCostTable,
    drg_index: list[str],
) -> ExcessReport:
    """Dollar-weighted frequency gap: sum over DRGs of cost * (p - q)."""
    missing = [d for i, d in enumerate(drg_index)
               if (p[i] != 0.0 or q[i] != 0.0) and d not in costs]
    if missing:
        raise ConfigError(f"DRGs missing from cost table: {missing[:5]}")
    rows = []
    excess = 0.0
    for i, drg in enumerate(drg_index):
        if p[i] == q[i]:
            continue
        cost = costs[drg]
        contribution = cost * (p[i] - q[i])
        excess += contribution
        rows.append((drg, float(p[i]), float(q[i]), float(cost), float(contribution)))
    rows.sort(key=lambda r: (-abs(r[4]), r[0]))
    return ExcessReport(provider_id=provider_id, basis=basis,
                        excess_per_claim=float(excess), drg_discrepancies=rows)


def rank_by_excess(
    reports: list[ExcessReport], unranked: list[str], basis: str
) -> tuple[RankList, list[str]]:
    """Ranked providers by excess descending; unranked ids come back separately
    (they are appended to the emitted file but never vote in fusion)."""
    ordered = sorted(reports, key=lambda r: (-r.excess_per_claim, r.provider_id))
    source = f"PEER_{basis}"
    ranked = RankList(source=source,
                      entries=[r.provider_id for r in ordered],
                      scores=[r.excess_per_claim for r in ordered])
    return ranked, sorted(unranked)


def contrastive_explain(report: ExcessReport, top_k: int = 50) -> dict:
    """Side-by-side provider-vs-peer DRG frequencies for the largest gaps."""
    rows = report.drg_discrepancies[:top_k]
    return {
        "provider_id": report.provider_id,
        "basis": report.basis,
        "excess_per_claim_usd": report.excess_per_claim,
        "top_drgs": [
            {"drg": d, "provider_freq": p, "peer_freq": q,
             "avg_cost_usd": c, "contribution_usd": x}
            for d, p, q, c, x in rows
        ],
        "residual_contribution_usd": float(
            sum(r[4] for r in report.drg_discrepancies[top_k:])),
    }


def run_peer_detector(
    profiles: list[ProviderProfile],
    costs: DrgCostTable,
    basis: str,
    tau: float = 0.8,
    min_peers: int = 5,
) -> tuple[RankList, list[str], dict[str, ExcessReport], dict[str, PeerGroup]]:
    """Full pass for one basis: groups, summaries, excess reports, ranking."""
    groups = build_peer_groups(profiles, basis, tau=tau, min_peers=min_peers)
    drg_index = sorted({d for p in profiles for d in p.drg_dist})
    idx = {d: i for i, d in enumerate(drg_index)}
    drg_dists = {p.provider_id: p.drg_dist for p in profiles}
    claim_counts = {p.provider_id: p.n_claims for p in profiles}

    reports = {}
    unranked = []
    for group, profile in zip(groups, profiles):
        if len(group.peers) < min_peers:
            unranked.append(profile.provider_id)
            continue
        q = peer_summary(group, drg_dists, claim_counts, drg_index)
        p_vec = np.zeros(len(drg_index))
        for drg, freq in profile.drg_dist.items():
            p_vec[idx[drg]] = freq
        reports[profile.provider_id] = excess_spending(
            profile.provider_id, basis, p_vec, q, costs, drg_index)
    ranked, unranked = rank_by_excess(list(reports.values()), unranked, basis)
    return ranked, unranked, reports, {g.provider_id: g for g in groups}
