"""Deterministic synthetic claims corpus with planted billing anomalies.

The generator builds an honest world first (vocabularies, beneficiaries,
visits, claims) and then applies fraud perturbations as a separate seeded
post-pass over the chosen providers' claims. Keeping the two RNG streams
apart means a zero-severity perturbation leaves the honest files untouched,
which downstream property tests rely on.

Three archetypes are planted:
  upcoder      -- shifts claims to the next-pricier DRG in the same MDC and
                  tags a complication code to justify it
  rare_coder   -- injects low-frequency ICD codes tied to expensive DRGs
  excess_cost  -- inflates base payments with coding left untouched
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .model import Beneficiary, HistoryVisit, IcdNode, InpatientClaim
from .tableio import money, write_csv

ARCHETYPES = ("upcoder", "rare_coder", "excess_cost")

CHRONIC_CONDITIONS = (
    "diabetes", "heart_failure", "copd", "kidney_disease",
    "alzheimers", "arthritis", "depression", "hypertension",
)

_ORGANS = ("cardiac", "respiratory", "renal", "digestive", "neural",
           "skeletal", "hepatic", "vascular", "endocrine", "dermal")
_PATHOLOGIES = ("inflammatory", "degenerative", "infectious", "congenital",
                "traumatic", "neoplastic", "metabolic", "obstructive")
_QUALIFIERS = ("acute", "chronic", "recurrent", "unspecified",
               "mild", "severe", "intermittent", "complicated")
_SITES = ("proximal", "distal", "lateral", "medial", "anterior", "posterior")

_NAME_A = ("saint", "north", "south", "lake", "valley", "county",
           "general", "mercy", "unity", "grand")
_NAME_B = ("adams", "brook", "cedar", "dover", "elmwood", "fairview",
           "garner", "holden", "irving", "jasper", "keller", "linden")
_NAME_C = ("hospital", "medical center", "regional hospital", "health center")

_STATES = ("FL", "NY", "TX", "CA", "IL", "MA", "GA", "OH")

_OWNERSHIP = ("private", "government", "nonprofit")


@dataclass
class GenConfig:
    seed: int = 0
    n_providers: int = 200
    n_beneficiaries: int = 6000
    n_icd_codes: int = 240
    n_drg_codes: int = 60
    n_mdc: int = 6
    history_start: int = 2012
    target_year: int = 2017
    fraud_rate: float = 0.05
    fraud_archetypes: tuple[str, ...] = ARCHETYPES
    unlabeled_fraud_rate: float = 0.0
    severity_scale: float = 1.0
    payment_dispersion: float = 0.15
    visit_intensity: float = 1.0

    def validate(self) -> None:
        if not 0.0 <= self.fraud_rate <= 1.0:
            raise ConfigError(f"fraud_rate {self.fraud_rate} outside [0, 1]")
        if not 0.0 <= self.unlabeled_fraud_rate <= 1.0:
            raise ConfigError("unlabeled_fraud_rate outside [0, 1]")
        for name in ("n_providers", "n_beneficiaries", "n_icd_codes", "n_drg_codes", "n_mdc"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.target_year <= self.history_start:
            raise ConfigError("target_year must be after history_start")
        unknown = set(self.fraud_archetypes) - set(ARCHETYPES)
        if unknown:
            raise ConfigError(f"unknown archetypes: {sorted(unknown)}")
        if self.fraud_rate > 0 and self.fraud_archetypes:
            if self.fraud_rate * self.n_providers < 1:
                raise ConfigError(
                    "fraud_rate * n_providers < 1: no provider can be planted; "
                    "raise fraud_rate or n_providers"
                )
        if self.n_mdc > self.n_icd_codes:
            raise ConfigError("n_mdc cannot exceed n_icd_codes")
        if self.n_drg_codes < self.n_mdc:
            raise ConfigError("need at least one DRG per MDC")


@dataclass
class PlantedLabel:
    provider_id: str
    archetype: str
    severity: float


@dataclass
class ProviderRecord:
    provider_id: str
    name: str
    zip3: str
    state: str
    urban: bool
    rating: int
    ownership: str
    avg_length_of_stay: float
    mdc_mix: np.ndarray  # latent, over MDC index


@dataclass
class SyntheticCorpus:
    config: GenConfig
    claims: list[InpatientClaim]
    history_visits: list[HistoryVisit]
    beneficiaries: list[Beneficiary]
    providers: list[ProviderRecord]
    hierarchy_nodes: list[IcdNode]
    drg_mdc: dict[str, str]
    drg_prices: dict[str, float]  # configured per-DRG price basis (metadata)
    labels: list[PlantedLabel]
    hidden_labels: list[PlantedLabel] = field(default_factory=list)
    n_unique_patients: dict[str, int] = field(default_factory=dict)

    @property
    def mdc_codes(self) -> list[str]:
        return sorted(set(self.drg_mdc.values()))


# ---------------------------------------------------------------------------
# Vocabularies
# ---------------------------------------------------------------------------

def _build_hierarchy(cfg: GenConfig) -> tuple[list[IcdNode], dict[str, list[str]]]:
    """Chapter/block/full-code forest with token-sharing descriptions.

    Returns the node list and a per-chapter dict of full codes in index order.
    """
    nodes: list[IcdNode] = []
    chapter_codes: dict[str, list[str]] = {}
    per_chapter = [cfg.n_icd_codes // cfg.n_mdc] * cfg.n_mdc
    for i in range(cfg.n_icd_codes % cfg.n_mdc):
        per_chapter[i] += 1
    for m in range(cfg.n_mdc):
        organ = _ORGANS[m % len(_ORGANS)]
        chapter = f"CH{m:02d}"
        nodes.append(IcdNode(chapter, None, "chapter",
                             f"{organ} system diseases"))
        codes = []
        n_codes = per_chapter[m]
        block_size = 8
        for b in range((n_codes + block_size - 1) // block_size):
            pathology = _PATHOLOGIES[b % len(_PATHOLOGIES)]
            block = f"{chapter}-B{b}"
            nodes.append(IcdNode(block, chapter, "block",
                                 f"{organ} {pathology} group{m:02d}{b}"))
            for k in range(b * block_size, min((b + 1) * block_size, n_codes)):
                qualifier = _QUALIFIERS[k % len(_QUALIFIERS)]
                site = _SITES[(k // len(_QUALIFIERS)) % len(_SITES)]
                code = f"{chapter}-B{b}-{k:03d}"
                nodes.append(IcdNode(code, block, "full-code",
                                     f"{qualifier} {site} {organ} {pathology} t{m:02d}{k:03d}"))
                codes.append(code)
        chapter_codes[chapter] = codes
    return nodes, chapter_codes


def _partition_roles(codes: list[str]) -> tuple[list[str], list[str], list[str]]:
    """Split a chapter's codes into (core, complication, rare) pools."""
    n = len(codes)
    n_rare = max(1, n // 10) if n >= 3 else 0
    n_comp = max(1, n // 10) if n >= 3 else 0
    core = codes[: n - n_rare - n_comp] or codes
    comp = codes[n - n_rare - n_comp: n - n_rare] or codes[-1:]
    rare = codes[n - n_rare:] or codes[-1:]
    return core, comp, rare


def _build_drgs(cfg: GenConfig, rng: np.random.Generator):
    """DRG list with MDC assignment, price basis, and per-MDC price ordering."""
    drgs = [f"DRG{i:03d}" for i in range(cfg.n_drg_codes)]
    drg_mdc = {d: f"MDC{i % cfg.n_mdc:02d}" for i, d in enumerate(drgs)}
    prices = {d: money(rng.lognormal(np.log(8000.0), 0.5)) for d in drgs}
    by_mdc: dict[str, list[str]] = {}
    for d in drgs:
        by_mdc.setdefault(drg_mdc[d], []).append(d)
    for mdc in by_mdc:
        by_mdc[mdc].sort(key=lambda d: (prices[d], d))
        # Guarantee strictly increasing prices so every upcode target is pricier.
        ordered = by_mdc[mdc]
        for i in range(1, len(ordered)):
            if prices[ordered[i]] <= prices[ordered[i - 1]]:
                prices[ordered[i]] = money(prices[ordered[i - 1]] * 1.05 + 1.0)
        # Equalize the draw-weighted mean price across MDCs so specialty mix
        # alone carries no expenditure signal; the within-MDC ladder is what
        # matters. Weights mirror the claim DRG draw at unit severity.
        k = np.arange(len(ordered))
        w = 0.85 ** k * np.exp(0.8 * k / max(1, len(ordered) - 1))
        w /= w.sum()
        mean = float(sum(wk * prices[d] for wk, d in zip(w, ordered)))
        for d in ordered:
            prices[d] = money(prices[d] * 9000.0 / mean)
    return drgs, drg_mdc, prices, by_mdc


# ---------------------------------------------------------------------------
# Corpus generation
# ---------------------------------------------------------------------------

def generate_corpus(config: GenConfig) -> SyntheticCorpus:
    config.validate()
    ss = np.random.SeedSequence(config.seed)
    (s_vocab, s_prov, s_bene, s_visits, s_claims,
     s_fraud_pick, s_fraud_perturb) = [np.random.default_rng(c) for c in ss.spawn(7)]

    nodes, chapter_codes = _build_hierarchy(config)
    chapters = sorted(chapter_codes)
    roles = {ch: _partition_roles(chapter_codes[ch]) for ch in chapters}
    drgs, drg_mdc, prices, drg_by_mdc = _build_drgs(config, s_vocab)
    mdcs = sorted(drg_by_mdc)

    # DRG -> (code pool for claims) within its chapter's core codes.
    drg_pool: dict[str, list[str]] = {}
    for mi, mdc in enumerate(mdcs):
        core = roles[chapters[mi]][0]
        ordered = drg_by_mdc[mdc]
        width = max(4, len(core) // max(1, len(ordered)) + 2)
        for j, d in enumerate(ordered):
            start = (j * len(core)) // len(ordered)
            drg_pool[d] = [core[(start + t) % len(core)] for t in range(min(width, len(core)))]

    # Rare code -> expensive DRG of the same MDC.
    rare_map: dict[str, str] = {}
    for mi, mdc in enumerate(mdcs):
        rare = roles[chapters[mi]][2]
        ordered = drg_by_mdc[mdc]
        for k, code in enumerate(rare):
            rare_map[code] = ordered[len(ordered) - 1 - (k % min(2, len(ordered)))]

    n_zips = max(4, min(24, config.n_providers // 8 or 4))
    zips = [f"{i:03d}" for i in range(n_zips)]
    zip_state = {z: _STATES[i % len(_STATES)] for i, z in enumerate(zips)}
    zip_factor = {z: float(s_vocab.uniform(0.9, 1.15)) for z in zips}

    providers = _make_providers(config, s_prov, zips, zip_state, mdcs)
    benes, severity, home = _make_beneficiaries(config, s_bene, providers, zips)
    history_visits = _make_history(config, s_visits, benes, severity, roles, chapters)
    claims = _make_claims(config, s_claims, benes, severity, home, providers,
                          drg_by_mdc, prices, drg_pool, roles, chapters, zip_factor, mdcs)

    labels, hidden = _plant_fraud(config, s_fraud_pick, s_fraud_perturb, providers,
                                  claims, drg_by_mdc, prices, drg_mdc, rare_map, roles,
                                  chapters, mdcs)

    uniq: dict[str, set] = {p.provider_id: set() for p in providers}
    for c in claims:
        uniq[c.provider_id].add(c.beneficiary_id)

    return SyntheticCorpus(
        config=config,
        claims=claims,
        history_visits=history_visits,
        beneficiaries=benes,
        providers=providers,
        hierarchy_nodes=nodes,
        drg_mdc=drg_mdc,
        drg_prices=prices,
        labels=labels,
        hidden_labels=hidden,
        n_unique_patients={p: len(s) for p, s in uniq.items()},
    )


def _make_providers(cfg, rng, zips, zip_state, mdcs) -> list[ProviderRecord]:
    # Specialty templates: one main MDC and one secondary, with every template
    # spilling into the shared "general" MDC 0. Few active coordinates keep
    # within-cohort Hellinger distances small at realistic claim volumes.
    k = len(mdcs)
    n_templates = max(1, k - 1)
    templates = []
    for t in range(n_templates):
        w = np.zeros(k)
        w[0] += 0.17
        w[1 + t if k > 1 else 0] += 0.55
        w[1 + (t + 1) % (k - 1) if k > 1 else 0] += 0.28
        templates.append(w / w.sum())
    providers = []
    for j in range(cfg.n_providers):
        zip3 = zips[j % len(zips)]
        template = templates[j % n_templates]
        mix = rng.dirichlet(template * 300.0 + 0.2)
        name = (f"{_NAME_A[j % len(_NAME_A)]} "
                f"{_NAME_B[(j // len(_NAME_A)) % len(_NAME_B)]} "
                f"{_NAME_C[j % len(_NAME_C)]} {j:03d}")
        providers.append(ProviderRecord(
            provider_id=f"P{j:04d}",
            name=name,
            zip3=zip3,
            state=zip_state[zip3],
            urban=bool(j % 3 != 0),
            rating=int(rng.integers(1, 6)),
            ownership=_OWNERSHIP[int(rng.integers(0, len(_OWNERSHIP)))],
            avg_length_of_stay=float(np.round(rng.lognormal(np.log(4.5), 0.25), 2)),
            mdc_mix=mix,
        ))
    return providers


def _make_beneficiaries(cfg, rng, providers, zips):
    """Beneficiary table plus latent severity and home-provider assignment.

    The first 12 rounds of beneficiaries are assigned round-robin so every
    provider is guaranteed more than 10 distinct patients and survives the
    small-provider filter.
    """
    by_zip: dict[str, list[int]] = {}
    for idx, p in enumerate(providers):
        by_zip.setdefault(p.zip3, []).append(idx)
    benes = []
    severity = np.empty(cfg.n_beneficiaries)
    home = np.empty(cfg.n_beneficiaries, dtype=int)
    guaranteed = min(cfg.n_beneficiaries, 12 * cfg.n_providers)
    for i in range(cfg.n_beneficiaries):
        if i < guaranteed:
            home[i] = i % cfg.n_providers
        else:
            z = zips[int(rng.integers(0, len(zips)))]
            local = by_zip.get(z, [])
            if local and rng.random() < 0.8:
                home[i] = local[int(rng.integers(0, len(local)))]
            else:
                home[i] = int(rng.integers(0, cfg.n_providers))
        prov_zip = providers[home[i]].zip3
        zip3 = prov_zip if rng.random() < 0.8 else zips[int(rng.integers(0, len(zips)))]
        if rng.random() < 0.95:
            age = int(rng.integers(70, 96))
        else:
            age = int(rng.integers(66, 70))  # excluded later; exercises the age filter
        severity[i] = rng.gamma(2.0, 0.5)
        flags = {}
        for cond in CHRONIC_CONDITIONS:
            p = min(0.85, 0.10 + 0.20 * severity[i] * _AFFINITY.get(cond, 1.0))
            flags[cond] = int(rng.random() < p)
        benes.append(Beneficiary(
            beneficiary_id=f"B{i:06d}",
            birth_year=cfg.target_year - age,
            zip3=zip3,
            chronic_flags=flags,
        ))
    return benes, severity, home


# Per-condition severity affinity; fixed so beneficiary generation stays
# a single-stream operation (values chosen once, not per corpus).
_AFFINITY = {cond: 0.6 + 0.1 * i for i, cond in enumerate(CHRONIC_CONDITIONS)}


def _make_history(cfg, rng, benes, severity, roles, chapters) -> list[HistoryVisit]:
    rates = {"physician": 2.2, "outpatient": 1.3, "inpatient": 0.25}
    all_core = np.array([c for ch in chapters for c in roles[ch][0]])
    code_index = {c: i for i, c in enumerate(all_core)}
    visits = []
    for i, bene in enumerate(benes):
        sev = severity[i]
        weights = np.ones(len(all_core))
        for cond in CHRONIC_CONDITIONS:
            if bene.chronic_flags.get(cond):
                for code in _chronic_codes(cond, roles, chapters):
                    weights[code_index[code]] += 6.0
        probs = weights / weights.sum()
        for year in range(cfg.target_year - 5, cfg.target_year):
            for vtype, rate in rates.items():
                lam = rate * cfg.visit_intensity * (0.4 + 0.6 * sev)
                for _ in range(int(rng.poisson(lam))):
                    k = 1 + min(3, int(rng.poisson(1.0)))
                    picks = rng.choice(len(all_core), size=k, replace=True, p=probs)
                    codes = sorted({str(all_core[t]) for t in picks})
                    visits.append(HistoryVisit(bene.beneficiary_id, vtype, year, codes))
    return visits


def _chronic_codes(cond: str, roles, chapters) -> list[str]:
    ci = CHRONIC_CONDITIONS.index(cond)
    core = roles[chapters[ci % len(chapters)]][0]
    step = max(1, len(core) // 4)
    return [core[(ci + t * step) % len(core)] for t in range(min(4, len(core)))]


def _make_claims(cfg, rng, benes, severity, home, providers, drg_by_mdc, prices,
                 drg_pool, roles, chapters, zip_factor, mdcs) -> list[InpatientClaim]:
    claims = []
    claim_no = 0
    for i, bene in enumerate(benes):
        sev = severity[i]
        n_claims = 1 + int(min(3, rng.poisson(0.8)))
        prov_idx = int(home[i])
        for v in range(n_claims):
            if v > 0 and rng.random() >= 0.7:
                prov_idx = int(rng.integers(0, len(providers)))
            prov = providers[prov_idx]
            mdc = mdcs[int(rng.choice(len(mdcs), p=prov.mdc_mix))]
            ordered = drg_by_mdc[mdc]
            k = np.arange(len(ordered))
            w = 0.85 ** k * np.exp(0.8 * sev * k / max(1, len(ordered) - 1))
            drg = ordered[int(rng.choice(len(ordered), p=w / w.sum()))]

            n_core = 2 + int(min(3, rng.poisson(1.0)))
            pool = drg_pool[drg]
            codes = {str(c) for c in rng.choice(pool, size=min(n_core, len(pool)), replace=True)}
            flagged = [c for c in CHRONIC_CONDITIONS if bene.chronic_flags.get(c)]
            if flagged and rng.random() < 0.5:
                cond = flagged[int(rng.integers(0, len(flagged)))]
                linked = _chronic_codes(cond, roles, chapters)
                codes.add(linked[int(rng.integers(0, len(linked)))])
            if rng.random() < 0.03:
                rare = roles[chapters[mdcs.index(mdc)]][2]
                codes.add(rare[int(rng.integers(0, len(rare)))])

            noise = float(np.exp(cfg.payment_dispersion * rng.standard_normal()
                                 - cfg.payment_dispersion ** 2 / 2))
            base = money(prices[drg] * zip_factor[prov.zip3] * noise)
            disp = money(base * rng.uniform(0.0, 0.15)) if rng.random() < 0.35 else 0.0
            educ = money(base * rng.uniform(0.0, 0.08)) if rng.random() < 0.25 else 0.0
            outl = money(base * rng.uniform(0.0, 0.20)) if rng.random() < 0.10 else 0.0
            claims.append(InpatientClaim(
                claim_id=f"C{claim_no:07d}",
                beneficiary_id=bene.beneficiary_id,
                provider_id=prov.provider_id,
                year=cfg.target_year,
                drg=drg,
                icd_codes=sorted(codes),
                total_payment=money(base + disp + educ + outl),
                disproportionate_amount=disp,
                education_amount=educ,
                outlier_amount=outl,
            ))
            claim_no += 1
    return claims


# ---------------------------------------------------------------------------
# Fraud post-pass
# ---------------------------------------------------------------------------

def _rescale_payment(claim: InpatientClaim, factor: float) -> None:
    base = money((claim.total_payment
                  - claim.disproportionate_amount
                  - claim.education_amount
                  - claim.outlier_amount) * factor)
    claim.total_payment = money(base + claim.disproportionate_amount
                                + claim.education_amount + claim.outlier_amount)


def _plant_fraud(cfg, rng_pick, rng, providers, claims, drg_by_mdc, prices,
                 drg_mdc, rare_map, roles, chapters, mdcs):
    n_fraud = int(round(cfg.fraud_rate * cfg.n_providers)) if cfg.fraud_rate > 0 else 0
    n_hidden = int(round(cfg.unlabeled_fraud_rate * cfg.n_providers))
    if (n_fraud == 0 or not cfg.fraud_archetypes) and n_hidden == 0:
        return [], []

    picked = rng_pick.choice(cfg.n_providers, size=min(cfg.n_providers, n_fraud + n_hidden),
                             replace=False)
    archetypes = list(cfg.fraud_archetypes)
    labeled, hidden = [], []
    assignments = {}
    for rank, idx in enumerate(sorted(int(x) for x in picked)):
        pid = providers[idx].provider_id
        archetype = archetypes[rank % len(archetypes)]
        sev = cfg.severity_scale * float(rng_pick.uniform(0.7, 1.3))
        label = PlantedLabel(pid, archetype, sev)
        (labeled if rank < n_fraud else hidden).append(label)
        assignments[pid] = label

    # Upcode target: two price steps up when available, else one.
    sibling = {}
    for mdc, ordered in drg_by_mdc.items():
        for i, d in enumerate(ordered[:-1]):
            sibling[d] = ordered[min(i + 2, len(ordered) - 1)]

    by_provider: dict[str, list[InpatientClaim]] = {}
    for c in claims:
        if c.provider_id in assignments:
            by_provider.setdefault(c.provider_id, []).append(c)

    for pid in sorted(assignments):
        label = assignments[pid]
        own = by_provider.get(pid, [])
        dominant = _dominant_chapter(own, drg_mdc, mdcs, chapters)
        if label.archetype == "upcoder":
            comp = roles[dominant][1]
            comp_codes = [comp[int(rng.integers(0, len(comp)))] for _ in range(2)]
            for claim in own:
                if rng.random() < min(0.95, 0.6 * label.severity) and claim.drg in sibling:
                    target = sibling[claim.drg]
                    _rescale_payment(claim, prices[target] / prices[claim.drg])
                    claim.drg = target
                    added = {comp_codes[int(rng.integers(0, len(comp_codes)))]}
                    if rng.random() < 0.6:
                        added.add(comp_codes[int(rng.integers(0, len(comp_codes)))])
                    claim.icd_codes = sorted(set(claim.icd_codes) | added)
        elif label.archetype == "rare_coder":
            # One favored rare code per chapter so every claim can carry an
            # injection from its own chapter (and its DRG switch stays in-MDC).
            favored = {ch: roles[ch][2][int(rng.integers(0, len(roles[ch][2])))]
                       for ch in chapters}
            for claim in own:
                if rng.random() < min(0.95, 0.6 * label.severity):
                    chapter = chapters[mdcs.index(drg_mdc[claim.drg])]
                    injected = favored[chapter]
                    claim.icd_codes = sorted(set(claim.icd_codes) | {injected})
                    if rng.random() < 0.75:
                        target = rare_map[injected]
                        if target != claim.drg:
                            _rescale_payment(claim, prices[target] / prices[claim.drg])
                            claim.drg = target
        else:  # excess_cost
            factor = 1.0 + 0.6 * label.severity
            for claim in own:
                _rescale_payment(claim, factor)
    return labeled, hidden


def _dominant_chapter(own_claims, drg_mdc, mdcs, chapters) -> str:
    counts: dict[str, int] = {}
    for c in own_claims:
        counts[drg_mdc[c.drg]] = counts.get(drg_mdc[c.drg], 0) + 1
    if not counts:
        return chapters[0]
    mdc = max(sorted(counts), key=lambda m: counts[m])
    return chapters[mdcs.index(mdc)]


# ---------------------------------------------------------------------------
# File emission
# ---------------------------------------------------------------------------

def write_corpus(corpus: SyntheticCorpus, outdir) -> None:
    """Write the exact input file set consumed by ingestion, plus labels/covariates."""
    import os

    os.makedirs(outdir, exist_ok=True)
    join = lambda *parts: os.path.join(outdir, *parts)

    write_csv(join("claims.csv"),
              ["claim_id", "bene_id", "provider_id", "year", "drg", "icd_list",
               "total", "disp", "educ", "outlier"],
              [(c.claim_id, c.beneficiary_id, c.provider_id, c.year, c.drg,
                ";".join(c.icd_codes), f"{c.total_payment:.2f}",
                f"{c.disproportionate_amount:.2f}", f"{c.education_amount:.2f}",
                f"{c.outlier_amount:.2f}")
               for c in corpus.claims])

    write_csv(join("history_visits.csv"),
              ["bene_id", "visit_type", "year", "icd_list"],
              [(v.beneficiary_id, v.visit_type, v.year, ";".join(v.icd_codes))
               for v in corpus.history_visits])

    write_csv(join("beneficiaries.csv"),
              ["bene_id", "birth_year", "zip3"] + [f"chronic_{c}" for c in CHRONIC_CONDITIONS],
              [(b.beneficiary_id, b.birth_year, b.zip3,
                *[b.chronic_flags[c] for c in CHRONIC_CONDITIONS])
               for b in corpus.beneficiaries])

    write_csv(join("icd_hierarchy.csv"),
              ["code", "parent", "level", "description"],
              [(n.code, n.parent or "", n.level, n.description)
               for n in corpus.hierarchy_nodes])

    write_csv(join("drg_mdc.csv"), ["drg", "mdc"],
              sorted(corpus.drg_mdc.items()))

    write_csv(join("providers.csv"), ["provider_id", "name"],
              [(p.provider_id, p.name) for p in corpus.providers])

    write_csv(join("covariates.csv"),
              ["provider_id", "rating", "ownership", "urban", "state",
               "avg_length_of_stay", "n_unique_patients"],
              [(p.provider_id, p.rating, p.ownership, int(p.urban), p.state,
                f"{p.avg_length_of_stay:.2f}", corpus.n_unique_patients[p.provider_id])
               for p in corpus.providers])

    write_csv(join("labels.csv"), ["provider_id", "archetype", "severity"],
              [(l.provider_id, l.archetype, f"{l.severity:.6f}") for l in corpus.labels])
