"""Domain types and shared data preparation for the detection pipeline.

Covers file ingestion, claim filtering, base-payment computation, patient
history assembly, provider profile construction, and DRG average costs.
All downstream detectors consume the structures built here.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .errors import ConfigError, ConsistencyError, InputError
from .tableio import money, parse_map, read_csv, ser_map, write_csv

logger = logging.getLogger(__name__)

VISIT_TYPES = ("physician", "outpatient", "inpatient")

# Providers serving fewer distinct beneficiaries than this are dropped outright.
MIN_BENEFICIARIES = 11

# Patients younger than this at the target year are excluded from histories.
MIN_AGE = 70

# Extra coordinate appended to chronic-condition distributions so providers whose
# patients carry no chronic flags still yield a valid probability vector.
NO_CHRONIC = "none"


@dataclass
class InpatientClaim:
    claim_id: str
    beneficiary_id: str
    provider_id: str
    year: int
    drg: str
    icd_codes: list[str]
    total_payment: float
    disproportionate_amount: float
    education_amount: float
    outlier_amount: float
    base_payment: float | None = None


@dataclass
class IcdNode:
    code: str
    parent: str | None
    level: str  # chapter | block | category | full-code
    description: str


@dataclass
class HistoryVisit:
    """One prior-year encounter (physician, outpatient, or inpatient)."""

    beneficiary_id: str
    visit_type: str
    year: int
    icd_codes: list[str]


@dataclass
class Beneficiary:
    beneficiary_id: str
    birth_year: int
    zip3: str
    chronic_flags: dict[str, int]  # condition name -> 0/1


@dataclass
class PatientHistory:
    beneficiary_id: str
    age_at_target_year: int
    history_counts: dict[tuple[str, str], int]  # (visit_type, icd_code) -> count
    chronic_flags: dict[str, int]
    zip3: str
    target_spend: float
    provider_visits: dict[str, int]


@dataclass
class ProviderProfile:
    provider_id: str
    n_claims: int
    n_beneficiaries: int
    icd_counts: dict[str, int]
    mdc_dist: dict[str, float]
    chronic_dist: dict[str, float]
    drg_dist: dict[str, float]


@dataclass
class DrgCostTable:
    costs: dict[str, float]

    def __getitem__(self, drg: str) -> float:
        return self.costs[drg]

    def __contains__(self, drg: str) -> bool:
        return drg in self.costs


@dataclass
class IcdHierarchy:
    nodes: dict[str, IcdNode]

    def __post_init__(self):
        for node in self.nodes.values():
            if node.level != "chapter" and not node.parent:
                raise InputError(f"non-chapter code {node.code} has no parent")
            if node.parent and node.parent not in self.nodes:
                raise InputError(f"code {node.code} references unknown parent {node.parent}")

    def chapter_of(self, code: str) -> str:
        node = self.nodes[code]
        while node.parent:
            node = self.nodes[node.parent]
        return node.code

    def ancestry(self, code: str) -> list[IcdNode]:
        """Nodes from chapter root down to the code itself."""
        chain = []
        node = self.nodes[code]
        while True:
            chain.append(node)
            if not node.parent:
                break
            node = self.nodes[node.parent]
        return chain[::-1]

    def leaf_codes(self) -> list[str]:
        parents = {n.parent for n in self.nodes.values() if n.parent}
        return sorted(c for c in self.nodes if c not in parents)


# ---------------------------------------------------------------------------
# Filtering and payment derivation
# ---------------------------------------------------------------------------

def compute_base_payment(claim: InpatientClaim) -> float:
    """Total payment net of the three reported adjustment components.

    The claim must already have passed :func:`filter_claims`; a negative result
    here means the filter was bypassed.
    """
    base = claim.total_payment - (
        claim.disproportionate_amount + claim.education_amount + claim.outlier_amount
    )
    if base < 0:
        raise ConsistencyError(
            f"claim {claim.claim_id}: negative base payment {base:.2f}; "
            "claim should have been rejected by filtering"
        )
    base = money(base)
    claim.base_payment = base
    return base


def filter_claims(claims: list[InpatientClaim]) -> tuple[list[InpatientClaim], int]:
    """Drop claims where any adjustment component exceeds the total payment.

    Equality is allowed (base payment becomes zero). Order is preserved.
    Returns (kept claims, drop count).
    """
    kept = []
    dropped = 0
    for claim in claims:
        components = (
            claim.disproportionate_amount,
            claim.education_amount,
            claim.outlier_amount,
        )
        if claim.total_payment < 0 or any(c < 0 for c in components):
            dropped += 1
        elif any(c > claim.total_payment for c in components):
            dropped += 1
        else:
            kept.append(claim)
    return kept, dropped


def filter_small_providers(
    claims: list[InpatientClaim], min_beneficiaries: int = MIN_BENEFICIARIES
) -> list[InpatientClaim]:
    """Remove all claims of providers serving fewer than min_beneficiaries distinct patients."""
    benes = defaultdict(set)
    for claim in claims:
        benes[claim.provider_id].add(claim.beneficiary_id)
    keep = {p for p, s in benes.items() if len(s) >= min_beneficiaries}
    return [c for c in claims if c.provider_id in keep]


# ---------------------------------------------------------------------------
# Patient histories
# ---------------------------------------------------------------------------

def build_patient_histories(
    target_claims: list[InpatientClaim],
    history_visits: list[HistoryVisit],
    beneficiaries: dict[str, Beneficiary],
    target_year: int,
) -> tuple[list[PatientHistory], int]:
    """Assemble one history record per included beneficiary.

    History counts aggregate unique codes per visit across the five prior years,
    keyed by (visit type, code). Beneficiaries younger than 70 at the target year
    are excluded; beneficiaries missing from the beneficiary table are skipped
    and counted in the returned warning count.
    """
    spend = defaultdict(float)
    visits = defaultdict(Counter)
    for claim in target_claims:
        if claim.base_payment is None:
            raise InputError(f"claim {claim.claim_id} has no base payment; run filtering first")
        spend[claim.beneficiary_id] += claim.base_payment
        visits[claim.beneficiary_id][claim.provider_id] += 1

    counts: dict[str, Counter] = defaultdict(Counter)
    lo, hi = target_year - 5, target_year - 1
    for visit in history_visits:
        if visit.beneficiary_id not in spend:
            continue
        if not (lo <= visit.year <= hi):
            continue
        if visit.visit_type not in VISIT_TYPES:
            raise InputError(f"unknown visit type {visit.visit_type!r}")
        # Codes repeated within one visit count once.
        for code in set(visit.icd_codes):
            counts[visit.beneficiary_id][(visit.visit_type, code)] += 1

    histories = []
    missing = 0
    for bene_id in sorted(spend):
        bene = beneficiaries.get(bene_id)
        if bene is None:
            missing += 1
            continue
        age = target_year - bene.birth_year
        if age < MIN_AGE:
            continue
        histories.append(
            PatientHistory(
                beneficiary_id=bene_id,
                age_at_target_year=age,
                history_counts=dict(counts.get(bene_id, {})),
                chronic_flags=dict(bene.chronic_flags),
                zip3=bene.zip3,
                target_spend=money(spend[bene_id]),
                provider_visits=dict(visits[bene_id]),
            )
        )
    if missing:
        logger.warning("%d beneficiaries present in claims but missing from table", missing)
    return histories, missing


# ---------------------------------------------------------------------------
# Provider profiles and DRG costs
# ---------------------------------------------------------------------------

def _normalize(counter: Counter) -> dict[str, float]:
    total = sum(counter.values())
    if total <= 0:
        raise ConsistencyError("cannot normalize an empty count vector")
    return {k: v / total for k, v in sorted(counter.items())}


def build_provider_profiles(
    target_claims: list[InpatientClaim],
    drg_to_mdc: dict[str, str],
    beneficiaries: dict[str, Beneficiary],
) -> list[ProviderProfile]:
    """Per-provider raw ICD counts plus normalized MDC, chronic, and DRG distributions.

    The chronic distribution counts each treated patient once per flagged
    condition, with a trailing "none" bucket for patients carrying no flags.
    """
    missing_mdc = sorted({c.drg for c in target_claims if c.drg not in drg_to_mdc})
    if missing_mdc:
        raise ConfigError(f"DRG codes missing from MDC mapping: {', '.join(missing_mdc)}")

    by_provider = defaultdict(list)
    for claim in target_claims:
        by_provider[claim.provider_id].append(claim)

    profiles = []
    for provider_id in sorted(by_provider):
        claims = by_provider[provider_id]
        icd = Counter()
        mdc = Counter()
        drg = Counter()
        patient_ids = set()
        for claim in claims:
            icd.update(claim.icd_codes)
            mdc[drg_to_mdc[claim.drg]] += 1
            drg[claim.drg] += 1
            patient_ids.add(claim.beneficiary_id)
        chronic = Counter()
        for bene_id in patient_ids:
            bene = beneficiaries.get(bene_id)
            flags = bene.chronic_flags if bene else {}
            any_flag = False
            for name, value in flags.items():
                if value:
                    chronic[name] += 1
                    any_flag = True
            if not any_flag:
                chronic[NO_CHRONIC] += 1
        profiles.append(
            ProviderProfile(
                provider_id=provider_id,
                n_claims=len(claims),
                n_beneficiaries=len(patient_ids),
                icd_counts=dict(sorted(icd.items())),
                mdc_dist=_normalize(mdc),
                chronic_dist=_normalize(chronic),
                drg_dist=_normalize(drg),
            )
        )
    return profiles


def compute_drg_costs(target_claims: list[InpatientClaim]) -> DrgCostTable:
    """Mean base payment per DRG over the target-year claims."""
    totals = defaultdict(float)
    counts = Counter()
    for claim in target_claims:
        if claim.base_payment is None:
            raise InputError(f"claim {claim.claim_id} has no base payment; run filtering first")
        totals[claim.drg] += claim.base_payment
        counts[claim.drg] += 1
    return DrgCostTable({d: totals[d] / counts[d] for d in sorted(totals)})


# ---------------------------------------------------------------------------
# File ingestion
# ---------------------------------------------------------------------------

CLAIMS_HEADER = [
    "claim_id", "bene_id", "provider_id", "year", "drg", "icd_list",
    "total", "disp", "educ", "outlier",
]


def read_claims(path) -> tuple[list[InpatientClaim], list[tuple[int, str]]]:
    """Parse claims.csv; malformed rows are rejected per record with a reason code."""
    header, rows = read_csv(path)
    if header != CLAIMS_HEADER:
        raise ConfigError(f"{path}: expected header {CLAIMS_HEADER}, got {header}")
    claims = []
    rejects = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(CLAIMS_HEADER):
            rejects.append((lineno, "wrong-field-count"))
            continue
        cid, bene, prov, year, drg, icd_list, total, disp, educ, outl = row
        if not all((cid, bene, prov, drg)):
            rejects.append((lineno, "missing-field"))
            continue
        try:
            claims.append(
                InpatientClaim(
                    claim_id=cid,
                    beneficiary_id=bene,
                    provider_id=prov,
                    year=int(year),
                    drg=drg,
                    icd_codes=[c for c in icd_list.split(";") if c],
                    total_payment=float(total),
                    disproportionate_amount=float(disp),
                    education_amount=float(educ),
                    outlier_amount=float(outl),
                )
            )
        except ValueError:
            rejects.append((lineno, "non-numeric"))
    return claims, rejects


def read_history_visits(path) -> list[HistoryVisit]:
    header, rows = read_csv(path)
    expected = ["bene_id", "visit_type", "year", "icd_list"]
    if header != expected:
        raise ConfigError(f"{path}: expected header {expected}, got {header}")
    visits = []
    for row in rows:
        bene, vtype, year, icd_list = row
        visits.append(HistoryVisit(bene, vtype, int(year), [c for c in icd_list.split(";") if c]))
    return visits


def read_beneficiaries(path) -> dict[str, Beneficiary]:
    header, rows = read_csv(path)
    if header[:3] != ["bene_id", "birth_year", "zip3"]:
        raise ConfigError(f"{path}: expected columns bene_id,birth_year,zip3,chronic_*")
    chronic_names = [c.removeprefix("chronic_") for c in header[3:]]
    table = {}
    for row in rows:
        flags = {name: int(v) for name, v in zip(chronic_names, row[3:])}
        table[row[0]] = Beneficiary(row[0], int(row[1]), row[2], flags)
    return table


def read_icd_hierarchy(path) -> IcdHierarchy:
    header, rows = read_csv(path)
    expected = ["code", "parent", "level", "description"]
    if header != expected:
        raise ConfigError(f"{path}: expected header {expected}, got {header}")
    nodes = {}
    for code, parent, level, description in rows:
        if not description:
            raise InputError(f"ICD code {code} has an empty description")
        nodes[code] = IcdNode(code, parent or None, level, description)
    return IcdHierarchy(nodes)


def read_drg_mdc(path) -> dict[str, str]:
    header, rows = read_csv(path)
    if header != ["drg", "mdc"]:
        raise ConfigError(f"{path}: expected header ['drg', 'mdc'], got {header}")
    return {drg: mdc for drg, mdc in rows}


# ---------------------------------------------------------------------------
# Artifact persistence (stable column order for downstream stages)
# ---------------------------------------------------------------------------

def write_patient_histories(path, histories: list[PatientHistory]) -> None:
    header = ["bene_id", "age", "zip3", "target_spend", "chronic", "history", "providers"]
    rows = [
        (
            h.beneficiary_id,
            h.age_at_target_year,
            h.zip3,
            repr(h.target_spend),
            ser_map(h.chronic_flags),
            ser_map({f"{vt}|{code}": n for (vt, code), n in h.history_counts.items()}),
            ser_map(h.provider_visits),
        )
        for h in histories
    ]
    write_csv(path, header, rows)


def read_patient_histories(path) -> list[PatientHistory]:
    _, rows = read_csv(path)
    histories = []
    for bene, age, zip3, spend, chronic, history, providers in rows:
        raw = parse_map(history, int)
        counts = {}
        for key, n in raw.items():
            vt, _, code = key.partition("|")
            counts[(vt, code)] = n
        histories.append(
            PatientHistory(
                beneficiary_id=bene,
                age_at_target_year=int(age),
                history_counts=counts,
                chronic_flags=parse_map(chronic, int),
                zip3=zip3,
                target_spend=float(spend),
                provider_visits=parse_map(providers, int),
            )
        )
    return histories


def write_provider_profiles(path, profiles: list[ProviderProfile]) -> None:
    header = ["provider_id", "n_claims", "n_beneficiaries", "icd_counts",
              "mdc_dist", "chronic_dist", "drg_dist"]
    rows = [
        (
            p.provider_id,
            p.n_claims,
            p.n_beneficiaries,
            ser_map(p.icd_counts),
            ser_map(p.mdc_dist),
            ser_map(p.chronic_dist),
            ser_map(p.drg_dist),
        )
        for p in profiles
    ]
    write_csv(path, header, rows)


def read_provider_profiles(path) -> list[ProviderProfile]:
    _, rows = read_csv(path)
    return [
        ProviderProfile(
            provider_id=row[0],
            n_claims=int(row[1]),
            n_beneficiaries=int(row[2]),
            icd_counts=parse_map(row[3], int),
            mdc_dist=parse_map(row[4]),
            chronic_dist=parse_map(row[5]),
            drg_dist=parse_map(row[6]),
        )
        for row in rows
    ]


def write_drg_costs(path, table: DrgCostTable) -> None:
    write_csv(path, ["drg", "avg_base_payment"],
              [(d, repr(c)) for d, c in sorted(table.costs.items())])


def read_drg_costs(path) -> DrgCostTable:
    _, rows = read_csv(path)
    return DrgCostTable({d: float(c) for d, c in rows})
