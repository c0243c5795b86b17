"""Instant-runoff-voting aggregation of detector rank lists.

Each list votes for its highest-ranked candidate still in play. A candidate
holding a strict majority of cast votes wins the round and takes the next
output position; otherwise the candidate with fewest votes is knocked out
for the remainder of the round and votes fall through. Knock-outs reset
between rounds. Every decision is recorded in a replayable trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError
from .tableio import read_json, write_json


@dataclass
class RankList:
    source: str
    entries: list[str]
    scores: list[float] | None = None

    def __post_init__(self):
        if len(set(self.entries)) != len(self.entries):
            raise InputError(f"rank list {self.source} contains duplicate entries")
        if self.scores is not None and len(self.scores) != len(self.entries):
            raise InputError(f"rank list {self.source}: scores do not align with entries")

    @property
    def support(self) -> set[str]:
        return set(self.entries)


@dataclass
class FusionTrace:
    """Per output position, the sequence of vote tallies and knock-out decisions."""

    rounds: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"schema_version": 1, "rounds": self.rounds}

    @classmethod
    def from_json(cls, obj: dict) -> "FusionTrace":
        return cls(rounds=obj["rounds"])

    def save(self, path) -> None:
        write_json(path, self.to_json())

    @classmethod
    def load(cls, path) -> "FusionTrace":
        return cls.from_json(read_json(path))


def _mean_ranks(lists: list[RankList]) -> dict[str, float]:
    totals: dict[str, list[int]] = {}
    for lst in lists:
        for pos, cand in enumerate(lst.entries, start=1):
            totals.setdefault(cand, []).append(pos)
    return {c: sum(v) / len(v) for c, v in totals.items()}


def _tally(lists: list[RankList], placed: set[str], eliminated: set[str],
           active: list[str]) -> tuple[dict[str, int], int]:
    votes = {c: 0 for c in active}
    cast = 0
    for lst in lists:
        for cand in lst.entries:
            if cand in placed or cand in eliminated:
                continue
            votes[cand] += 1
            cast += 1
            break
    return votes, cast


def irv_aggregate(
    lists: list[RankList], global_elimination: bool = False
) -> tuple[RankList, FusionTrace]:
    """Fuse rank lists into one ordering over the union of their supports.

    Lists whose support is exhausted abstain; majority is judged over votes
    actually cast. Knock-out ties are broken by worse mean rank across the
    lists covering the candidate, then by larger id. With global_elimination
    the knocked-out set persists across rounds (sensitivity mode) and is
    reset only when it would empty the field.
    """
    if not lists:
        raise InputError("no rank lists to aggregate")
    candidates = sorted(set().union(*[lst.support for lst in lists]))
    if not candidates:
        raise InputError("union of rank-list supports is empty")
    mean_rank = _mean_ranks(lists)

    placed: set[str] = set()
    output: list[str] = []
    trace = FusionTrace()
    carried: set[str] = set()

    while len(output) < len(candidates):
        eliminated = set(carried) if global_elimination else set()
        if global_elimination and all(
            c in placed or c in eliminated for c in candidates
        ):
            eliminated = set()
            carried = set()
        iterations = []
        while True:
            active = [c for c in candidates if c not in placed and c not in eliminated]
            votes, cast = _tally(lists, placed, eliminated, active)
            if cast == 0:
                raise InputError("no votes cast; inconsistent supports")
            winner = next((c for c in active if 2 * votes[c] > cast), None)
            if winner is not None:
                iterations.append({"votes": votes, "cast": cast, "winner": winner})
                break
            fewest = min(votes[c] for c in active)
            tied = [c for c in active if votes[c] == fewest]
            # Knock out the weakest: worse (larger) mean rank, then larger id.
            knocked = max(tied, key=lambda c: (mean_rank[c], c))
            record = {"votes": votes, "cast": cast, "knocked_out": knocked}
            if len(tied) > 1:
                record["tiebreak"] = {"tied": sorted(tied), "rule": "mean_rank_then_id"}
            iterations.append(record)
            eliminated.add(knocked)
        output.append(winner)
        placed.add(winner)
        if global_elimination:
            carried = eliminated
        trace.rounds.append({"position": len(output), "iterations": iterations})

    return RankList(source="FUSED", entries=output), trace


def replay_trace(trace: FusionTrace, lists: list[RankList]) -> RankList:
    """Re-derive the fused order from a trace, checking every recorded tally."""
    placed: set[str] = set()
    output = []
    candidates = sorted(set().union(*[lst.support for lst in lists]))
    for round_rec in trace.rounds:
        eliminated: set[str] = set()
        winner = None
        for it in round_rec["iterations"]:
            active = [c for c in candidates if c not in placed and c not in eliminated]
            votes, cast = _tally(lists, placed, eliminated, active)
            if votes != it["votes"] or cast != it["cast"]:
                raise InputError(
                    f"trace mismatch at position {round_rec['position']}: recorded "
                    f"tally does not replay")
            if "winner" in it:
                winner = it["winner"]
            else:
                eliminated.add(it["knocked_out"])
        if winner is None:
            raise InputError(f"round {round_rec['position']} records no winner")
        output.append(winner)
        placed.add(winner)
    return RankList(source="FUSED", entries=output)


def fuse_all(
    regression: RankList,
    subspace: RankList,
    peer_mdc: RankList,
    peer_chronic: RankList,
    subspace_components: list[RankList],
    global_elimination: bool = False,
) -> tuple[RankList, FusionTrace]:
    """Aggregate the eight detector rankings into the final ordering.

    The eight voters are the regression list, the five raw subspace detector
    lists, and the two peer lists. The fused subspace list rides along for
    context columns only and does not vote.
    """
    if len(subspace_components) != 5:
        raise InputError(f"expected 5 subspace component lists, got {len(subspace_components)}")
    voters = [regression] + list(subspace_components) + [peer_mdc, peer_chronic]
    tags = [lst.source for lst in voters + [subspace]]
    if len(set(tags)) != len(tags):
        raise InputError(f"duplicate source tags among rank lists: {tags}")
    fused, trace = irv_aggregate(voters, global_elimination=global_elimination)
    return fused, trace
