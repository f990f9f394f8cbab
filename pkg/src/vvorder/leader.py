"""Virtual leader election on safe voting patterns and the leader stream."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from vvorder.core import NO_LEADER, LeaderValue, Message, Vertex, Vote, leader_key
from vvorder.graph import LamportGraph
from vvorder.rounds import PastNotProcessed
from vvorder.voting import bit_weight, set_weight, svp_distance, tally

Candidate = Tuple[int, LeaderValue]
CandidateSet = FrozenSet[Candidate]


def long_chain(S: Iterable[Candidate], m: LeaderValue, s: int) -> CandidateSet:
    """Longest chain rule: keep only the highest deciding round."""
    S = frozenset(S)
    if any(t > s for t, _ in S):
        return S
    return frozenset(c for c in S if c[0] >= s) | {(s, m)}


def highest_weight(S: Iterable[Vertex]) -> Message:
    """Initial vote: the message of the heaviest vertex."""
    return max(S, key=lambda x: (x.weight, x.digest)).m


@dataclass(frozen=True)
class Decision:
    round: int
    deciding_round: int
    leader: LeaderValue
    decider: bytes


class LeaderStream:
    """Per-round candidate sets of (deciding round, leader value)."""

    def __init__(self):
        self.sets: Dict[int, CandidateSet] = {}
        self.changed: Set[int] = set()
        self.decisions: List[Decision] = []

    def __getitem__(self, r: int) -> CandidateSet:
        return self.sets.get(r, frozenset())

    def __contains__(self, r: int):
        return r in self.sets

    def rounds(self) -> List[int]:
        return sorted(self.sets)

    def apply(self, r: int, m: LeaderValue, s: int) -> bool:
        new = long_chain(self.sets.get(r, ()), m, s)
        if new == self.sets.get(r):
            return False
        self.sets[r] = new
        self.changed.add(r)
        return True

    def decide(self, r: int, m: LeaderValue, s: int, decider: Vertex) -> bool:
        self.decisions.append(Decision(r, s, m, decider.digest))
        return self.apply(r, m, s)

    def take_changes(self) -> Set[int]:
        out, self.changed = self.changed, set()
        return out

    def is_decided(self, r: int) -> bool:
        """A real decision (not a round's own placeholder) is on record."""
        cs = self.sets.get(r)
        return bool(cs) and all(s > r for s, _ in cs)

    def dump_records(self):
        for r in self.rounds():
            for s, leader in sorted(self.sets[r], key=lambda c: (c[0], leader_key(c[1]))):
                yield {
                    "round": r,
                    "deciding_round": s,
                    "leader": "NONE" if leader is NO_LEADER else leader.digest.hex(),
                }


def top_leader(counts: Dict[Vote, int]) -> LeaderValue:
    """Leader value with the most round weight, summed over all bit values."""
    per_leader: Dict[LeaderValue, int] = {}
    for (leader, _), w in counts.items():
        per_leader[leader] = per_leader.get(leader, 0) + w
    if not per_leader:
        return NO_LEADER
    best = max(per_leader.values())
    return min((l for l, w in per_leader.items() if w == best), key=leader_key)


def coin_bit(S: Iterable[Vertex]) -> int:
    heaviest = max(S, key=lambda x: (x.weight, x.digest))
    return heaviest.digest[-1] & 1


def elect(
    G: LamportGraph,
    v: Vertex,
    d,
    stream: LeaderStream,
    initial_vote: Callable[[Iterable[Vertex]], Message] = highest_weight,
) -> Dict[int, Vote]:
    v = G._own(v)
    if v.svp is None:
        raise PastNotProcessed(repr(v))
    if not v.svp:
        stream.apply(v.round, NO_LEADER, v.round)
        return v.vote
    svp = v.svp
    s = svp[-1]
    S = v.pattern
    n = set_weight(S)
    ds = d(s)
    super_ = n - ds
    for t in svp:
        counts = tally(S, t)
        v.tallies[t] = counts
        delta = svp_distance(svp, s, t)
        if delta == 0:
            v.vote[t] = (initial_vote(S), None)
            continue
        l = top_leader(counts)
        w_undecided = counts.get((l, None), 0)
        w0 = counts.get((l, 0), 0)
        w1 = counts.get((l, 1), 0)
        if delta == 1:
            v.vote[t] = (l, None) if w_undecided > super_ else (NO_LEADER, None)
        elif delta == 2:
            if l is not NO_LEADER and w_undecided > super_:
                v.vote[t] = (l, 0)
            elif l is not NO_LEADER and w_undecided > ds:
                v.vote[t] = (l, 1)
            else:
                v.vote[t] = (NO_LEADER, 1)
        elif delta % 3 == 0:
            if w0 > super_:
                v.vote[t] = (l, 0)
                if w0 == n:
                    stream.decide(t, l, s, v)
            elif w1 > super_:
                v.vote[t] = (l, 1)
            else:
                v.vote[t] = (l, 0)
        elif delta % 3 == 1:
            if w1 > super_:
                v.vote[t] = (NO_LEADER, 1)
                if w1 == n:
                    stream.decide(t, NO_LEADER, s, v)
            elif w0 > super_:
                v.vote[t] = (l, 0)
            else:
                v.vote[t] = (l, 1)
        else:
            if w0 > super_:
                v.vote[t] = (l, 0)
            elif w1 > super_:
                v.vote[t] = (l, 1)
            else:
                v.vote[t] = (l, coin_bit(S))
    return v.vote


def audit_election(v: Vertex, d, window: int = 8) -> List[str]:
    """Runtime safety checks on a vertex whose election has run.

    Returns human-readable violations: binary quorum intersection, graded
    agreement and agreement stability across ``v``'s pattern members.
    Only the newest ``window`` svp rounds are examined; older ones were
    covered when earlier vertices were audited.
    """
    problems: List[str] = []
    svp = v.svp or ()
    if not svp:
        return problems
    members = v.pattern
    tag = v.digest.hex()[:12]
    if len(svp) >= 5:
        s = svp[-2]
        ds = d(s)
        for u in svp[:-1][-window:]:
            if svp_distance(svp[:-1], s, u) < 4:
                continue
            zero = one = False
            for x in members:
                n_x = set_weight(x.pattern)
                counts = x.tallies.get(u, {})
                zero |= bit_weight(counts, 0) > n_x - ds
                one |= bit_weight(counts, 1) > n_x - ds
            if zero and one:
                problems.append(f"quorum intersection: {tag} round {u}")
    if len(svp) >= 4:
        u = svp[-4]
        seen = set()
        for x in members:
            leader, bit = x.vote.get(u, (NO_LEADER, None))
            if bit in (0, 1) and leader is not NO_LEADER:
                seen.add(leader)
        if len(seen) > 1:
            problems.append(f"graded agreement: {tag} round {u}")
    for x in members:
        if not x.svp:
            continue
        for t in x.svp[-window:]:
            if svp_distance(x.svp, x.svp[-1], t) < 3:
                continue
            votes = {y.vote.get(t) for y in x.pattern}
            if len(votes) != 1:
                continue
            agreed = votes.pop()
            if agreed is None or agreed[1] not in (0, 1):
                continue
            if any(y.vote.get(t) != agreed for y in members):
                problems.append(f"agreement stability: {tag} round {t}")
    return problems
