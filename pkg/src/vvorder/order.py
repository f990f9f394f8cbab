"""Total order from the leader stream: leader cones sorted by reverse Kahn."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

from vvorder.core import NO_LEADER, LeaderValue, Vertex, leader_key
from vvorder.graph import LamportGraph, iter_bits
from vvorder.leader import LeaderStream


class EmptyCandidateSet(LookupError):
    pass


def choose_leader(candidates: Iterable) -> LeaderValue:
    """Deterministic pick from a candidate set: smallest digest, no-leader last."""
    candidates = list(candidates)
    if not candidates:
        raise EmptyCandidateSet("no candidates")
    return min((leader for _, leader in candidates), key=leader_key)


def kahn_order(cone: List[Vertex], last: int) -> List[Vertex]:
    """Assign positions ``last+1, last+2, ...`` causes first, heaviest ready vertex first.

    Edges leaving the cone point at already ordered vertices and are ignored.
    """
    members = {v.digest for v in cone}
    pending: Dict[bytes, int] = {}
    effects: Dict[bytes, List[Vertex]] = {v.digest: [] for v in cone}
    ready = []
    for v in cone:
        inside = [c for c in v.causes if c.digest in members]
        pending[v.digest] = len(inside)
        for c in inside:
            effects[c.digest].append(v)
        if not inside:
            heapq.heappush(ready, (-v.weight, v.digest, v))
    out = []
    n = last + 1
    while ready:
        _, _, x = heapq.heappop(ready)
        x.total_position = n
        n += 1
        out.append(x)
        for y in effects[x.digest]:
            pending[y.digest] -= 1
            if pending[y.digest] == 0:
                heapq.heappush(ready, (-y.weight, y.digest, y))
    return out


@dataclass
class OrderedRound:
    round: int
    leader: LeaderValue
    start: int
    vertices: List[Vertex]
    mask_after: int


class Orderer:
    """Maintains per-graph positions as the leader stream changes."""

    def __init__(self, G: LamportGraph):
        self.G = G
        self.rounds: List[OrderedRound] = []

    @property
    def sequence(self) -> List[Vertex]:
        return [v for r in self.rounds for v in r.vertices]

    def __len__(self):
        return sum(len(r.vertices) for r in self.rounds)

    def rebuild(self, stream: LeaderStream, changed: Iterable[int] = ()) -> Optional[int]:
        """Recompute cones from the first round whose chosen leader moved.

        Returns that round, or None when nothing had to be redone.
        """
        chosen: List[LeaderValue] = []
        r = 0
        while r in stream:
            chosen.append(choose_leader(stream[r]))
            r += 1
        start = None
        for i, leader in enumerate(chosen):
            if i >= len(self.rounds) or self.rounds[i].leader != leader:
                start = i
                break
        if start is None and len(self.rounds) > len(chosen):
            start = len(chosen)
        if start is None:
            return None
        for dropped in self.rounds[start:]:
            for v in dropped.vertices:
                v.total_position = None
        del self.rounds[start:]
        mask = self.rounds[-1].mask_after if self.rounds else 0
        pos = self.rounds[-1].start + len(self.rounds[-1].vertices) if self.rounds else 0
        for t in range(start, len(chosen)):
            leader = chosen[t]
            cone: List[Vertex] = []
            if leader is not NO_LEADER:
                lv = self.G.vertices[leader.digest]
                fresh = lv.past_mask & ~mask
                cone = kahn_order([self.G.by_index[i] for i in iter_bits(fresh)], pos - 1)
                mask |= fresh
            self.rounds.append(OrderedRound(t, leader, pos, cone, mask))
            pos += len(cone)
        return start

    def finalized_rounds(self, stream: LeaderStream) -> int:
        """Length of the prefix of rounds whose leader is really decided and unique."""
        n = 0
        for r in self.rounds:
            cs = stream[r.round]
            if len(cs) != 1 or not stream.is_decided(r.round):
                break
            n += 1
        return n

    def finalized(self, stream: LeaderStream) -> List[Vertex]:
        return [v for r in self.rounds[: self.finalized_rounds(stream)] for v in r.vertices]

    def dump_records(self, stream: Optional[LeaderStream] = None):
        seq = self.finalized(stream) if stream is not None else self.sequence
        for v in seq:
            yield {"position": v.total_position, "digest": v.digest.hex()}


def rebuild_order(G: LamportGraph, stream: LeaderStream, changed_rounds: Iterable[int], orderer: Orderer = None):
    orderer = orderer or Orderer(G)
    orderer.rebuild(stream, changed_rounds)
    return {v.digest: v.total_position for v in orderer.sequence}
