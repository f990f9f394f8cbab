"""One process's protocol state: graph, per-vertex pipeline, leader stream and order."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional

from vvorder.core import FixedWeights, Message, Vertex, WeightSystem, units
from vvorder.graph import LamportGraph
from vvorder.leader import LeaderStream, audit_election, elect, highest_weight
from vvorder.order import Orderer
from vvorder.rounds import ConstantDifficulty, compute_round
from vvorder.voting import compute_svp


@dataclass
class Params:
    weights: WeightSystem = field(default_factory=FixedWeights)
    difficulty: Callable[[int], int] = field(default_factory=ConstantDifficulty)
    k: int = units(1)
    n_q: int = 64
    initial_vote: Callable = highest_weight
    audit: bool = False


class Replica:
    """Runs rounds, safe voting patterns, election and ordering on every new vertex."""

    def __init__(self, params: Optional[Params] = None):
        self.params = params or Params()
        self.graph = LamportGraph(self.params.weights)
        self.stream = LeaderStream()
        self.orderer = Orderer(self.graph)
        self.violations: List[str] = []

    def process(self, v: Vertex) -> None:
        p = self.params
        compute_round(self.graph, v, p.k, p.difficulty)
        compute_svp(self.graph, v, p.k, p.difficulty, p.n_q)
        elect(self.graph, v, p.difficulty, self.stream, p.initial_vote)
        if p.audit and v.svp:
            self.violations.extend(audit_election(v, p.difficulty))

    def receive(self, m: Message) -> Optional[Vertex]:
        """Integrity check, extension and pipeline; None if the message is dropped."""
        if not self.graph.integrity(m):
            return None
        v = self.graph._insert(m)
        self.process(v)
        return v

    def receive_all(self, messages: Iterable[Message]) -> List[Vertex]:
        out = []
        for m in messages:
            v = self.receive(m)
            if v is not None:
                out.append(v)
        self.update_order()
        return out

    def update_order(self) -> Optional[int]:
        changed = self.stream.take_changes()
        if not changed:
            return None
        return self.orderer.rebuild(self.stream, changed)

    def finalized(self) -> List[Vertex]:
        return self.orderer.finalized(self.stream)
