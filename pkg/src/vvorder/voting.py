"""Knowledge graphs, quorum selection, voting sets and safe voting patterns."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from vvorder.core import NO_LEADER, Vertex, Vote
from vvorder.graph import LamportGraph, iter_bits
from vvorder.rounds import PastNotProcessed


class InvalidRound(ValueError):
    pass


class NotMember(ValueError):
    pass


def round_past_mask(G: LamportGraph, v: Vertex, s: int) -> int:
    v = G._own(v)
    if v.round is None:
        raise PastNotProcessed(repr(v))
    if not 0 <= s < v.round:
        raise InvalidRound(f"round {s} is not below vertex round {v.round}")
    return v.past_mask & G.round_mask.get(s, 0)


def round_past(G: LamportGraph, v: Vertex, s: int) -> List[Vertex]:
    """Round-``s`` vertices in the past of ``v``."""
    return G.mask_vertices(round_past_mask(G, v, s))


@dataclass
class KnowledgeGraph:
    nodes: List[bytes] = field(default_factory=list)
    edges: Set[Tuple[bytes, bytes]] = field(default_factory=set)
    class_members: Dict[bytes, List[Vertex]] = field(default_factory=dict)

    def weight(self, ident: bytes) -> int:
        return sum(x.weight for x in self.class_members[ident])

    def components(self) -> List[List[bytes]]:
        """Weakly connected components.  A graph without any edge counts as
        a single component (round 0 consists of sinks only)."""
        if not self.edges:
            return [list(self.nodes)] if self.nodes else []
        parent = {n: n for n in self.nodes}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for a, b in self.edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        groups: Dict[bytes, List[bytes]] = {}
        for n in self.nodes:
            groups.setdefault(find(n), []).append(n)
        return list(groups.values())


def knowledge_graph(G: LamportGraph, v: Vertex, s: int) -> KnowledgeGraph:
    mask = round_past_mask(G, v, s)
    kg = KnowledgeGraph()
    for i in iter_bits(mask):
        x = G.by_index[i]
        kg.class_members.setdefault(x.id, []).append(x)
        for c in x.causes:
            if mask >> c.index & 1:
                kg.edges.add((x.id, c.id))
    kg.nodes = sorted(kg.class_members)
    return kg


def quorum(kg: KnowledgeGraph, n_q: int) -> List[bytes]:
    """Heaviest ``n_q`` ids of the heaviest weakly connected component."""
    comps = kg.components()
    if not comps:
        return []
    weights = {ident: kg.weight(ident) for ident in kg.nodes}

    def comp_key(comp):
        total = sum(weights[i] for i in comp)
        smallest = min(x.digest for i in comp for x in kg.class_members[i])
        return (-total, smallest)

    best = min(comps, key=comp_key)
    ranked = sorted(best, key=lambda i: (-weights[i], i))
    return ranked[:n_q]


def voting_set(G: LamportGraph, v: Vertex, s: int, k: int, n_q: int) -> List[Vertex]:
    """Last round-``s`` vertices of quorum ids, (round distance * k)-reachable from ``v``."""
    v = G._own(v)
    kg = knowledge_graph(G, v, s)
    q = set(quorum(kg, n_q))
    threshold = (v.round - s) * k
    members = []
    for x in G.round_lasts.get(s, ()):
        if x.id in q and v.past_mask >> x.index & 1 and G.k_reachable(v, x, threshold):
            members.append(x)
    members.sort(key=lambda x: x.digest)
    return members


def set_weight(S: Iterable[Vertex]) -> int:
    return sum(x.weight for x in S)


def tally(S: Iterable[Vertex], t: int) -> Dict[Vote, int]:
    """Weight behind every round-``t`` vote present in ``S``."""
    out: Dict[Vote, int] = {}
    for x in S:
        vote = x.vote.get(t)
        if vote is not None:
            out[vote] = out.get(vote, 0) + x.weight
    return out


def vote_weight(S: Iterable[Vertex], t: int, vote: Vote) -> int:
    return sum(x.weight for x in S if x.vote.get(t) == vote)


def bit_weight(counts: Dict[Vote, int], bit: int) -> int:
    """Weight of all votes carrying ``bit``, whatever their leader."""
    return sum(w for (_, b), w in counts.items() if b == bit)


def _close(x_counts: Sequence[Dict[Vote, int]], dt: int) -> bool:
    undecided = set()
    for counts in x_counts:
        undecided.update(vote for vote in counts if vote[1] is None)
    for vote in undecided:
        ws = [c.get(vote, 0) for c in x_counts]
        if max(ws) - min(ws) > dt:
            return False
    for bit in (0, 1):
        ws = [bit_weight(c, bit) for c in x_counts]
        if max(ws) - min(ws) >= dt:
            return False
    return True


def pattern_ok(S: List[Vertex], s: int, d) -> bool:
    """Conditions a round-``s`` voting set must meet to be a safe voting pattern."""
    w = set_weight(S)
    if not 3 * d(s) < w <= 6 * d(s):
        return False
    for x in S:
        if x.svp is None:
            raise PastNotProcessed(repr(x))
    svp = S[0].svp
    if any(x.svp != svp for x in S):
        return False
    if not svp:
        return s == 0
    t = svp[-1]
    if t >= s:
        return False
    dt = d(t)
    for u in svp[:-1]:
        if not _close([x.tallies.get(u, {}) for x in S], dt):
            return False
    return True


def compute_svp(G: LamportGraph, v: Vertex, k: int, d, n_q: int) -> Tuple[int, ...]:
    v = G._own(v)
    if v.round is None:
        raise PastNotProcessed(repr(v))
    v.svp = ()
    v.pattern = ()
    if not v.is_last:
        return v.svp
    for s in range(v.round - 1, -1, -1):
        S = voting_set(G, v, s, k, n_q)
        if S and pattern_ok(S, s, d):
            v.svp = S[0].svp + (s,)
            v.pattern = tuple(S)
            break
    return v.svp


def svp_distance(svp: Sequence[int], r: int, t: int) -> int:
    try:
        i, j = svp.index(r), svp.index(t)
    except ValueError:
        raise NotMember(f"{r} or {t} not in {tuple(svp)}") from None
    return abs(i - j)
