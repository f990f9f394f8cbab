"""Independent oracles and graph generators shared by the tests.

Oracles deliberately avoid the library's bitmask machinery: they work on
plain digest -> causes dictionaries.
"""

from __future__ import annotations

import random
from typing import Dict, List, Optional, Sequence, Set

from vvorder.core import NO_LEADER, FixedWeights, Message, units
from vvorder.graph import LamportGraph
from vvorder.protocol import Params, Replica
from vvorder.rounds import ConstantDifficulty
from vvorder.sim import lane_filter


def ident(i: int) -> bytes:
    return bytes([i + 1]) * 16


def nonce(rng: random.Random) -> bytes:
    return rng.randbytes(8)


def sink(i: int, tag: int = 0) -> Message:
    return Message(tag.to_bytes(8, "big"), ident(i))


def msg(i: int, refs: Sequence[Message], tag: int = 0) -> Message:
    return Message(tag.to_bytes(8, "big"), ident(i), tuple(r.digest for r in refs))


# -- oracles -----------------------------------------------------------------


def causes_map(messages: Sequence[Message]) -> Dict[bytes, List[bytes]]:
    return {m.digest: list(m.digests) for m in messages}


def closure_oracle(messages: Sequence[Message]) -> Dict[bytes, Set[bytes]]:
    """Reflexive transitive closure by naive fixpoint iteration."""
    causes = causes_map(messages)
    past = {d: {d} | set(cs) for d, cs in causes.items()}
    changed = True
    while changed:
        changed = False
        for d in past:
            grown = set(past[d])
            for c in list(past[d]):
                grown |= past[c]
            if grown != past[d]:
                past[d] = grown
                changed = True
    return past


def path_union_oracle(messages: Sequence[Message], frm: bytes, to: bytes) -> Set[bytes]:
    """Union of vertices over every acknowledgement path frm -> ... -> to, by DFS."""
    causes = causes_map(messages)
    out: Set[bytes] = set()

    def dfs(node, path):
        if node == to:
            out.update(path)
            out.add(node)
            return
        for c in causes[node]:
            dfs(c, path + [node])

    dfs(frm, [])
    return out


def kahn_oracle(cone: Sequence, weight) -> List[bytes]:
    """Repeatedly take the heaviest vertex whose in-cone causes are all placed."""
    inside = {v.digest for v in cone}
    placed: List[bytes] = []
    done: Set[bytes] = set()
    remaining = list(cone)
    while remaining:
        ready = [v for v in remaining if all(c.digest in done or c.digest not in inside for c in v.causes)]
        best = max(ready, key=lambda v: (weight(v), [-b for b in v.digest]))
        placed.append(best.digest)
        done.add(best.digest)
        remaining.remove(best)
    return placed


# -- generators --------------------------------------------------------------


def random_messages(
    rng: random.Random,
    n_msgs: int,
    n_ids: int,
    mutate_p: float = 0.0,
    fanout: int = 3,
    weights=None,
) -> List[Message]:
    """A random message set that passes integrity when delivered in creation order.

    Each message acknowledges a vertex of its own id (a tip, or with
    probability ``mutate_p`` an older one, creating mutations) plus up to
    ``fanout`` vertices of other ids outside that vertex's past.
    """
    G = LamportGraph(weights or FixedWeights())
    out = []
    for _ in range(n_msgs):
        i = rng.randrange(n_ids)
        me = ident(i)
        own = G.by_id.get(me)
        refs = []
        known = 0
        if own:
            prev = rng.choice(own) if rng.random() < mutate_p else G.last_of_id(me)
            refs.append(prev)
            known = prev.past_mask
        others = [v for v in G if v.id != me and not known >> v.index & 1]
        rng.shuffle(others)
        used = {me}
        for v in others:
            if len(refs) > fanout:
                break
            if v.id in used:
                continue
            used.add(v.id)
            refs.append(v)
        m = Message(nonce(rng), me, tuple(v.digest for v in refs), rng.randbytes(rng.randrange(4)))
        G.extend(m)
        out.append(m)
    return out


def random_topological(rng: random.Random, messages: Sequence[Message]) -> List[Message]:
    """A uniformly shuffled delivery order that still respects causality."""
    by = {m.digest: m for m in messages}
    pending = {m.digest: len(m.digests) for m in messages}
    effects: Dict[bytes, List[bytes]] = {d: [] for d in by}
    for m in messages:
        for c in m.digests:
            effects[c].append(m.digest)
    ready = sorted(d for d, n in pending.items() if n == 0)
    out = []
    while ready:
        d = ready.pop(rng.randrange(len(ready)))
        out.append(by[d])
        for e in effects[d]:
            pending[e] -= 1
            if pending[e] == 0:
                ready.append(e)
    assert len(out) == len(messages)
    return out


def protocol_params(d=2.5, k=1.5, n_q=16, audit=False, weights=None) -> Params:
    return Params(
        weights=weights or FixedWeights(1),
        difficulty=ConstantDifficulty(d),
        k=units(k),
        n_q=n_q,
        audit=audit,
    )


def protocol_messages(
    rng: random.Random,
    n_proc: int,
    n_msgs: int,
    params: Optional[Params] = None,
) -> List[Message]:
    """Messages of ``n_proc`` honest processes following the simulator's lane
    policy, each seeing a random prefix of what the others sent."""
    params = params or protocol_params(d=(n_proc - 0.5) / 3)
    reps = [Replica(params) for _ in range(n_proc)]
    seen = [0] * n_proc
    log: List[Message] = []
    while len(log) < n_msgs:
        i = rng.randrange(n_proc)
        r = reps[i]
        upto = rng.randint(seen[i], len(log))
        r.receive_all(log[seen[i] : upto])
        seen[i] = upto
        G = r.graph
        m = G.generate_message(ident(i), nonce(rng), b"", lane_filter(G, ident(i)))
        r.receive_all([m])
        log.append(m)
        if seen[i] == len(log) - 1:
            seen[i] = len(log)
    return log


def build_replica(messages: Sequence[Message], params: Optional[Params] = None) -> Replica:
    r = Replica(params or protocol_params())
    for m in messages:
        assert r.receive(m) is not None, m
    r.update_order()
    return r


def vote_key(vote):
    leader, bit = vote
    return (None if leader is NO_LEADER else leader.digest, bit)


def vertex_fingerprint(v) -> tuple:
    return (
        v.round,
        v.is_last,
        v.svp,
        tuple(sorted((t, vote_key(vt)) for t, vt in v.vote.items())),
        tuple(sorted(x.digest for x in v.pattern)),
    )
