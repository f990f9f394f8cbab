"""Virtual synchronous round numbers and the last-vertex flag."""

from __future__ import annotations

from typing import List, Tuple

from vvorder.core import Vertex, units
from vvorder.graph import LamportGraph


class PastNotProcessed(RuntimeError):
    """A cause of the vertex has not been through this pipeline stage yet."""


class ConstantDifficulty:
    """Same difficulty in every round."""

    def __init__(self, value=1):
        self.value = units(value)
        if self.value <= 0:
            raise ValueError("difficulty must be positive")

    def __call__(self, r: int) -> int:
        return self.value

    def __repr__(self):
        return f"ConstantDifficulty({self.value})"


def reachable_lasts(G: LamportGraph, v: Vertex, s: int, k: int) -> List[Vertex]:
    """Last round-``s`` vertices in the past of ``v`` that are k-reachable from it."""
    out = []
    for x in G.round_lasts.get(s, ()):
        if v.past_mask >> x.index & 1 and G.k_reachable(v, x, k):
            out.append(x)
    return out


def compute_round(G: LamportGraph, v: Vertex, k: int, d) -> Tuple[int, bool]:
    v = G._own(v)
    r = 0
    bump = False
    for c in v.causes:
        if c.round is None:
            raise PastNotProcessed(repr(c))
        if c.round > r:
            r, bump = c.round, bool(c.is_last)
        elif c.round == r and c.is_last:
            bump = True
    v.round = r + 1 if bump else r
    if v.round == 0:
        v.is_last = True
    else:
        threshold = 3 * d(v.round)
        total = 0
        for x in reachable_lasts(G, v, v.round - 1, k):
            total += x.weight
            if total > threshold:
                break
        v.is_last = total > threshold
    G.round_mask[v.round] = G.round_mask.get(v.round, 0) | (1 << v.index)
    if v.is_last:
        G.round_lasts.setdefault(v.round, []).append(v)
    return v.round, v.is_last
