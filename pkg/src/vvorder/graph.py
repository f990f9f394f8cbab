"""Past-closed causality graph of vertices keyed by message digest.

Every vertex gets a graph-local integer index.  Pasts are stored as
integer bitmasks over those indices (bit set = vertex is a cause,
the vertex itself included); set algebra on pasts is then plain integer
arithmetic.  Descendant masks are built lazily and extended incrementally,
since only the targets of reachability queries ever need them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

from vvorder.core import (
    Digest,
    FixedWeights,
    MalformedMessage,
    Message,
    Vertex,
    WeightSystem,
    deserialize,
)


class VertexNotInGraph(KeyError):
    pass


class IntegrityViolation(ValueError):
    pass


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass
class MutationReport:
    id: bytes
    pairs: Set[FrozenSet[Digest]] = field(default_factory=set)

    def __bool__(self):
        return bool(self.pairs)


class LamportGraph:
    def __init__(
        self,
        weights: Optional[WeightSystem] = None,
        payload_ok: Callable[[bytes], bool] = lambda payload: True,
    ):
        self.weights = weights if weights is not None else FixedWeights()
        self.payload_ok = payload_ok
        self.vertices: Dict[Digest, Vertex] = {}
        self.by_index: List[Vertex] = []
        self.by_id: Dict[bytes, List[Vertex]] = {}
        self.tips: Dict[bytes, List[Vertex]] = {}
        self._desc: Dict[int, Tuple[int, int]] = {}  # index -> (mask, scanned up to)
        # filled in by the round computation
        self.round_mask: Dict[int, int] = {}
        self.round_lasts: Dict[int, List[Vertex]] = {}

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, item):
        if isinstance(item, Vertex):
            item = item.digest
        elif isinstance(item, Message):
            item = item.digest
        return item in self.vertices

    def __iter__(self):
        return iter(self.by_index)

    def get(self, digest: Digest) -> Vertex:
        try:
            return self.vertices[digest]
        except KeyError:
            raise VertexNotInGraph(digest.hex()) from None

    def _own(self, v: Vertex) -> Vertex:
        mine = self.vertices.get(v.digest)
        if mine is None:
            raise VertexNotInGraph(v.digest.hex())
        return mine

    # -- weights -----------------------------------------------------------

    def mask_weight(self, mask: int, above: Optional[int] = None) -> int:
        """Total weight of the vertices in ``mask``.

        With ``above`` set, summation stops as soon as the total exceeds it.
        """
        total = 0
        by_index = self.by_index
        for i in iter_bits(mask):
            total += by_index[i].weight
            if above is not None and total > above:
                break
        return total

    def mask_vertices(self, mask: int) -> List[Vertex]:
        return [self.by_index[i] for i in iter_bits(mask)]

    # -- causality ---------------------------------------------------------

    def happened_before(self, a: Vertex, b: Vertex) -> bool:
        """True iff ``a`` is a cause of ``b`` (reflexive)."""
        a, b = self._own(a), self._own(b)
        return bool(b.past_mask >> a.index & 1)

    def spacelike(self, a: Vertex, b: Vertex) -> bool:
        return not self.happened_before(a, b) and not self.happened_before(b, a)

    def past_vertices(self, v: Vertex) -> List[Vertex]:
        return self.mask_vertices(self._own(v).past_mask)

    def past(self, v: Vertex) -> "LamportGraph":
        """The past of ``v`` as a graph of its own (fresh vertices, no voting state)."""
        sub = LamportGraph(self.weights, self.payload_ok)
        for u in self.past_vertices(v):
            sub.extend(u.m)
        return sub

    def descendants_mask(self, v: Vertex) -> int:
        """Mask of all effects of ``v``, itself included."""
        i = self._own(v).index
        mask, upto = self._desc.get(i, (1 << i, i + 1))
        by_index = self.by_index
        for j in range(upto, len(by_index)):
            if by_index[j].past_mask >> i & 1:
                mask |= 1 << j
        self._desc[i] = (mask, len(by_index))
        return mask

    def between_mask(self, frm: Vertex, to: Vertex) -> int:
        """Vertices lying on some acknowledgement path from ``frm`` down to ``to``."""
        frm = self._own(frm)
        return frm.past_mask & self.descendants_mask(to)

    def path_weight(self, frm: Vertex, to: Vertex, above: Optional[int] = None) -> int:
        return self.mask_weight(self.between_mask(frm, to), above)

    def k_reachable(self, frm: Vertex, to: Vertex, k: int) -> bool:
        """Whether ``to`` is k-reachable from ``frm``: path-union weight exceeds ``k``."""
        return self.path_weight(frm, to, above=k) > k

    # -- integrity and extension ------------------------------------------

    def integrity(self, m) -> bool:
        if isinstance(m, (bytes, bytearray)):
            try:
                m = deserialize(bytes(m))
            except MalformedMessage:
                return False
        if self.weights.weight(m) <= self.weights.c_min:
            return False
        if not self.payload_ok(m.payload):
            return False
        if m.digest in self.vertices:
            return False
        refs = []
        for d in m.digests:
            v = self.vertices.get(d)
            if v is None:
                return False
            refs.append(v)
        ids = [v.id for v in refs]
        if len(set(ids)) != len(ids):
            return False
        if m.id in self.by_id:
            own = [v for v in refs if v.id == m.id]
            if not own:
                return False
            prev = own[0]
            for v in refs:
                if v is not prev and prev.past_mask >> v.index & 1:
                    return False
        return True

    def extend(self, m: Message) -> Vertex:
        if not self.integrity(m):
            raise IntegrityViolation(f"message {m.digest.hex()} fails integrity")
        return self._insert(m)

    def _insert(self, m: Message) -> Vertex:
        causes = tuple(self.vertices[d] for d in m.digests)
        index = len(self.by_index)
        bit = 1 << index
        past = bit
        for c in causes:
            past |= c.past_mask
        v = Vertex(m=m, weight=self.weights.weight(m), index=index, causes=causes, past_mask=past)
        self.vertices[m.digest] = v
        self.by_index.append(v)
        self.by_id.setdefault(m.id, []).append(v)
        self.tips[m.id] = [t for t in self.tips.get(m.id, ()) if not past >> t.index & 1] + [v]
        return v

    # -- message generation -----------------------------------------------

    def last_of_id(self, ident: bytes) -> Optional[Vertex]:
        """A last vertex of ``ident``: with several mutated tips, the one with
        the largest past, ties broken by smallest digest."""
        tips = self.tips.get(ident)
        if not tips:
            return None
        return min(tips, key=lambda t: (-bin(t.past_mask).count("1"), t.digest))

    def generate_message(
        self,
        ident: bytes,
        nonce: bytes,
        payload: bytes = b"",
        allow: Optional[Callable[[Vertex], bool]] = None,
    ) -> Message:
        """Build a message acknowledging this id's last vertex and, per other
        id, the newest acceptable vertex not already in that last vertex's past."""
        prev = self.last_of_id(ident)
        known = prev.past_mask if prev is not None else 0
        refs: List[Vertex] = [prev] if prev is not None else []
        for other in sorted(self.by_id):
            if other == ident:
                continue
            pick = None
            for v in reversed(self.by_id[other]):
                if known >> v.index & 1:
                    break
                if allow is None or allow(v):
                    pick = v
                    break
            if pick is not None:
                refs.append(pick)
        return Message(nonce, ident, tuple(v.digest for v in refs), payload)

    # -- mutations ---------------------------------------------------------

    def detect_mutations(self, ident: bytes) -> MutationReport:
        report = MutationReport(ident)
        members = self.by_id.get(ident, [])
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                if self.spacelike(a, b):
                    report.pairs.add(frozenset((a.digest, b.digest)))
        return report

    def mutated_ids(self) -> List[bytes]:
        return [ident for ident, tips in sorted(self.tips.items()) if len(tips) > 1 or self.detect_mutations(ident)]

    # -- dumps -------------------------------------------------------------

    def dump_records(self) -> Iterable[dict]:
        for v in self.by_index:
            yield {
                "digest": v.digest.hex(),
                "id": v.id.hex(),
                "causes": [d.hex() for d in v.digests],
                "weight": v.weight,
                "round": v.round,
                "is_last": v.is_last,
                "svp": list(v.svp) if v.svp is not None else None,
                "pattern": [x.digest.hex() for x in v.pattern],
            }

    def dump(self, fh) -> None:
        for rec in self.dump_records():
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_dump(fh) -> List[dict]:
    """Read a graph dump back as a list of records (order-independent)."""
    records = []
    for line in fh:
        line = line.strip()
        if line:
            records.append(json.loads(line))
    return records
