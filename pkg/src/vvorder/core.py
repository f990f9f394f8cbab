"""Messages, vertices, hashing, wire format and weight systems.

Weights live in the group of Python integers under addition.  One voting
unit is ``UNIT`` base steps; the low 64 bits of every message weight are a
hash-derived tiebreak, so two distinct messages practically never weigh the
same and sums of fewer than 2**32 tiebreaks stay below one unit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, Optional, Tuple, Union

DIGEST_SIZE = 32
NONCE_SIZE = 8
ID_SIZE = 16
COUNT_SIZE = 2
HEADER_SIZE = NONCE_SIZE + ID_SIZE + COUNT_SIZE
MAX_DIGESTS = (1 << (8 * COUNT_SIZE)) - 1

TIEBREAK_BITS = 64
UNIT = 1 << 96

Digest = bytes


class MalformedMessage(ValueError):
    """Byte string does not decode to a well-formed message."""


def hash_bytes(data: bytes) -> Digest:
    return hashlib.sha256(data).digest()


def units(value: Union[int, float, str, Fraction]) -> int:
    """Convert a human-scale weight (e.g. ``2.5``) into base weight steps."""
    return int(Fraction(str(value)) * UNIT)


def to_units(weight: int) -> float:
    return weight / UNIT


@dataclass(frozen=True)
class Message:
    nonce: bytes
    id: bytes
    digests: Tuple[Digest, ...] = ()
    payload: bytes = b""

    def __post_init__(self):
        if len(self.nonce) != NONCE_SIZE:
            raise MalformedMessage(f"nonce must be {NONCE_SIZE} bytes")
        if len(self.id) != ID_SIZE:
            raise MalformedMessage(f"id must be {ID_SIZE} bytes")
        if not isinstance(self.digests, tuple):
            object.__setattr__(self, "digests", tuple(self.digests))
        if len(self.digests) > MAX_DIGESTS:
            raise MalformedMessage("too many digests")
        for d in self.digests:
            if len(d) != DIGEST_SIZE:
                raise MalformedMessage(f"digest must be {DIGEST_SIZE} bytes")
        if len(set(self.digests)) != len(self.digests):
            raise MalformedMessage("duplicate digests")

    @cached_property
    def raw(self) -> bytes:
        return serialize(self)

    @cached_property
    def digest(self) -> Digest:
        return hash_bytes(self.raw)

    @cached_property
    def _hash(self) -> int:
        return hash(self.digest)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Message):
            return NotImplemented
        return self.digest == other.digest

    def __repr__(self):
        return f"Message({self.digest.hex()[:12]}, id={self.id.hex()[:8]}, n={len(self.digests)})"


def serialize(m: Message) -> bytes:
    return b"".join(
        (
            m.nonce,
            m.id,
            len(m.digests).to_bytes(COUNT_SIZE, "big"),
            *m.digests,
            m.payload,
        )
    )


def deserialize(data: bytes) -> Message:
    if len(data) < HEADER_SIZE:
        raise MalformedMessage(f"need at least {HEADER_SIZE} bytes, got {len(data)}")
    nonce = data[:NONCE_SIZE]
    ident = data[NONCE_SIZE : NONCE_SIZE + ID_SIZE]
    count = int.from_bytes(data[NONCE_SIZE + ID_SIZE : HEADER_SIZE], "big")
    end = HEADER_SIZE + count * DIGEST_SIZE
    if len(data) < end:
        raise MalformedMessage(f"declared {count} digests but only {len(data) - HEADER_SIZE} bytes follow")
    digests = tuple(data[i : i + DIGEST_SIZE] for i in range(HEADER_SIZE, end, DIGEST_SIZE))
    return Message(nonce, ident, digests, data[end:])


class _NoLeader:
    """The distinguished non-message: a round that decided no leader."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    digest = None

    def __repr__(self):
        return "NO_LEADER"

    def __reduce__(self):
        return (_NoLeader, ())


NO_LEADER = _NoLeader()
LeaderValue = Union[Message, _NoLeader]


def encode_leader(value: LeaderValue) -> bytes:
    if value is NO_LEADER:
        return b"\x00"
    return b"\x01" + serialize(value)


def decode_leader(data: bytes) -> LeaderValue:
    if data == b"\x00":
        return NO_LEADER
    if not data or data[0] != 1:
        raise MalformedMessage("bad leader value tag")
    return deserialize(data[1:])


def leader_key(value: LeaderValue) -> Tuple[int, bytes]:
    """Sort key: messages by digest, the non-message after all of them."""
    if value is NO_LEADER:
        return (1, b"")
    return (0, value.digest)


# A vote is (leader value, bit) with bit in {None, 0, 1}; None is undecided.
Vote = Tuple[LeaderValue, Optional[int]]


class WeightSystem:
    c_min: int = 0

    def weight(self, m: Message) -> int:
        raise NotImplementedError

    @staticmethod
    def combine(weights: Iterable[int]) -> int:
        return sum(weights, 0)


def tiebreak(digest: Digest) -> int:
    return int.from_bytes(digest[-TIEBREAK_BITS // 8 :], "big")


class FixedWeights(WeightSystem):
    """Every message carries the same base weight plus its hash tiebreak."""

    def __init__(self, base=1, c_min=0):
        self.base = units(base)
        self.c_min = units(c_min)

    def weight(self, m: Message) -> int:
        return self.base + tiebreak(m.digest)


def leading_zero_bits(digest: Digest) -> int:
    value = int.from_bytes(digest, "big")
    return DIGEST_SIZE * 8 - value.bit_length()


class PowWeights(WeightSystem):
    """Hashcash style: a message weighs 2**(leading zero bits of its hash) units."""

    def __init__(self, c_min=0):
        self.c_min = units(c_min)

    def weight(self, m: Message) -> int:
        return (UNIT << leading_zero_bits(m.digest)) + tiebreak(m.digest)


@dataclass(eq=False)
class Vertex:
    m: Message
    weight: int
    round: Optional[int] = None
    is_last: Optional[bool] = None
    svp: Optional[Tuple[int, ...]] = None
    vote: Dict[int, Vote] = field(default_factory=dict)
    total_position: Optional[int] = None
    # graph-local bookkeeping
    index: int = -1
    causes: Tuple["Vertex", ...] = ()
    past_mask: int = 0
    # members of this vertex's safe voting pattern and their round tallies
    pattern: Tuple["Vertex", ...] = ()
    tallies: Dict[int, Dict[Vote, int]] = field(default_factory=dict)
    # copied from m; read in hot loops
    digest: Digest = field(init=False, repr=False)
    id: bytes = field(init=False, repr=False)

    def __post_init__(self):
        self.digest = self.m.digest
        self.id = self.m.id

    @property
    def nonce(self) -> bytes:
        return self.m.nonce

    @property
    def digests(self) -> Tuple[Digest, ...]:
        return self.m.digests

    @property
    def payload(self) -> bytes:
        return self.m.payload

    def equivalent(self, other: "Vertex") -> bool:
        return self.m == other.m

    def __repr__(self):
        return f"Vertex({self.digest.hex()[:10]}, r={self.round}, last={self.is_last})"
