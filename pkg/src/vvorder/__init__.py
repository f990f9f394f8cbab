"""Leaderless total ordering of messages by virtual voting on causality graphs."""

from vvorder.core import (
    NO_LEADER,
    UNIT,
    Digest,
    FixedWeights,
    MalformedMessage,
    Message,
    PowWeights,
    Vertex,
    deserialize,
    hash_bytes,
    serialize,
)
from vvorder.graph import IntegrityViolation, LamportGraph, VertexNotInGraph
from vvorder.leader import LeaderStream, long_chain
from vvorder.order import choose_leader, kahn_order
from vvorder.rounds import ConstantDifficulty

__all__ = [
    "NO_LEADER",
    "UNIT",
    "ConstantDifficulty",
    "Digest",
    "FixedWeights",
    "IntegrityViolation",
    "LamportGraph",
    "LeaderStream",
    "MalformedMessage",
    "Message",
    "PowWeights",
    "Vertex",
    "VertexNotInGraph",
    "choose_leader",
    "deserialize",
    "hash_bytes",
    "kahn_order",
    "long_chain",
    "serialize",
]

__version__ = "0.1.0"
