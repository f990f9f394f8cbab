import io
import random

import pytest

from vvorder.core import FixedWeights, Message, units
from vvorder.graph import IntegrityViolation, LamportGraph, VertexNotInGraph, load_dump

from helpers import closure_oracle, ident, msg, path_union_oracle, random_messages, random_topological, sink


def build(messages, weights=None):
    G = LamportGraph(weights)
    for m in messages:
        G.extend(m)
    return G


def test_extend_empty_graph():
    G = LamportGraph()
    v = G.extend(sink(0))
    assert len(G) == 1 and v.causes == ()


def test_integrity_rules():
    G = LamportGraph()
    a, b = sink(0), sink(1)
    assert G.integrity(a)
    G.extend(a)
    G.extend(b)
    assert not G.integrity(a)  # already present
    assert not G.integrity(Message(b"x" * 8, ident(2), (b"\x09" * 32,)))  # unknown digest
    a2 = msg(0, [a], tag=1)
    assert G.integrity(a2)
    G.extend(a2)
    assert not G.integrity(msg(2, [a, a2], tag=3))  # two references of one id
    assert not G.integrity(msg(0, [b], tag=4))  # own id known but not referenced
    assert not G.integrity(sink(0, tag=5))  # second sink of a known id
    # own reference whose past already holds another reference
    c = msg(1, [b, a], tag=6)
    G.extend(c)
    assert G.integrity(msg(1, [c, a2], tag=7))
    # an older own vertex may be referenced: that is how mutations arise
    assert G.integrity(Message(b"z" * 8, ident(1), (b.digest, a2.digest)))


def test_integrity_rejects_reference_in_past_of_own_vertex():
    G = LamportGraph()
    a, b = sink(0), sink(1)
    G.extend(a)
    G.extend(b)
    b2 = msg(1, [b, a], tag=1)
    G.extend(b2)
    # references own b2 and a, but a is already in b2's past
    assert not G.integrity(msg(1, [b2, a], tag=2))


def test_integrity_weight_threshold_and_payload_predicate():
    G = LamportGraph(FixedWeights(1, c_min=2))
    assert not G.integrity(sink(0))
    G = LamportGraph(payload_ok=lambda p: len(p) < 2)
    assert G.integrity(Message(b"n" * 8, ident(0), (), b"a"))
    assert not G.integrity(Message(b"n" * 8, ident(0), (), b"ab"))
    assert not G.integrity(b"short")


def test_extend_raises_on_bad_message():
    G = LamportGraph()
    with pytest.raises(IntegrityViolation):
        G.extend(Message(b"x" * 8, ident(2), (b"\x09" * 32,)))


def test_unknown_vertex_queries():
    G = build([sink(0)])
    H = build([sink(1)])
    with pytest.raises(VertexNotInGraph):
        G.happened_before(H.get(sink(1).digest), G.get(sink(0).digest))
    with pytest.raises(VertexNotInGraph):
        G.get(b"\0" * 32)


def test_causality_matches_closure_oracle():
    rng = random.Random(5)
    for trial in range(50):
        ms = random_messages(rng, rng.randint(1, 50), rng.randint(1, 8), mutate_p=0.1)
        G = build(ms)
        oracle = closure_oracle(ms)
        for a in G:
            assert {x.digest for x in G.past_vertices(a)} == oracle[a.digest]
            for b in G:
                assert G.happened_before(a, b) == (a.digest in oracle[b.digest])


def test_diamond_k_reachability():
    d = sink(0)
    b = msg(1, [d])
    c = msg(2, [d])
    a = msg(3, [b, c])
    G = build([d, b, c, a])
    va, vd = G.get(a.digest), G.get(d.digest)
    assert {x.digest for x in G.mask_vertices(G.between_mask(va, vd))} == {a.digest, b.digest, c.digest, d.digest}
    assert G.k_reachable(va, vd, units(3))
    assert not G.k_reachable(va, vd, units(4) + (1 << 70))
    assert path_union_oracle([d, b, c, a], a.digest, d.digest) == {a.digest, b.digest, c.digest, d.digest}


def test_k_reachability_edge_cases():
    a, b = sink(0), sink(1)
    G = build([a, b])
    va, vb = G.get(a.digest), G.get(b.digest)
    assert G.k_reachable(va, va, 0)
    assert not G.k_reachable(va, va, va.weight)
    for k in (0, units(1), units(5)):
        assert not G.k_reachable(va, vb, k)


def test_k_reachability_matches_dfs_oracle():
    rng = random.Random(6)
    for trial in range(30):
        ms = random_messages(rng, rng.randint(2, 25), rng.randint(1, 6), mutate_p=0.1, fanout=2)
        G = build(ms)
        total = sum(v.weight for v in G) // units(1) + 1
        for a in G:
            for b in G:
                union = path_union_oracle(ms, a.digest, b.digest)
                w = sum(G.get(x).weight for x in union)
                for k in range(total + 1):
                    assert G.k_reachable(a, b, units(k)) == (w > units(k))


def test_generate_message():
    G = LamportGraph()
    m0 = G.generate_message(ident(0), b"\0" * 8)
    assert m0.digests == ()
    G.extend(m0)
    m1 = G.generate_message(ident(0), b"\1" * 8)
    assert m1.digests == (m0.digest,)
    G = build(random_messages(random.Random(8), 60, 5, mutate_p=0.15))
    for i in range(6):
        m = G.generate_message(ident(i), bytes([i]) * 8, b"p")
        assert G.integrity(m)
        G.extend(m)


def test_mutations():
    a = sink(0)
    chain = [a, msg(0, [a], tag=1)]
    chain.append(msg(0, [chain[-1]], tag=2))
    G = build(chain)
    assert not G.detect_mutations(ident(0))
    G.extend(msg(0, [a], tag=9))  # sibling of chain[1]
    report = G.detect_mutations(ident(0))
    assert len(report.pairs) == 2  # spacelike with chain[1] and chain[2]
    assert G.mutated_ids() == [ident(0)]


def test_last_of_id_prefers_larger_past():
    a, b = sink(0), sink(1)
    x = msg(0, [a], tag=1)
    y = msg(0, [a, b], tag=2)
    G = build([a, b, x, y])
    assert G.last_of_id(ident(0)).digest == y.digest


def test_insertion_order_does_not_change_pasts():
    rng = random.Random(9)
    for _ in range(20):
        ms = random_messages(rng, 80, 8, mutate_p=0.1)
        G1 = build(ms)
        G2 = build(random_topological(rng, ms))
        for v in G1:
            w = G2.get(v.digest)
            assert {x.digest for x in G1.past_vertices(v)} == {x.digest for x in G2.past_vertices(w)}


def test_dump_roundtrip():
    G = build(random_messages(random.Random(10), 20, 4))
    buf = io.StringIO()
    G.dump(buf)
    buf.seek(0)
    recs = load_dump(buf)
    assert [r["digest"] for r in recs] == [v.digest.hex() for v in G]
    assert all(set(r) >= {"digest", "id", "causes", "weight", "round", "is_last"} for r in recs)


def test_past_subgraph():
    ms = random_messages(random.Random(11), 30, 4)
    G = build(ms)
    v = G.get(ms[-1].digest)
    sub = G.past(v)
    assert {x.digest for x in sub} == {x.digest for x in G.past_vertices(v)}
