import random

import pytest

from vvorder.core import FixedWeights, units
from vvorder.graph import LamportGraph
from vvorder.rounds import ConstantDifficulty, PastNotProcessed, compute_round
from vvorder.cli import audit_records

from helpers import build_replica, msg, protocol_messages, protocol_params, random_messages, sink

UNIT_PARAMS = dict(d=1, k=1, n_q=16)


def replica(messages, **kw):
    return build_replica(messages, protocol_params(**{**UNIT_PARAMS, **kw}))


def test_sink_is_last_of_round_zero():
    r = replica([sink(0)])
    v = r.graph.get(sink(0).digest)
    assert (v.round, v.is_last) == (0, True)


def test_round_advances_over_a_last_cause():
    a = sink(0)
    b = msg(1, [a])
    r = replica([a, b])
    assert r.graph.get(b.digest).round == 1


def test_round_stays_without_last_cause():
    a, b = sink(0), sink(1)
    x = msg(2, [a])  # round 1, only one round-0 last below: not last
    y = msg(3, [x])
    r = replica([a, b, x, y])
    vx, vy = r.graph.get(x.digest), r.graph.get(y.digest)
    assert (vx.round, vx.is_last) == (1, False)
    assert (vy.round, vy.is_last) == (1, False)


def six_vertex_fixture():
    sinks = [sink(i) for i in range(4)]
    x = msg(4, sinks[:2])
    v = msg(5, [x] + sinks[2:])
    return sinks + [x, v], v


def test_six_vertex_last_fixture():
    ms, v = six_vertex_fixture()
    r = replica(ms)
    vv = r.graph.get(v.digest)
    # brute force: round-0 lasts in the past of v, each 1-reachable
    below = [u for u in r.graph.past_vertices(vv) if u.round == 0 and u.is_last]
    assert len(below) == 4
    assert all(r.graph.k_reachable(vv, u, units(1)) for u in below)
    assert (vv.round, vv.is_last) == (1, True)


def test_compute_round_needs_processed_causes():
    G = LamportGraph()
    a = G.extend(sink(0))
    b = G.extend(msg(1, [sink(0)]))
    with pytest.raises(PastNotProcessed):
        compute_round(G, b, units(1), ConstantDifficulty(1))


def test_difficulty_must_be_positive():
    with pytest.raises(ValueError):
        ConstantDifficulty(0)


def round_violations(r):
    recs = list(r.graph.dump_records())
    problems = audit_records(recs)
    return {k: v for k, v in problems.items() if k in ("round monotonicity", "last-vertex separation", "previous-round existence") and v}


def test_round_properties_on_random_graphs():
    rng = random.Random(12)
    for _ in range(25):
        ms = random_messages(rng, rng.randint(5, 120), rng.randint(2, 10), mutate_p=0.05)
        assert not round_violations(replica(ms))


def test_round_properties_on_protocol_graphs():
    rng = random.Random(13)
    for n in (4, 5, 7):
        params = protocol_params(d=(n - 0.5) / 3)
        r = build_replica(protocol_messages(rng, n, 150, params), params)
        assert max(v.round for v in r.graph) >= 5
        assert not round_violations(r)
        for v in r.graph:
            for u in r.graph.past_vertices(v):
                assert u.round <= v.round
