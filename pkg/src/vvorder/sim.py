"""Deterministic discrete-event simulation of honest and byzantine processes.

Everything random is drawn from per-process ``random.Random`` streams
derived from the master seed, and events are processed in (time, sequence)
order, so a (config, seed) pair always produces the same trace.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

import yaml

from vvorder.core import NONCE_SIZE, UNIT, Message, WeightSystem, FixedWeights, tiebreak, to_units, units
from vvorder.graph import LamportGraph
from vvorder.protocol import Params, Replica
from vvorder.rounds import ConstantDifficulty

SCHEMA_VERSION = 1
STRATEGIES = ("none", "mutate", "strategic_dissemination", "time_travel")


class ConfigInvalid(ValueError):
    pass


# -- configuration -----------------------------------------------------------


@dataclass
class WeightSpec:
    system: str = "fixed"  # fixed | simpow
    base: float = 1.0
    growth: float = 0.0  # simpow: chance of each extra doubling
    c_min: float = 0.0


@dataclass
class ByzantineSpec:
    count: int = 0
    strategy: str = "none"
    budget: float = 0.0  # max adversary weight per round, in units
    after_rounds: int = 20  # time_travel: finalized rounds before the bomb
    bomb_exponent: int = 6  # time_travel: bomb weighs base * 2**exponent
    targets: float = 0.5  # strategic_dissemination: share of peers served


@dataclass
class Rates:
    discovery: float = 0.2
    gossip: float = 4.0
    generate: float = 1.0


@dataclass
class Duration:
    rounds: Optional[int] = 30  # stop generating once every honest tip reaches it
    time: Optional[float] = None
    events: Optional[int] = None
    messages: Optional[int] = None  # stop generating after this many honest messages
    drain: float = 30.0  # gossip-only time after generation stops


@dataclass
class SimConfig:
    processes: int = 8
    byzantine: ByzantineSpec = field(default_factory=ByzantineSpec)
    weights: WeightSpec = field(default_factory=WeightSpec)
    difficulty: float = 2.5
    k: float = 1.5
    n_q: int = 16
    rates: Rates = field(default_factory=Rates)
    delay: Tuple[float, float] = (0.05, 0.3)
    payload_size: int = 8
    duration: Duration = field(default_factory=Duration)
    view_size: int = 8
    push_limit: int = 32
    audit: bool = True
    seed: int = 1

    def validate(self) -> "SimConfig":
        problems = []
        if self.processes < 1:
            problems.append("processes must be >= 1")
        if min(self.rates.discovery, self.rates.gossip, self.rates.generate) <= 0:
            problems.append("all rates must be > 0")
        lo, hi = self.delay
        if not 0 <= lo <= hi:
            problems.append("delay must be a band 0 <= lo <= hi")
        if self.byzantine.strategy not in STRATEGIES:
            problems.append(f"unknown byzantine strategy {self.byzantine.strategy!r}")
        if self.byzantine.count < 0 or self.byzantine.budget < 0:
            problems.append("byzantine count and budget must be >= 0")
        if self.byzantine.count and self.byzantine.strategy == "none":
            problems.append("byzantine count given without a strategy")
        try:
            units(self.byzantine.budget)
        except (ValueError, ArithmeticError):
            problems.append("byzantine budget is not a weight")
        if self.weights.system not in ("fixed", "simpow"):
            problems.append(f"unknown weight system {self.weights.system!r}")
        if not 0 <= self.weights.growth < 1:
            problems.append("weights.growth must be in [0, 1)")
        if self.difficulty <= 0 or self.k < 0 or self.n_q < 1:
            problems.append("difficulty > 0, k >= 0 and n_q >= 1 required")
        if self.payload_size < 0 or self.view_size < 1 or self.push_limit < 1:
            problems.append("payload_size, view_size and push_limit out of range")
        d = self.duration
        if d.rounds is None and d.time is None and d.events is None and d.messages is None:
            problems.append("duration needs rounds, time, events or messages")
        if problems:
            raise ConfigInvalid("; ".join(problems))
        return self

    def to_dict(self) -> dict:
        out = asdict(self)
        out["delay"] = list(self.delay)
        out["schema_version"] = SCHEMA_VERSION
        return out


_NESTED = {"byzantine": ByzantineSpec, "weights": WeightSpec, "rates": Rates, "duration": Duration}


def config_from_dict(data: Dict[str, Any]) -> SimConfig:
    if not isinstance(data, dict):
        raise ConfigInvalid("scenario must be a mapping")
    data = dict(data)
    version = data.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigInvalid(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    known = {f.name for f in fields(SimConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigInvalid(f"unknown keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _NESTED:
            cls = _NESTED[key]
            if not isinstance(value, dict):
                raise ConfigInvalid(f"{key} must be a mapping")
            bad = set(value) - {f.name for f in fields(cls)}
            if bad:
                raise ConfigInvalid(f"unknown keys in {key}: {sorted(bad)}")
            kwargs[key] = cls(**value)
        elif key == "delay":
            if not isinstance(value, (list, tuple)) or len(value) != 2:
                raise ConfigInvalid("delay must be [lo, hi]")
            kwargs[key] = (float(value[0]), float(value[1]))
        else:
            kwargs[key] = value
    try:
        return SimConfig(**kwargs).validate()
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from None


def load_config(path) -> SimConfig:
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigInvalid(f"cannot parse {path}: {exc}") from None
    return config_from_dict(data)


# -- weights -----------------------------------------------------------------


class SimulatedPow(WeightSystem):
    """Stands in for hashcash: the first nonce byte records a drawn exponent
    and the message weighs ``base * 2**exponent`` units plus the tiebreak."""

    def __init__(self, base=1, c_min=0):
        self.base = units(base)
        self.c_min = units(c_min)

    def weight(self, m: Message) -> int:
        return (self.base << m.nonce[0]) + tiebreak(m.digest)


def make_weights(spec: WeightSpec) -> WeightSystem:
    if spec.system == "fixed":
        return FixedWeights(spec.base, spec.c_min)
    return SimulatedPow(spec.base, spec.c_min)


def make_params(cfg: SimConfig) -> Params:
    return Params(
        weights=make_weights(cfg.weights),
        difficulty=ConstantDifficulty(cfg.difficulty),
        k=units(cfg.k),
        n_q=cfg.n_q,
        audit=cfg.audit,
    )


def derive_seed(master: int, *labels) -> int:
    h = hashlib.sha256(repr((master,) + labels).encode()).digest()
    return int.from_bytes(h[:8], "big")


def process_id(i: int) -> bytes:
    return hashlib.sha256(f"process-{i}".encode()).digest()[:16]


# -- processes ---------------------------------------------------------------


def lane_filter(G: LamportGraph, ident: bytes):
    """References allowed for the next message of ``ident``.

    The next message aims at one round past a last tip, or stays in the
    tip's round otherwise; it may acknowledge anything older than that
    round and the non-last vertices of that round.  That keeps every
    process from skipping a round's voting or racing ahead of the others.
    """
    tip = G.last_of_id(ident)
    if tip is None:
        return lambda v: False  # genesis is a sink
    target = tip.round + 1 if tip.is_last else tip.round
    return lambda v: v.round < target or (v.round == target and not v.is_last)


class Node:
    kind = "honest"

    def __init__(self, index: int, cfg: SimConfig, params: Params):
        self.index = index
        self.id = process_id(index)
        self.cfg = cfg
        self.rng = random.Random(derive_seed(cfg.seed, "process", index))
        self.replica = Replica(params)
        self.view: List[int] = []
        self.orphans: Dict[bytes, Message] = {}
        self.generated: List[Message] = []
        self.fin_rounds = 0
        self.rebuilt_from: Optional[int] = None

    @property
    def graph(self) -> LamportGraph:
        return self.replica.graph

    def draw_exponent(self) -> int:
        e = 0
        while e < 255 and self.rng.random() < self.cfg.weights.growth:
            e += 1
        return e

    def nonce(self, exponent: Optional[int] = None) -> bytes:
        e = self.draw_exponent() if exponent is None else exponent
        return bytes([e]) + self.rng.randbytes(NONCE_SIZE - 1)

    def make_message(self, exponent: Optional[int] = None) -> Message:
        G = self.graph
        payload = self.rng.randbytes(self.cfg.payload_size)
        return G.generate_message(self.id, self.nonce(exponent), payload, lane_filter(G, self.id))

    def generate(self, sim: "Simulation") -> None:
        m = self.make_message()
        self.generated.append(m)
        self.accept([m])

    def accept(self, msgs: List[Message]) -> List[bytes]:
        """Buffer, insert whatever became causally complete, return missing digests."""
        G = self.graph
        for m in msgs:
            if m.digest not in G.vertices:
                self.orphans.setdefault(m.digest, m)
        inserted = True
        while inserted:
            inserted = False
            for digest in sorted(self.orphans):
                m = self.orphans[digest]
                if all(d in G.vertices for d in m.digests):
                    del self.orphans[digest]
                    self.replica.receive(m)  # dropped silently on integrity failure
                    inserted = True
        start = self.replica.update_order()
        if start is not None:
            self.rebuilt_from = start if self.rebuilt_from is None else min(start, self.rebuilt_from)
        missing = set()
        for m in self.orphans.values():
            missing.update(d for d in m.digests if d not in G.vertices and d not in self.orphans)
        return sorted(missing)

    def push_set(self) -> List[Message]:
        """Newest messages not yet placed in the local total order."""
        out = []
        for v in reversed(self.graph.by_index):
            if v.total_position is None:
                out.append(v.m)
                if len(out) >= self.cfg.push_limit:
                    break
        out.reverse()
        return out

    def push_targets(self) -> List[int]:
        return self.view

    def serves(self, peer: int) -> bool:
        return True


class MutatingNode(Node):
    """Emits same-id sibling pairs and hands each sibling to a different half of its view."""

    kind = "mutate"

    def __init__(self, index, cfg, params):
        super().__init__(index, cfg, params)
        self.spent: Dict[int, int] = {}
        self.mutations = 0

    def generate(self, sim):
        G = self.graph
        tip = G.last_of_id(self.id)
        if tip is None:
            # two same-id sinks would not be mutations: integrity rejects
            # the second one wherever the first is known
            Node.generate(self, sim)
            return
        target = tip.round + 1 if tip.is_last else tip.round
        a = self.make_message()
        known = 0
        for d in a.digests:
            known |= G.vertices[d].past_mask
        lasts = sum(1 << x.index for x in G.round_lasts.get(target - 1, ()))
        if G.mask_weight(known & lasts) <= 3 * self.replica.params.difficulty(target):
            return  # only spend weight on vertices that will be last
        b = Message(self.nonce(a.nonce[0]), a.id, a.digests, a.payload)
        cost = self.replica.params.weights.weight(a) + self.replica.params.weights.weight(b)
        if self.spent.get(target, 0) + cost > units(self.cfg.byzantine.budget):
            return
        self.spent[target] = self.spent.get(target, 0) + cost
        self.generated += [a, b]
        self.mutations += 1
        self.accept([a, b])
        peers = sorted(self.view)
        half = len(peers) // 2
        for j, peer in enumerate(peers):
            sim.send(self, peer, "msgs", [a] if j < half else [b])


class StrategicNode(Node):
    """Generates like an honest process but only serves a fixed subset of peers."""

    kind = "strategic_dissemination"

    def __init__(self, index, cfg, params):
        super().__init__(index, cfg, params)
        n = cfg.processes + cfg.byzantine.count
        others = [j for j in range(n) if j != index]
        self.rng.shuffle(others)
        self.favoured = sorted(others[: max(1, int(len(others) * cfg.byzantine.targets))])

    def push_targets(self):
        return self.favoured

    def serves(self, peer):
        return peer in self.favoured


class TimeTravelNode(Node):
    """Stays silent, then drops a heavy sink once enough rounds are finalized."""

    kind = "time_travel"

    def __init__(self, index, cfg, params):
        super().__init__(index, cfg, params)
        self.bomb: Optional[Message] = None

    def generate(self, sim):
        if self.bomb is not None or sim.min_honest_finalized_rounds() < self.cfg.byzantine.after_rounds:
            return
        exponent = self.cfg.byzantine.bomb_exponent
        self.bomb = Message(self.nonce(exponent), self.id, (), self.rng.randbytes(self.cfg.payload_size))
        self.generated.append(self.bomb)
        sim.snapshot_before_bomb()
        self.accept([self.bomb])
        for peer in sim.honest_indices():
            sim.send(self, peer, "msgs", [self.bomb])


NODE_TYPES = {
    "mutate": MutatingNode,
    "strategic_dissemination": StrategicNode,
    "time_travel": TimeTravelNode,
}


# -- simulation --------------------------------------------------------------


@dataclass
class SimReport:
    config: SimConfig
    metrics: List[dict]
    summary: dict
    nodes: List[Node]

    @property
    def honest(self) -> List[Node]:
        return [n for n in self.nodes if n.kind == "honest"]

    def metrics_lines(self) -> List[str]:
        lines = [json.dumps(rec, sort_keys=True) for rec in self.metrics]
        lines.append(json.dumps({"metric": "summary", **self.summary}, sort_keys=True))
        return lines

    def write(self, out_dir) -> List[str]:
        """Write metrics, graph, order and leader-stream dumps; return file names."""
        import os

        os.makedirs(out_dir, exist_ok=True)
        written = []

        def put(name, lines):
            with open(os.path.join(out_dir, name), "w") as fh:
                for line in lines:
                    fh.write(line + "\n")
            written.append(name)

        put("metrics.jsonl", self.metrics_lines())
        for n in self.nodes:
            tag = f"p{n.index:02d}"
            put(f"graph-{tag}.jsonl", (json.dumps(r, sort_keys=True) for r in n.graph.dump_records()))
            recs = n.replica.orderer.dump_records(n.replica.stream)
            put(f"order-{tag}.jsonl", (json.dumps(r, sort_keys=True) for r in recs))
            put(f"leaders-{tag}.jsonl", (json.dumps(r, sort_keys=True) for r in n.replica.stream.dump_records()))
        return written


def common_prefix(a: List[bytes], b: List[bytes]) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def agreement_ratio(a: List[bytes], b: List[bytes]) -> float:
    shortest = min(len(a), len(b))
    return 1.0 if shortest == 0 else common_prefix(a, b) / shortest


class Simulation:
    GEN, GOSSIP, DISCOVER, DELIVER = "generate", "gossip", "discover", "deliver"

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg.validate()
        params = make_params(cfg)
        self.params = params
        n_honest, n_byz = cfg.processes, cfg.byzantine.count
        self.nodes: List[Node] = [Node(i, cfg, params) for i in range(n_honest)]
        for j in range(n_byz):
            self.nodes.append(NODE_TYPES[cfg.byzantine.strategy](n_honest + j, cfg, params))
        self.rng = random.Random(derive_seed(cfg.seed, "network"))
        everyone = list(range(len(self.nodes)))
        for node in self.nodes:
            peers = [j for j in everyone if j != node.index]
            node.view = sorted(node.rng.sample(peers, min(cfg.view_size, len(peers))))
        self.queue: List[tuple] = []
        self.seq = 0
        self.now = 0.0
        self.events = 0
        self.generating = True
        self.stop_time: Optional[float] = None
        self.metrics: List[dict] = []
        self.violations: List[Tuple[int, str]] = []
        self.max_candidates = 0
        self.candidate_growth = 0
        self.finalized_seen: Dict[int, List[bytes]] = {}
        self.prefix_regressions = 0
        self.bomb_snapshot: Optional[Dict[int, List[bytes]]] = None

    # queue plumbing

    def schedule(self, t: float, kind: str, node: int, data=None) -> None:
        heapq.heappush(self.queue, (t, self.seq, kind, node, data))
        self.seq += 1

    def send(self, src: Node, dst: int, what: str, payload) -> None:
        lo, hi = self.cfg.delay
        self.schedule(self.now + src.rng.uniform(lo, hi), self.DELIVER, dst, (src.index, what, payload))

    def tick(self, node: Node, kind: str, rate: float) -> None:
        self.schedule(self.now + node.rng.expovariate(rate), kind, node.index)

    def record(self, metric: str, value, **extra) -> None:
        self.metrics.append({"t": round(self.now, 9), "metric": metric, "value": value, **extra})

    # omniscient helpers

    def honest_indices(self) -> List[int]:
        return [n.index for n in self.nodes if n.kind == "honest"]

    def min_honest_finalized_rounds(self) -> int:
        return min(n.replica.orderer.finalized_rounds(n.replica.stream) for n in self.nodes if n.kind == "honest")

    def finalized_digests(self, node: Node) -> List[bytes]:
        return [v.digest for v in node.replica.finalized()]

    def snapshot_before_bomb(self) -> None:
        self.bomb_snapshot = {i: self.finalized_digests(self.nodes[i]) for i in self.honest_indices()}
        self.record("bomb_injected", len(self.bomb_snapshot))

    def done_generating(self) -> bool:
        d = self.cfg.duration
        if d.time is not None and self.now >= d.time:
            return True
        if d.messages is not None:
            made = sum(len(n.generated) for n in self.nodes if n.kind == "honest")
            if made >= d.messages:
                return True
        if d.rounds is not None:
            tips = [n.graph.last_of_id(n.id) for n in self.nodes if n.kind == "honest"]
            return all(t is not None and t.round >= d.rounds for t in tips)
        return False

    # event handlers

    def observe(self, node: Node, before_stream: Dict[int, Any]) -> None:
        rep = node.replica
        if rep.violations:
            for v in rep.violations:
                self.violations.append((node.index, v))
                self.record("violation", v, process=node.index)
            rep.violations.clear()
        if node.kind != "honest":
            return
        for r, cs in rep.stream.sets.items():
            if before_stream.get(r) is not cs:
                size = len(cs)
                old = before_stream.get(r)
                if old is not None and size > len(old) and rep.stream.is_decided(r):
                    self.candidate_growth += 1
                self.max_candidates = max(self.max_candidates, size)
                if old is None or size != len(old) or rep.stream.is_decided(r):
                    self.record("candidates", size, process=node.index, round=r)
        n_rounds = rep.orderer.finalized_rounds(rep.stream)
        moved = node.rebuilt_from is not None and node.rebuilt_from < node.fin_rounds
        node.rebuilt_from = None
        if n_rounds != node.fin_rounds or moved:
            node.fin_rounds = n_rounds
            fin = self.finalized_digests(node)
            prev = self.finalized_seen.get(node.index, [])
            if len(fin) < len(prev) or fin[: len(prev)] != prev:
                self.prefix_regressions += 1
            if len(fin) != len(prev):
                self.record("finalized_prefix", len(fin), process=node.index)
            self.finalized_seen[node.index] = fin

    def handle(self, kind: str, idx: int, data) -> None:
        node = self.nodes[idx]
        snap = dict(node.replica.stream.sets)
        if kind == self.GEN:
            if self.generating:
                node.generate(self)
                self.tick(node, self.GEN, self.cfg.rates.generate)
        elif kind == self.GOSSIP:
            targets = node.push_targets()
            if targets:
                peer = targets[node.rng.randrange(len(targets))]
                self.send(node, peer, "msgs", node.push_set())
            self.tick(node, self.GOSSIP, self.cfg.rates.gossip)
        elif kind == self.DISCOVER:
            if node.view:
                peer = node.view[node.rng.randrange(len(node.view))]
                share = node.rng.sample(node.view, min(len(node.view), max(1, self.cfg.view_size // 2)))
                self.send(node, peer, "peers", sorted(set(share) | {node.index}))
            self.tick(node, self.DISCOVER, self.cfg.rates.discovery)
        else:
            src, what, payload = data
            if what == "msgs":
                missing = node.accept(payload)
                if missing:
                    self.send(node, src, "pull", missing)
            elif what == "pull":
                if node.serves(src):
                    have = [node.graph.vertices[d].m for d in payload if d in node.graph.vertices]
                    if have:
                        self.send(node, src, "msgs", have)
            elif what == "peers":
                merged = sorted((set(node.view) | set(payload)) - {node.index})
                if len(merged) > self.cfg.view_size:
                    merged = sorted(node.rng.sample(merged, self.cfg.view_size))
                node.view = merged
        self.observe(node, snap)

    def run(self) -> SimReport:
        cfg = self.cfg
        for node in self.nodes:
            self.tick(node, self.GEN, cfg.rates.generate)
            self.tick(node, self.GOSSIP, cfg.rates.gossip)
            self.tick(node, self.DISCOVER, cfg.rates.discovery)
        max_round = -1
        while self.queue:
            if cfg.duration.events is not None and self.events >= cfg.duration.events:
                break
            t, _, kind, idx, data = heapq.heappop(self.queue)
            self.now = t
            if self.stop_time is not None and t > self.stop_time:
                break
            self.events += 1
            self.handle(kind, idx, data)
            if self.generating and self.done_generating():
                self.generating = False
                self.stop_time = self.now + cfg.duration.drain
                self.record("generation_stopped", self.events)
            if kind == self.GEN:
                r = max((v.round for v in self.nodes[idx].graph.by_index[-1:]), default=-1)
                if r > max_round:
                    max_round = r
                    self.record("max_round", r)
        return self.report()

    # final metrics

    def report(self) -> SimReport:
        honest = [n for n in self.nodes if n.kind == "honest"]
        D = self.params.difficulty
        fins = {n.index: self.finalized_digests(n) for n in honest}
        ratios = []
        for a in honest:
            for b in honest:
                if a.index < b.index:
                    ratio = agreement_ratio(fins[a.index], fins[b.index])
                    ratios.append(ratio)
                    self.record("agreement", ratio, pair=[a.index, b.index])

        # positions: same position, same digest, across all honest processes
        by_pos: Dict[int, bytes] = {}
        partial_conflicts = 0
        for n in honest:
            for i, dig in enumerate(fins[n.index]):
                if by_pos.setdefault(i, dig) != dig:
                    partial_conflicts += 1

        # causality respected by every process's positions
        consistency_violations = 0
        for n in honest:
            for v in n.graph.by_index:
                if v.total_position is None:
                    continue
                for c in v.causes:
                    if c.total_position is None or c.total_position > v.total_position:
                        consistency_violations += 1

        mutation_counts = {}
        ref = honest[0].graph if honest else self.nodes[0].graph
        for ident in ref.mutated_ids():
            mutation_counts[ident.hex()] = len(ref.detect_mutations(ident).pairs)
        for ident, count in sorted(mutation_counts.items()):
            self.record("mutations", count, id=ident)

        # per-round last weight against the 3D / 6D band, and the sum w_s / d_s
        band_violations = 0
        ratio_sum = 0.0
        rounds = sorted(ref.round_lasts)
        settled = min((n.fin_rounds for n in honest), default=0)
        for r in rounds:
            w = sum(x.weight for x in ref.round_lasts[r])
            lo, hi = 3 * D(r), 6 * D(r)
            inside = lo < w <= hi
            band_violations += (not inside) and 0 < r < settled
            ratio_sum += w / D(r)
            self.record("round_last_weight", to_units(w), round=r, lo=to_units(lo), hi=to_units(hi), inside=inside)
        self.record("difficulty_sum", ratio_sum)

        # dissemination: every honest message in every honest graph
        undelivered = 0
        for n in honest:
            for m in n.generated:
                undelivered += sum(m.digest not in o.graph.vertices for o in honest)

        # stragglers: honest messages of early rounds without a final position
        cutoff = self.cfg.duration.rounds // 2 if self.cfg.duration.rounds else None
        stragglers = 0
        if cutoff is not None:
            for n in honest:
                placed = set(fins[n.index])
                for o in honest:
                    for m in o.generated:
                        v = n.graph.vertices.get(m.digest)
                        if v is not None and v.round < cutoff and m.digest not in placed:
                            stragglers += 1

        bomb_changed = None
        if self.bomb_snapshot is not None:
            bomb_changed = 0
            for i, before in self.bomb_snapshot.items():
                after = fins[i]
                bomb_changed += sum(1 for p, d in enumerate(before) if p >= len(after) or after[p] != d)

        summary = {
            "seed": self.cfg.seed,
            "events": self.events,
            "time": round(self.now, 9),
            "max_round": max((v.round for v in ref.by_index), default=-1),
            "finalized_rounds": {str(n.index): n.replica.orderer.finalized_rounds(n.replica.stream) for n in honest},
            "finalized_lengths": {str(i): len(f) for i, f in fins.items()},
            "agreement_ratio": min(ratios) if ratios else 1.0,
            "max_candidates": self.max_candidates,
            "candidate_growth_after_decision": self.candidate_growth,
            "partial_correctness_conflicts": partial_conflicts,
            "consistency_violations": consistency_violations,
            "prefix_regressions": self.prefix_regressions,
            "violations": len(self.violations),
            "mutations": sum(mutation_counts.values()),
            "band_violations": band_violations,
            "difficulty_sum": ratio_sum,
            "difficulty_sum_ok": ratio_sum <= 6 * (len(rounds)),
            "undelivered": undelivered,
            "stragglers": stragglers,
            "straggler_cutoff_round": cutoff,
            "bomb_changed_positions": bomb_changed,
        }
        return SimReport(self.cfg, self.metrics, summary, self.nodes)


def run(cfg: SimConfig) -> SimReport:
    return Simulation(cfg).run()
