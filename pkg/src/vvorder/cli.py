"""Command line: run scenarios, audit graph dumps, compare order dumps."""

from __future__ import annotations

import argparse
import graphlib
import json
import os
import sys
from importlib import resources
from typing import Dict, List, Optional

from vvorder.graph import load_dump
from vvorder.sim import ConfigInvalid, load_config, run as run_sim
from vvorder.sim import agreement_ratio, common_prefix

RUN_CHECKS = (
    ("agreement_ratio", lambda s: s["agreement_ratio"] == 1.0),
    ("violations", lambda s: s["violations"] == 0),
    ("partial_correctness_conflicts", lambda s: s["partial_correctness_conflicts"] == 0),
    ("consistency_violations", lambda s: s["consistency_violations"] == 0),
    ("prefix_regressions", lambda s: s["prefix_regressions"] == 0),
)


def bundled_scenarios() -> List[str]:
    root = resources.files("vvorder") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".scenario"))


def resolve_scenario(name: str) -> str:
    if os.path.exists(name):
        return name
    fname = name if name.endswith(".scenario") else name + ".scenario"
    bundled = resources.files("vvorder") / "scenarios" / fname
    if bundled.is_file():
        return str(bundled)
    raise FileNotFoundError(f"no scenario file or bundled scenario named {name!r}")


def _fail(msg: str) -> int:
    print(msg, file=sys.stderr)
    return 1


# -- run ---------------------------------------------------------------------


def cmd_run(args) -> int:
    try:
        cfg = load_config(resolve_scenario(args.scenario))
    except (FileNotFoundError, ConfigInvalid) as exc:
        return _fail(f"invalid scenario: {exc}")
    if args.seed is not None:
        cfg.seed = args.seed
    if args.events is not None:
        cfg.duration.events = args.events
    report = run_sim(cfg)
    files = report.write(args.out)
    if not args.no_plots:
        from vvorder.plotting import render_all

        render_all(report.metrics, os.path.join(args.out, "figures"))
    with open(os.path.join(args.out, "scenario.json"), "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
    ok = True
    for key, check in RUN_CHECKS:
        passed = check(report.summary)
        ok &= passed
        print(f"{key}\t{report.summary[key]}\t{'ok' if passed else 'FAILED'}")
    for key in ("max_round", "finalized_lengths", "max_candidates", "mutations", "stragglers", "bomb_changed_positions"):
        print(f"{key}\t{json.dumps(report.summary[key], sort_keys=True)}")
    print(f"written\t{len(files)} files to {args.out}")
    return 0 if ok else 1


# -- audit -------------------------------------------------------------------


def audit_records(records: List[dict]) -> Dict[str, List[str]]:
    """Structural checks on a graph dump; maps check name to violations."""
    problems: Dict[str, List[str]] = {
        "past-closure": [],
        "acyclicity": [],
        "round monotonicity": [],
        "last-vertex separation": [],
        "previous-round existence": [],
        "svp nesting": [],
    }
    by_digest: Dict[str, dict] = {}
    for rec in records:
        if rec["digest"] in by_digest:
            problems["past-closure"].append(f"duplicate vertex {rec['digest'][:16]}")
        by_digest[rec["digest"]] = rec
    for rec in records:
        for c in rec["causes"]:
            if c not in by_digest:
                problems["past-closure"].append(f"{rec['digest'][:16]} references unknown {c[:16]}")
    if problems["past-closure"]:
        return problems  # the remaining checks need a closed graph

    sorter = graphlib.TopologicalSorter({d: rec["causes"] for d, rec in by_digest.items()})
    try:
        order = list(sorter.static_order())
    except graphlib.CycleError as exc:
        problems["acyclicity"].append(f"cycle through {[d[:16] for d in exc.args[1]]}")
        return problems

    # bitmask over rounds that have a last vertex in each vertex's past
    lasts_below: Dict[str, int] = {}
    for d in order:
        rec = by_digest[d]
        r = rec["round"]
        seen = 0
        for c in rec["causes"]:
            crec = by_digest[c]
            seen |= lasts_below[c]
            if crec["round"] > r:
                problems["round monotonicity"].append(f"{d[:16]} round {r} below cause round {crec['round']}")
            if crec["is_last"] and not r > crec["round"]:
                problems["last-vertex separation"].append(f"{d[:16]} shares round {r} with last cause {c[:16]}")
        missing = [s for s in range(r) if not seen >> s & 1]
        if missing:
            problems["previous-round existence"].append(f"{d[:16]} (round {r}) has no last vertex of rounds {missing[:5]}")
        if rec["is_last"]:
            seen |= 1 << r
        lasts_below[d] = seen

        svp = rec.get("svp") or []
        for m in rec.get("pattern", []):
            member = by_digest.get(m)
            if member is None:
                problems["svp nesting"].append(f"{d[:16]} pattern member {m[:16]} missing")
            elif (member.get("svp") or []) != svp[:-1] or member["round"] != svp[-1]:
                problems["svp nesting"].append(f"{d[:16]} member {m[:16]} svp {member.get('svp')} vs {svp}")
    return problems


def cmd_audit(args) -> int:
    with open(args.dump) as fh:
        records = load_dump(fh)
    problems = audit_records(records)
    ok = True
    for check, found in problems.items():
        print(f"{check}\t{'ok' if not found else 'violated'}\t{len(found)}")
        for line in found[:10]:
            print(f"{check} violated: {line}", file=sys.stderr)
        ok &= not found
    print(f"vertices\t{len(records)}")
    return 0 if ok else 1


# -- diff-order --------------------------------------------------------------


def read_order(path: str) -> List[str]:
    with open(path) as fh:
        recs = load_dump(fh)
    recs.sort(key=lambda r: r["position"])
    for i, r in enumerate(recs):
        if r["position"] != i:
            raise ValueError(f"{path}: positions are not contiguous at {i}")
    return [r["digest"] for r in recs]


def cmd_diff_order(args) -> int:
    try:
        a, b = read_order(args.a), read_order(args.b)
    except ValueError as exc:
        return _fail(str(exc))
    lcp = common_prefix(a, b)
    ratio = agreement_ratio(a, b)
    diverge: Optional[int] = lcp if lcp < min(len(a), len(b)) else None
    print(f"length_a\t{len(a)}")
    print(f"length_b\t{len(b)}")
    print(f"common_prefix\t{lcp}")
    print(f"first_divergence\t{'none' if diverge is None else diverge}")
    print(f"agreement\t{ratio}")
    return 0 if diverge is None else 1


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vvorder", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario and write metrics, dumps and figures")
    r.add_argument("--scenario", default="honest-bounded", help="scenario file or bundled name (default: %(default)s)")
    r.add_argument("--seed", type=int, default=None, help="override the scenario's master seed (u64)")
    r.add_argument("--out", default="vvorder-out", help="output directory (default: %(default)s)")
    r.add_argument("--events", type=int, default=None, help="cap on processed events")
    r.add_argument("--no-plots", action="store_true", help="skip the PNG figures")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("audit", help="structural checks on a graph dump")
    a.add_argument("dump")
    a.set_defaults(func=cmd_audit)

    d = sub.add_parser("diff-order", help="compare two order dumps")
    d.add_argument("a")
    d.add_argument("b")
    d.set_defaults(func=cmd_diff_order)

    sub.add_parser("scenarios", help="list bundled scenarios").set_defaults(
        func=lambda args: print("\n".join(bundled_scenarios())) or 0
    )
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 1 << 64:
        return _fail("seed must fit in 64 bits")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
