"""Command-line front end: ``python -m fourslot <subcommand> ...``.

Subcommands:

explore   reachable state/transition counts and control-skeleton saturation
prove     run the dependency-ordered proof script (exit 0 iff every node passes)
fuzz      concurrent stress run of the instrumented register plus history checks
lincheck  check a saved history for linearizability
catalog   list every named predicate with its formula

``--format structured`` prints one JSON record per line with a fixed key
order and no timings, so identical flags give identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from contextlib import contextmanager

from . import checker, harness
from .acm import RaceDetected
from .history import History, MalformedHistory
from .model import MUTATIONS, PLAIN, TIMESTAMPED, TransitionSystem
from .predicates import catalog
from .proof import run_proof_script


def _count(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return n


def _bound(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fourslot", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explore", parents=[common], help="reachability statistics")
    p.add_argument("--k", type=_bound, default=4, help="round bound (default 4)")
    p.add_argument("--variant", choices=(TIMESTAMPED, PLAIN), default=TIMESTAMPED)
    p.add_argument("--mutate", choices=MUTATIONS)
    p.add_argument("--saturation-limit", type=_bound, default=8,
                   help="largest round bound tried when looking for saturation")

    p = sub.add_parser("prove", parents=[common], help="run the proof script")
    p.add_argument("--k", type=_bound, default=4)
    p.add_argument("--mutate", choices=MUTATIONS)
    p.add_argument("--keep-going", action="store_true",
                   help="run every node even after one fails")

    p = sub.add_parser("fuzz", parents=[common], help="concurrent stress run")
    p.add_argument("--writes", type=_count, default=100_000)
    p.add_argument("--reads", type=_count, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jitter", choices=harness.JITTERS, default="none")
    p.add_argument("--mutate", choices=MUTATIONS)
    p.add_argument("--scheduled", action="store_true",
                   help="interleave steps from a seeded scheduler instead of threads")
    p.add_argument("--save-history", metavar="PATH", help="dump the recorded history here")

    p = sub.add_parser("lincheck", parents=[common], help="check a saved history")
    p.add_argument("history", help="history file written by fuzz --save-history")

    sub.add_parser("catalog", parents=[common], help="list predicates")
    return parser


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _emit(out, args, text_lines, records):
    if args.format == "structured":
        for rec in records:
            out.write(json.dumps(rec, ensure_ascii=False) + "\n")
    else:
        for line in text_lines:
            out.write(line + "\n")


def cmd_explore(args, out) -> int:
    ts = TransitionSystem(args.variant, args.k, args.mutate)
    start = time.perf_counter()
    reach = checker.explore(ts)
    elapsed = time.perf_counter() - start
    max_succ = max(len(s) for s in reach.succ)
    sat = checker.saturation(ts, args.saturation_limit)
    sizes = sat["sizes"]
    k = args.k
    same_next = sat["stable_from"] == k
    lines = [
        f"model: {ts!r}",
        f"reachable states: {len(reach)}",
        f"transitions: {reach.transition_count}",
        f"big-step pairs: {reach.pair_count()}",
        f"max successors: {max_succ}",
        f"explored in {elapsed:.2f} s",
        f"control projection: K={k}: {sizes[k]} states, K={k + 1}: {sizes[k + 1]} states "
        f"({'identical' if same_next else 'different'})",
    ]
    if sat["stable_from"] is None:
        lines.append(f"saturation: not reached up to K={max(sizes)}")
    else:
        s = sat["stable_from"]
        lines.append(f"saturation: control projection stable from K={s} ({sizes[s]} states)")
    records = [
        {"record": "explore", "variant": ts.variant, "K": k, "mutation": ts.mutation,
         "states": len(reach), "transitions": reach.transition_count,
         "pairs": reach.pair_count(), "max_successors": max_succ},
        {"record": "saturation", "sizes": {str(a): b for a, b in sizes.items()},
         "identical_next": same_next, "stable_from": sat["stable_from"]},
    ]
    _emit(out, args, lines, records)
    return 0


def cmd_prove(args, out) -> int:
    ts = TransitionSystem(TIMESTAMPED, args.k, args.mutate)
    run = run_proof_script(ts, stop_on_failure=not args.keep_going)
    lines = [f"model: {ts!r}", run.render()]
    records = [r.record() for r in run.reports]
    records.append({"record": "overall", "ok": run.ok, "failed": run.failed,
                    "nodes": len(run.reports)})
    _emit(out, args, lines, records)
    return 0 if run.ok else 1


def cmd_fuzz(args, out) -> int:
    try:
        if args.scheduled:
            result = harness.run_scheduled(args.writes, args.reads, args.seed, args.mutate,
                                           on_race="record")
        else:
            result = harness.run_concurrent(args.writes, args.reads, args.seed, args.jitter,
                                            args.mutate)
    except RaceDetected as err:
        rec = {"record": "race", "pair": err.pair, "slot": err.slot,
               "writer_op": repr(err.writer_op), "reader_op": repr(err.reader_op),
               "detected_by": err.detected_by}
        _emit(out, args, [f"FAIL race detected: {err}"], [rec])
        return 1
    verdicts = harness.check_all(result)
    if args.save_history:
        with open(args.save_history, "w", encoding="utf-8") as fh:
            result.history.dump(fh)
    ok = all(v.ok for v in verdicts)
    by_name = {v.name: v for v in verdicts}
    races = len(result.races)
    summary = (f"{races} races, "
               + ", ".join(f"{n} {'OK' if by_name[n].ok else 'FAIL'}"
                           for n in ("coherence", "freshness", "integrity", "linearizability")))
    lines = [f"fuzz: {args.writes} writes, {args.reads} reads, seed {args.seed}, "
             f"jitter {result.jitter}" + (f", mutation {args.mutate}" if args.mutate else "")]
    lines += [v.render() for v in verdicts]
    lines.append(f"elapsed {result.elapsed:.2f} s")
    lines.append(summary)
    records = [{"record": "fuzz", "writes": args.writes, "reads": args.reads,
                "seed": args.seed, "jitter": result.jitter, "mutation": args.mutate}]
    records += [v.record() for v in verdicts]
    records.append({"record": "overall", "ok": ok, "races": races})
    _emit(out, args, lines, records)
    return 0 if ok else 1


def cmd_lincheck(args, out) -> int:
    try:
        with open(args.history, encoding="utf-8") as fh:
            history = History.load(fh)
        verdict = harness.check_linearizable(history)
        writes, reads = history.operations()
    except (OSError, MalformedHistory) as err:
        _emit(out, args, [f"FAIL cannot check {args.history}: {err}"],
              [{"record": "error", "detail": str(err)}])
        return 2
    lines = [verdict.render()]
    records = [verdict.record()]
    ok = verdict.ok
    if len(writes) + len(reads) <= harness.SEARCH_LIMIT:
        searched = harness.linearizable_search(history)
        agree = searched == verdict.ok
        ok = ok and agree
        lines.append(f"exhaustive search: {'linearizable' if searched else 'not linearizable'}"
                     f" ({'agrees' if agree else 'DISAGREES'})")
        records.append({"record": "search", "linearizable": searched, "agrees": agree})
    _emit(out, args, lines, records)
    return 0 if ok else 1


def cmd_catalog(args, out) -> int:
    entries = catalog()
    width = max(len(n) for n in entries)
    lines = [f"{name:<{width}}  {'pair ' if p.arity == 2 else 'state'}  {p.formula}"
             for name, p in entries.items()]
    records = [{"name": name, "kind": "pair" if p.arity == 2 else "state", "formula": p.formula}
               for name, p in entries.items()]
    _emit(out, args, lines, records)
    return 0


COMMANDS = {"explore": cmd_explore, "prove": cmd_prove, "fuzz": cmd_fuzz,
            "lincheck": cmd_lincheck, "catalog": cmd_catalog}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with _output(args.out) as out:
        return COMMANDS[args.command](args, out)


if __name__ == "__main__":
    sys.exit(main())
