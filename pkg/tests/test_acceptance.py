"""Acceptance criteria, one test each; a pass/fail line per criterion is
printed in the terminal summary (and to stdout when run with ``-s``).

Run alone with ``pytest tests/test_acceptance.py`` or
``python tests/test_acceptance.py``.
"""

import random
import sys
import time

import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from fourslot import checker, harness
from fourslot.checker import (
    check_consequence, check_inductive, check_inductive_transition, check_state_invariant,
    check_transition_invariant, explore,
)
from fourslot.model import MUTATIONS, PLAIN, TIMESTAMPED, GlobalState, TransitionSystem
from fourslot.predicates import LOCATIONS, get
from fourslot.proof import ProofContext, run_proof_script


def verdict(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_1_race_freedom_model_check():
    start = time.perf_counter()
    ts = TransitionSystem(TIMESTAMPED, 4)
    r = explore(ts)
    reports = [check_state_invariant(get(n), r) for n in ("RACE_FREEDOM", "RACE_FREEDOM_EX")]
    elapsed = time.perf_counter() - start
    states, edges = oracles.reachable(True, 4)
    same = {GlobalState(**oracles.as_fields(s)) for s in states} == set(r.states)
    ok = all(x.verdict == "holds" for x in reports) and elapsed < 10 and same \
        and edges == r.transition_count
    assert verdict(1, ok, f"{len(r)} states, {r.transition_count} transitions, oracle "
                   f"{'agrees' if same else 'DISAGREES'}, {elapsed:.2f} s")


def test_criterion_2_inductiveness_ledger():
    plain = TransitionSystem(PLAIN, 4)
    expected = {"COND1": {"a-1"}, "COND2": {"b-2", "b-1"}, "COND3": {"a-2", "a-1", "b-1"}}
    found = {}
    ok = True
    for name, cmds in expected.items():
        report = check_inductive(get(name), plain)
        found[name] = report.nontrivial
        ok &= report.verdict == "inductive" and set(report.nontrivial) == cmds
    conseq = check_consequence(get("RACE_FREEDOM_EX"), [get(n) for n in expected], plain,
                               explore(plain))
    ok &= conseq.ok
    detail = "; ".join(f"{n} non-trivial at {','.join(c)}" for n, c in found.items())
    assert verdict(2, ok, f"{detail}; COND1-3 => RACE_FREEDOM_EX on the whole domain: "
                   f"{conseq.verdict}")


def test_criterion_3_location_and_reader_monotonicity(ts4, reach4):
    ok = True
    for loc in LOCATIONS:
        ok &= check_transition_invariant(get(f"LOC_MONO[{loc}]"), reach4).verdict == "holds"
    ok &= check_transition_invariant(get("READER_MONO"), reach4).verdict == "holds"
    ok &= check_transition_invariant(get("READER_MONO"), reach4, method="per-source").ok
    loc = check_inductive_transition(get("LOC_MONO"), [get("STAMP_BOUND")], ts4, reach4)
    mono = check_inductive_transition(get("READER_MONO"), [get("COND_A"), get("COND_B")],
                                      ts4, reach4)
    ok &= loc.ok and mono.ok and loc.support == ("STAMP_BOUND",) \
        and mono.support == ("COND_A", "COND_B")
    assert verdict(3, ok, f"{reach4.pair_count()} big-step pairs; LOC_MONO subject to "
                   f"{','.join(loc.support)}: {loc.verdict}; READER_MONO subject to "
                   f"{','.join(mono.support)}: {mono.verdict}")


def test_criterion_4_freshness(reach4, proof4):
    ok = all(check_transition_invariant(get(n), reach4).verdict == "holds"
             for n in ("FRESH1", "FRESH2"))
    by_name = {}
    for report in proof4.reports:
        by_name.setdefault(report.name, []).append(report)
    chain = ("AUX_e", "AUX_f", "AUX_k", "AUX_LLB", "AUX_RPUB", "AUX_RREAD", "AUX_1",
             "FRESH1", "FRESH2")
    missing = [n for n in chain if n not in by_name]
    bad = [n for n in chain if n in by_name and not all(r.ok for r in by_name[n])]
    ok &= not missing and not bad
    methods = ", ".join(f"{n}:{by_name[n][0].method}" for n in chain if n in by_name)
    assert verdict(4, ok, f"FRESH1/FRESH2 hold on all pairs; chain {methods}"
                   + (f"; missing {missing}" if missing else "") + (f"; failing {bad}" if bad else ""))


def test_criterion_5_mutation_sensitivity():
    parts, ok = [], True
    for mutation in MUTATIONS:
        ts = TransitionSystem(TIMESTAMPED, 4, mutation)
        start = time.perf_counter()
        run = run_proof_script(ts)
        elapsed = time.perf_counter() - start
        failed = run.reports[-1]
        replayed = False
        if not run.ok and failed.counterexample is not None:
            model = failed.stats.get("trace_model", "timestamped")
            failed.counterexample.replay(ProofContext(ts).system(model))
            replayed = True
        ok &= (not run.ok) and replayed and elapsed < 30
        parts.append(f"{mutation}: FAIL at {run.failed} ({elapsed:.1f} s, trace replays)")
    assert verdict(5, ok, "; ".join(parts))


@pytest.fixture(scope="module")
def large_runs():
    out = {}
    for jitter in harness.JITTERS:
        result = harness.run_concurrent(10**6, 10**6, seed=7, jitter=jitter)
        out[jitter] = (result.elapsed, result.races, harness.check_all(result))
        del result
    return out


def test_criterion_6_runtime_shadow(large_runs):
    parts, ok = [], True
    for jitter, (elapsed, races, verdicts) in large_runs.items():
        names = {v.name: v.ok for v in verdicts}
        good = not races and names["race-freedom"] and names["coherence"] \
            and names["freshness"] and names["integrity"] and elapsed < 60
        ok &= good
        parts.append(f"{jitter}: {len(races)} races, {elapsed:.1f} s"
                     + ("" if good else " " + str(names)))
    assert verdict(6, ok, "10^6 writes + 10^6 reads; " + "; ".join(parts))


def test_criterion_7_linearizability(large_runs):
    rng = random.Random(2024)
    total = agree = negatives = 0
    mutations = (None,) + MUTATIONS
    seed = 0
    while total < 1200:
        mutation = mutations[seed % len(mutations)]
        w, r = rng.randint(0, 6), rng.randint(0, 6)
        h = harness.run_scheduled(w, r, seed, mutation=mutation,
                                  writer_bias=rng.uniform(0.2, 0.8)).history
        writes, reads = h.operations()
        assert len(writes) + len(reads) <= 12
        rule = harness.check_linearizable(h).ok
        init = (h.initial_payload, h.initial_stamp)
        truth = oracles.linearizable([(o.invoke, o.ret, (o.payload, o.stamp)) for o in writes],
                                     [(o.invoke, o.ret, (o.payload, o.stamp)) for o in reads],
                                     init)
        agree += rule == truth
        negatives += not truth
        total += 1
        seed += 1
    large_ok = all(next(v for v in verdicts if v.name == "linearizability").ok
                   for _, _, verdicts in large_runs.values())
    ok = agree == total and large_ok
    assert verdict(7, ok, f"rule agrees with exhaustive search on {agree}/{total} recorded "
                   f"histories of <= 12 operations ({negatives} not linearizable); large fuzz histories "
                   f"{'pass' if large_ok else 'FAIL'} the rule")


def test_criterion_8_saturation():
    sizes = {}
    projections = {}
    for K in (3, 4):
        projections[K] = checker.control_projection(explore(TransitionSystem(TIMESTAMPED, K)))
        sizes[K] = len(projections[K])
    sat = checker.saturation(TransitionSystem(TIMESTAMPED, 3), limit=8)
    ok = projections[3] == projections[4]
    stable = sat["stable_from"]
    assert verdict(8, ok, f"control projection K=3: {sizes[3]} states, K=4: {sizes[4]} states "
                   f"({'identical' if ok else 'different'}); the projection first repeats "
                   f"at K={stable} ({sat['sizes'].get(stable)} states)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
