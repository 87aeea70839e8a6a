"""Concurrent stress runs of the executable mechanism and checks on their histories.

``run_concurrent`` drives one writer thread and one reader thread against an
instrumented register, optionally perturbing the interleaving with seeded
``time.sleep(0)`` yields.  ``run_scheduled`` replays the same labelled steps
from a seeded single-threaded scheduler, which is fully reproducible.

The checks work on recorded histories (see :mod:`fourslot.history`):

* integrity: every read returns a value some write (or the initial state)
  produced, with that write's stamp;
* coherence: the reader never observes stamps going backwards;
* freshness: each read returns a stamp between the last write that finished
  before the read started and the last write that started before it ended;
* race freedom: no slot was accessed by both sides at once;
* linearizability: the four conditions above plus a strictly increasing
  write order, which for one writer and one reader is exactly atomicity.
  :func:`linearizable_search` decides the same property by brute force.
"""

from __future__ import annotations

import random
import sys
import threading
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .acm import INSTRUMENTED, FourSlot, RaceDetected
from .history import History, MalformedHistory

JITTERS = ("none", "uniform", "targeted")
UNIFORM_YIELD = 0.1
TARGETED_YIELD = 0.5
# steps immediately before or inside a slot access
TARGETED_LABELS = frozenset({"a-1", "a/1", "b-1", "b/1"})
SLOT_RECORD_LIMIT = 200_000
SEARCH_LIMIT = 12
INITIAL_PAYLOAD = 0


@dataclass
class Verdict:
    name: str
    ok: bool
    detail: str = ""
    witness: dict = field(default_factory=dict)

    def render(self) -> str:
        head = f"{self.name}: {'pass' if self.ok else 'FAIL'}"
        return f"{head} ({self.detail})" if self.detail else head

    def record(self) -> dict:
        return {"check": self.name, "ok": self.ok, "detail": self.detail,
                "witness": self.witness}


@dataclass
class RunResult:
    history: History
    writes: int
    reads: int
    seed: int
    jitter: str
    mutation: str | None
    elapsed: float
    races: list = field(default_factory=list)
    errors: list = field(default_factory=list)


def _pause_hook(jitter: str, seed: int):
    if jitter == "none":
        return None
    if jitter not in JITTERS:
        raise ValueError(f"unknown jitter profile {jitter!r}; choose from {JITTERS}")
    # one generator per side; each is only ever touched by its own thread
    wr = random.Random(f"{seed}:W").random
    rr = random.Random(f"{seed}:R").random
    sleep = time.sleep
    if jitter == "uniform":
        def pause(label):
            if (wr if label[0] == "a" else rr)() < UNIFORM_YIELD:
                sleep(0)
    else:
        def pause(label):
            if label in TARGETED_LABELS and (wr if label[0] == "a" else rr)() < TARGETED_YIELD:
                sleep(0)
    return pause


def _new_register(total_ops, mutation, record_slots, on_race) -> FourSlot:
    if record_slots is None:
        record_slots = total_ops <= SLOT_RECORD_LIMIT
    return FourSlot(INITIAL_PAYLOAD, INSTRUMENTED, mutation=mutation,
                    record_slots=record_slots, on_race=on_race)


def run_concurrent(num_writes: int, num_reads: int, seed: int = 0, jitter: str = "none",
                   mutation: str | None = None, record_slots: bool | None = None,
                   on_race: str = "raise", switch_interval: float | None = 1e-5) -> RunResult:
    """Run ``num_writes`` writes and ``num_reads`` reads on two threads.

    Write ``k`` (counting from 1) stores payload ``k``; the initial payload is
    0, so every payload is distinct.  With ``on_race="raise"`` the first
    guard trip stops both threads and is re-raised here.
    """
    reg = _new_register(num_writes + num_reads, mutation, record_slots, on_race)
    reg.pause = _pause_hook(jitter, seed)
    stop = threading.Event()
    gate = threading.Barrier(2)
    errors: list[BaseException] = []

    def writer():
        try:
            gate.wait()
            write = reg.write
            for k in range(1, num_writes + 1):
                if stop.is_set():
                    return
                write(k)
        except BaseException as err:  # surfaced after join
            errors.append(err)
            stop.set()

    def reader():
        try:
            gate.wait()
            read = reg.read
            for _ in range(num_reads):
                if stop.is_set():
                    return
                read()
        except BaseException as err:
            errors.append(err)
            stop.set()

    old = sys.getswitchinterval()
    if switch_interval is not None:
        sys.setswitchinterval(switch_interval)
    start = time.perf_counter()
    try:
        threads = [threading.Thread(target=writer, name="writer"),
                   threading.Thread(target=reader, name="reader")]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    finally:
        sys.setswitchinterval(old)
    elapsed = time.perf_counter() - start
    for err in errors:
        if isinstance(err, RaceDetected):
            raise err
    if errors:
        raise errors[0]
    return RunResult(reg.record_history(), num_writes, num_reads, seed, jitter, mutation,
                     elapsed, list(reg.races), errors)


def run_scheduled(num_writes: int, num_reads: int, seed: int = 0, mutation: str | None = None,
                  on_race: str = "record", record_slots: bool = True,
                  writer_bias: float = 0.5) -> RunResult:
    """Interleave the labelled steps of both sides from a seeded scheduler.

    At every point one side is picked (the writer with probability
    ``writer_bias``) and advanced by one step.  The run is a deterministic
    function of its arguments.
    """
    rng = random.Random(seed)
    reg = FourSlot(INITIAL_PAYLOAD, INSTRUMENTED, mutation=mutation,
                   record_slots=record_slots, on_race=on_race)
    side = {"W": [0, num_writes, None], "R": [0, num_reads, None]}
    start = time.perf_counter()

    def advance(name):
        state = side[name]
        if state[2] is None:
            state[0] += 1
            state[2] = reg.write_steps(state[0]) if name == "W" else reg.read_steps()
        try:
            next(state[2])
        except StopIteration:
            state[2] = None

    while True:
        live = [n for n in ("W", "R") if side[n][2] is not None or side[n][0] < side[n][1]]
        if not live:
            break
        if len(live) == 2:
            name = "W" if rng.random() < writer_bias else "R"
        else:
            name = live[0]
        advance(name)
    return RunResult(reg.record_history(), num_writes, num_reads, seed, "scheduled", mutation,
                     time.perf_counter() - start, list(reg.races))


# -- history checks -----------------------------------------------------------

def _ops(history: History):
    try:
        return history.operation_columns(), None
    except MalformedHistory as err:
        return None, str(err)


def _written_stamps(history: History, ops):
    """Write stamps with the initial stamp prepended, and matching payloads."""
    stamps = np.concatenate(([history.initial_stamp], ops["w_stamp"]))
    payloads = np.empty(len(stamps), dtype=object)
    payloads[0] = history.initial_payload
    payloads[1:] = ops["w_payload"]
    return stamps, payloads


def check_write_order(history: History) -> Verdict:
    ops, err = _ops(history)
    if err:
        return Verdict("write-order", False, err)
    stamps, _ = _written_stamps(history, ops)
    bad = np.flatnonzero(np.diff(stamps) <= 0)
    if len(bad):
        k = int(bad[0]) + 1
        return Verdict("write-order", False, f"write #{k - 1} stamp does not exceed its predecessor",
                       {"index": k - 1, "previous_stamp": int(stamps[k - 1]),
                        "stamp": int(stamps[k])})
    return Verdict("write-order", True, f"{len(stamps) - 1} writes")


def check_integrity(history: History) -> Verdict:
    """Each read returns the payload of the write carrying the stamp it reports."""
    ops, err = _ops(history)
    if err:
        return Verdict("integrity", False, err)
    stamps, payloads = _written_stamps(history, ops)
    order = np.argsort(stamps, kind="stable")
    stamps, payloads = stamps[order], payloads[order]
    r_stamp, r_payload = ops["r_stamp"], ops["r_payload"]
    pos = np.clip(np.searchsorted(stamps, r_stamp), 0, len(stamps) - 1)
    known = stamps[pos] == r_stamp
    same = np.fromiter((a == b for a, b in zip(payloads[pos], r_payload)), dtype=bool,
                       count=len(r_payload))
    bad = np.flatnonzero(~(known & same))
    if len(bad):
        k = int(bad[0])
        return Verdict("integrity", False, f"read #{k} returned a value no write produced",
                       {"index": k, "stamp": int(r_stamp[k]), "payload": repr(r_payload[k])})
    return Verdict("integrity", True, f"{len(r_stamp)} reads")


def check_coherence(history: History) -> Verdict:
    """Stamps returned by successive reads never decrease."""
    ops, err = _ops(history)
    if err:
        return Verdict("coherence", False, err)
    r = ops["r_stamp"]
    bad = np.flatnonzero(np.diff(r) < 0)
    if len(bad):
        k = int(bad[0])
        return Verdict("coherence", False, f"read #{k + 1} went back from stamp {r[k]} to {r[k + 1]}",
                       {"index": k + 1, "previous_stamp": int(r[k]), "stamp": int(r[k + 1]),
                        "invoke": int(ops["r_inv"][k + 1]), "return": int(ops["r_ret"][k + 1])})
    return Verdict("coherence", True, f"{len(r)} reads")


def freshness_window(history: History) -> tuple[np.ndarray, np.ndarray]:
    """Per read: stamp of the last write returned before it was invoked, and of
    the last write invoked before it returned (the initial stamp if none)."""
    ops = history.operation_columns()
    init = history.initial_stamp
    w_stamp = ops["w_stamp"]
    before = np.searchsorted(ops["w_ret"], ops["r_inv"]) - 1
    started = np.searchsorted(ops["w_inv"], ops["r_ret"]) - 1
    low = np.where(before >= 0, w_stamp[np.maximum(before, 0)] if len(w_stamp) else init, init)
    high = np.where(started >= 0, w_stamp[np.maximum(started, 0)] if len(w_stamp) else init, init)
    return low.astype(np.int64), high.astype(np.int64)


def check_freshness(history: History) -> Verdict:
    ops, err = _ops(history)
    if err:
        return Verdict("freshness", False, err)
    low, high = freshness_window(history)
    r = ops["r_stamp"]
    bad = np.flatnonzero((r < low) | (r > high))
    if len(bad):
        k = int(bad[0])
        side = "stale" if r[k] < low[k] else "from the future"
        return Verdict("freshness", False, f"read #{k} is {side}: stamp {r[k]} "
                       f"outside [{low[k]}, {high[k]}]",
                       {"index": k, "stamp": int(r[k]), "low": int(low[k]), "high": int(high[k])})
    return Verdict("freshness", True, f"{len(r)} reads")


def check_race_free(history: History, races=()) -> Verdict:
    """No guard trips, and no overlapping recorded slot accesses."""
    if races:
        err = races[0]
        return Verdict("race-freedom", False, str(err),
                       {"pair": err.pair, "slot": err.slot, "detected_by": err.detected_by,
                        "trips": len(races)})
    try:
        history.validate()
    except MalformedHistory as err:
        return Verdict("race-freedom", False, str(err))
    spans = history.slot_intervals()
    if not spans:
        return Verdict("race-freedom", True, "no guard trips; slot accesses not recorded")
    by_slot: dict = {}
    for thread, p, i, a, b in spans:
        by_slot.setdefault((p, i), []).append((a, b, thread))
    for (p, i), items in sorted(by_slot.items()):
        items.sort()
        for (a0, b0, t0), (a1, b1, t1) in zip(items, items[1:]):
            if t0 != t1 and a1 < b0:
                return Verdict("race-freedom", False, f"overlapping accesses to slot [{p}][{i}]",
                               {"pair": p, "slot": i, "first": [t0, a0, b0], "second": [t1, a1, b1]})
    return Verdict("race-freedom", True, f"{len(spans)} slot accesses")


def check_linearizable(history: History) -> Verdict:
    """Atomicity of a one-writer one-reader register, decided by a direct rule."""
    for check in (check_write_order, check_integrity, check_freshness, check_coherence):
        v = check(history)
        if not v.ok:
            return Verdict("linearizability", False, f"{v.name}: {v.detail}", v.witness)
    ops = history.operation_columns()
    return Verdict("linearizability", True,
                   f"{len(ops['w_inv'])} writes, {len(ops['r_inv'])} reads")


def linearizable_search(history: History, limit: int = SEARCH_LIMIT) -> bool:
    """Decide linearizability by searching all legal sequential orders.

    A value is the (payload, stamp) pair a write stored or a read returned;
    stamps are compared for equality only, never for order.  Meant for small
    histories; refuses more than ``limit`` operations.
    """
    writes, reads = history.operations()
    ops = [("w", o.invoke, o.ret, (o.payload, o.stamp)) for o in writes] + \
          [("r", o.invoke, o.ret, (o.payload, o.stamp)) for o in reads]
    n = len(ops)
    if n > limit:
        raise ValueError(f"exhaustive search is limited to {limit} operations, got {n}")
    # must_precede[k]: bitmask of operations that returned before k was invoked
    must_precede = [sum(1 << j for j in range(n) if ops[j][2] < ops[k][1]) for k in range(n)]
    initial = (history.initial_payload, history.initial_stamp)

    @lru_cache(maxsize=None)
    def extend(done: int, value_from: int) -> bool:
        if done == (1 << n) - 1:
            return True
        current = initial if value_from < 0 else ops[value_from][3]
        for k in range(n):
            if done >> k & 1 or must_precede[k] & ~done:
                continue
            kind, _, _, payload = ops[k]
            if kind == "w":
                if extend(done | 1 << k, k):
                    return True
            elif payload == current and extend(done | 1 << k, value_from):
                return True
        return False

    return extend(0, -1)


def check_all(result: RunResult | History) -> list[Verdict]:
    history = result.history if isinstance(result, RunResult) else result
    races = result.races if isinstance(result, RunResult) else ()
    return [check_race_free(history, races), check_write_order(history),
            check_integrity(history), check_coherence(history), check_freshness(history),
            check_linearizable(history)]
