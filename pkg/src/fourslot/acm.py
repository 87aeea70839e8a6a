"""Executable four-slot mechanism.

One writer thread calls :meth:`FourSlot.write`, one reader thread calls
:meth:`FourSlot.read`; neither ever waits for the other.  Three builds share
one code path:

* ``plain``: control bits and slots only;
* ``timestamped``: every slot and index word also carries the write round;
* ``instrumented``: timestamped plus an access guard on every slot, a
  reentrancy check and an event recorder.

Each operation is written as a generator that yields after every labelled
step (and between the two sub-word moves of a slot copy), so a test can
interleave the two sides deterministically.  The public ``write``/``read``
simply run their generator to completion, calling ``pause(label)`` between
steps when a pause hook is installed.

Control variables are plain attributes and list cells.  Under CPython each
such load or store is a single indivisible operation and all of them are
totally ordered by the interpreter lock, which is the interleaving model the
algorithm assumes.  The slot copy is the only multi-step access.
"""

from __future__ import annotations

import itertools
import threading
from typing import Callable, Iterator

from .history import (
    INITIAL_STAMP, NONE, READER, RINV, RRET, SENTER, SEXIT, WINV, WRET, WRITER,
    EventLog, History,
)
from .model import MUTATIONS

PLAIN = "plain"
TIMESTAMPED = "timestamped"
INSTRUMENTED = "instrumented"
BUILDS = (PLAIN, TIMESTAMPED, INSTRUMENTED)

BOT_STAMP = -1
STAMP_LIMIT = 2**63
DEFAULT_CAPACITY = 8_000_000


class _Bottom:
    __slots__ = ()

    def __repr__(self) -> str:
        return "⊥"

    def __reduce__(self):
        return "BOTTOM"


BOTTOM = _Bottom()
"""Payload of a slot nobody has written."""


class RaceDetected(RuntimeError):
    """Writer and reader were inside the same slot at the same time."""

    def __init__(self, pair: int, slot: int, writer_op, reader_op, detected_by: str):
        self.pair, self.slot = pair, slot
        self.writer_op, self.reader_op = writer_op, reader_op
        self.detected_by = detected_by
        super().__init__(
            f"slot [{pair}][{slot}] entered by the {detected_by} while the other side was "
            f"inside it (writer op {writer_op}, reader op {reader_op})"
        )


class ReentrancyError(RuntimeError):
    pass


class HistoryOverflow(RuntimeError):
    pass


class FourSlot:
    """Single-writer single-reader wait-free register."""

    def __init__(self, initial_payload, build: str = TIMESTAMPED, mutation: str | None = None,
                 record_slots: bool = True, capacity: int = DEFAULT_CAPACITY,
                 on_race: str = "raise"):
        if build not in BUILDS:
            raise ValueError(f"unknown build {build!r}; choose from {BUILDS}")
        if mutation is not None and mutation not in MUTATIONS:
            raise ValueError(f"unknown mutation {mutation!r}; choose from {MUTATIONS}")
        if on_race not in ("raise", "record"):
            raise ValueError("on_race must be 'raise' or 'record'")
        self.build = build
        self.on_race = on_race
        self.races: list[RaceDetected] = []
        self.mutation = mutation
        self.stamped = build != PLAIN
        self.instrumented = build == INSTRUMENTED
        self.initial_payload = initial_payload

        # shared control block
        if self.stamped:
            self.index = [(0, 0), (0, 1)]
            self.slots = [[[initial_payload, 0], [BOTTOM, BOT_STAMP]],
                          [[initial_payload, 1], [BOTTOM, BOT_STAMP]]]
        else:
            self.index = [0, 0]
            self.slots = [[[initial_payload, None], [BOTTOM, None]],
                          [[initial_payload, None], [BOTTOM, None]]]
        self.latest = 1
        self.reading = 0
        # writer locals
        self.wp, self.wi = 1, 0
        self.wtm = 1 if self.stamped else None
        # reader locals
        self.rp, self.ri = 0, 0
        self.rtm = 0 if self.stamped else None
        self.y = BOTTOM

        self.pause: Callable[[str], None] | None = None

        # instrumentation
        self.writer_in = [[False, False], [False, False]]
        self.reader_in = [[False, False], [False, False]]
        self._writer_lock = threading.Lock()
        self._reader_lock = threading.Lock()
        self._writer_op = None
        self._reader_op = None
        self._reads = 0
        self.record_slots = record_slots
        self.capacity = capacity
        self._clock = itertools.count(1)
        self._wlog = EventLog(WRITER, capacity)
        self._rlog = EventLog(READER, capacity)

    # -- public operations --------------------------------------------------

    def write(self, w) -> None:
        pause = self.pause
        for label in self.write_steps(w):
            if pause is not None:
                pause(label)

    def read(self):
        return self.read_stamped()[0]

    def read_stamped(self) -> tuple:
        """Payload and stamp of one read (stamp is None in the plain build)."""
        pause = self.pause
        gen = self.read_steps()
        try:
            while True:
                label = next(gen)
                if pause is not None:
                    pause(label)
        except StopIteration as done:
            return done.value

    # -- labelled steps -----------------------------------------------------

    def write_steps(self, w) -> Iterator[str]:
        inst = self.instrumented
        if inst:
            if not self._writer_lock.acquire(blocking=False):
                raise ReentrancyError("write called while another write is in progress")
        try:
            if inst:
                stamp = self.wtm + 1
                self._writer_op = ("write", stamp, w)
                self._log(self._wlog, WINV, -1, -1, stamp, w)
            swap = self.mutation == "swap-a+1-a+2"

            # a-2
            if self.stamped:
                self.wtm += 1
                if self.wtm >= STAMP_LIMIT:
                    raise OverflowError("write-round stamp would wrap")
            self.wp = 1 - self.reading
            yield "a-2"
            # a-1
            entry = self.index[self.wp]
            self.wi = 1 - (entry[0] if self.stamped else entry)
            yield "a-1"
            # a: two sub-word moves
            wp, wi = self.wp, self.wi
            cell = self.slots[wp][wi]
            if inst:
                self._enter_writer(wp, wi)
            cell[0] = w
            yield "a/1"
            cell[1] = self.wtm
            if inst:
                self._exit_writer(wp, wi)
            yield "a"
            # a+1 and a+2
            if swap:
                self.latest = wp
            else:
                self.index[wp] = (wi, self.wtm) if self.stamped else wi
            yield "a+1"
            if swap:
                self.index[wp] = (wi, self.wtm) if self.stamped else wi
            else:
                self.latest = wp
            yield "a+2"

            if inst:
                self._log(self._wlog, WRET)
                self._writer_op = None
        finally:
            if inst:
                self._writer_lock.release()

    def read_steps(self) -> Iterator[str]:
        inst = self.instrumented
        if inst:
            if not self._reader_lock.acquire(blocking=False):
                raise ReentrancyError("read called while another read is in progress")
        try:
            if inst:
                self._reads += 1
                self._reader_op = ("read", self._reads)
                self._log(self._rlog, RINV)
            mutation = self.mutation

            # b-3 and b-2
            if mutation == "swap-b-3-b-2":
                self.reading = self.rp
                yield "b-3"
                self.rp = self.latest
                yield "b-2"
            else:
                self.rp = self.latest
                yield "b-3"
                if mutation != "drop-b-2":
                    self.reading = self.rp
                yield "b-2"
            # b-1
            entry = self.index[self.rp]
            if self.stamped:
                self.ri, self.rtm = entry
            else:
                self.ri = entry
            index_stamp = self.rtm
            yield "b-1"
            # b: two sub-word moves
            rp, ri = self.rp, self.ri
            cell = self.slots[rp][ri]
            if inst:
                self._enter_reader(rp, ri)
            y = cell[0]
            yield "b/1"
            stamp = cell[1]
            if inst:
                self._exit_reader(rp, ri)
            self.y = y
            if self.stamped:
                self.rtm = stamp
            yield "b"
            # b+1
            if inst:
                self._log(self._rlog, RRET, -1, -1, stamp, y, index_stamp)
                self._reader_op = None
            return y, (stamp if self.stamped else None)
        finally:
            if inst:
                self._reader_lock.release()

    # -- instrumentation ----------------------------------------------------

    def _log(self, log: EventLog, kind, pair=-1, slot=-1, stamp=NONE, payload=None, aux=NONE):
        if len(log.index) >= log.capacity:
            raise HistoryOverflow(f"{log.thread} event buffer full ({log.capacity} events)")
        log.index.append(next(self._clock))
        log.kind.append(kind)
        log.pair.append(pair)
        log.slot.append(slot)
        log.stamp.append(stamp)
        log.aux.append(aux)
        log.payload.append(payload)

    def _race(self, p, i, side):
        err = RaceDetected(p, i, self._writer_op, self._reader_op, side)
        if self.on_race == "raise":
            raise err
        self.races.append(err)

    def _enter_writer(self, p, i):
        self.writer_in[p][i] = True
        if self.reader_in[p][i]:
            self._race(p, i, "writer")
        if self.record_slots:
            self._log(self._wlog, SENTER, p, i)

    def _exit_writer(self, p, i):
        if self.record_slots:
            self._log(self._wlog, SEXIT, p, i)
        self.writer_in[p][i] = False

    def _enter_reader(self, p, i):
        self.reader_in[p][i] = True
        if self.writer_in[p][i]:
            self._race(p, i, "reader")
        if self.record_slots:
            self._log(self._rlog, SENTER, p, i)

    def _exit_reader(self, p, i):
        if self.record_slots:
            self._log(self._rlog, SEXIT, p, i)
        self.reader_in[p][i] = False

    def record_history(self) -> History:
        if not self.instrumented:
            raise ValueError("only the instrumented build records a history")
        return History.from_logs((self._wlog, self._rlog), self.initial_payload, INITIAL_STAMP)


def new(initial_payload, build: str = TIMESTAMPED, **options) -> FourSlot:
    """A fresh mechanism with ``initial_payload`` published at pair 1."""
    return FourSlot(initial_payload, build, **options)


def record_history(handle: FourSlot) -> History:
    return handle.record_history()
