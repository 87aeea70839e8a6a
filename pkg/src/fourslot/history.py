"""Recorded histories of operations on a four-slot register.

A history is stored column-wise (one numpy array per event field) so that
multi-million-event runs stay compact and can be checked with vectorised
code.  :class:`HistoryEvent` is the row view used for small histories and
for the line-delimited dump format.
"""

from __future__ import annotations

import io
import json
from array import array
from collections import namedtuple
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

WRITER = "W"
READER = "R"
THREADS = (WRITER, READER)

WRITE_INVOKE = "write-invoke"
WRITE_RETURN = "write-return"
READ_INVOKE = "read-invoke"
READ_RETURN = "read-return"
SLOT_ENTER = "slot-enter"
SLOT_EXIT = "slot-exit"
KINDS = (WRITE_INVOKE, WRITE_RETURN, READ_INVOKE, READ_RETURN, SLOT_ENTER, SLOT_EXIT)
KIND_CODE = {k: n for n, k in enumerate(KINDS)}
WINV, WRET, RINV, RRET, SENTER, SEXIT = range(len(KINDS))

NONE = -(2**63)
"""Column filler for an absent integer field."""

INITIAL_STAMP = 1

# ``index`` is the recording-clock value; pair/slot are set on slot events,
# stamp/payload on write-invoke and read-return.  ``aux`` carries the stamp
# the reader saw in the index word (step b-1) on read-return events.
HistoryEvent = namedtuple(
    "HistoryEvent", "index thread kind pair slot stamp payload aux",
    defaults=(None, None, None, None, None),
)


class MalformedHistory(ValueError):
    pass


@dataclass(frozen=True)
class OpInterval:
    kind: str
    invoke: int
    ret: int
    stamp: int
    payload: object


class EventLog:
    """Append-only columnar buffer for one thread's events."""

    __slots__ = ("thread", "capacity", "index", "kind", "pair", "slot", "stamp", "aux", "payload")

    def __init__(self, thread: str, capacity: int):
        self.thread = thread
        self.capacity = capacity
        self.index = array("q")
        self.kind = array("b")
        self.pair = array("b")
        self.slot = array("b")
        self.stamp = array("q")
        self.aux = array("q")
        self.payload: list = []

    def __len__(self) -> int:
        return len(self.index)


def _int_or_none(v):
    return None if v == NONE else int(v)


class History:
    """Events in recording-clock order plus the initial value's payload and stamp."""

    def __init__(self, columns: dict, initial_payload=None, initial_stamp: int = INITIAL_STAMP):
        order = np.argsort(columns["index"], kind="stable")
        self.index = np.asarray(columns["index"], dtype=np.int64)[order]
        self.thread = np.asarray(columns["thread"], dtype=np.int8)[order]
        self.kind = np.asarray(columns["kind"], dtype=np.int8)[order]
        self.pair = np.asarray(columns["pair"], dtype=np.int8)[order]
        self.slot = np.asarray(columns["slot"], dtype=np.int8)[order]
        self.stamp = np.asarray(columns["stamp"], dtype=np.int64)[order]
        self.aux = np.asarray(columns["aux"], dtype=np.int64)[order]
        payload = np.empty(len(order), dtype=object)
        payload[:] = list(columns["payload"])
        self.payload = payload[order]
        self.initial_payload = initial_payload
        self.initial_stamp = initial_stamp
        self._ops = None

    def __len__(self) -> int:
        return len(self.index)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_logs(cls, logs: Iterable[EventLog], initial_payload=None,
                  initial_stamp: int = INITIAL_STAMP) -> "History":
        cols = {k: [] for k in ("index", "thread", "kind", "pair", "slot", "stamp", "aux")}
        payload: list = []
        for log in logs:
            n = len(log)
            cols["index"].append(np.frombuffer(log.index, dtype=np.int64, count=n))
            cols["thread"].append(np.full(n, THREADS.index(log.thread), dtype=np.int8))
            cols["kind"].append(np.frombuffer(log.kind, dtype=np.int8, count=n))
            cols["pair"].append(np.frombuffer(log.pair, dtype=np.int8, count=n))
            cols["slot"].append(np.frombuffer(log.slot, dtype=np.int8, count=n))
            cols["stamp"].append(np.frombuffer(log.stamp, dtype=np.int64, count=n))
            cols["aux"].append(np.frombuffer(log.aux, dtype=np.int64, count=n))
            payload.extend(log.payload)
        columns = {k: (np.concatenate(v) if v else np.empty(0)) for k, v in cols.items()}
        columns["payload"] = payload
        return cls(columns, initial_payload, initial_stamp)

    @classmethod
    def from_events(cls, events: Iterable[HistoryEvent], initial_payload=None,
                    initial_stamp: int = INITIAL_STAMP) -> "History":
        events = list(events)
        for e in events:
            if e.thread not in THREADS:
                raise MalformedHistory(f"unknown thread {e.thread!r}")
            if e.kind not in KIND_CODE:
                raise MalformedHistory(f"unknown event kind {e.kind!r}")
        none = lambda v: NONE if v is None else v
        columns = {
            "index": [e.index for e in events],
            "thread": [THREADS.index(e.thread) for e in events],
            "kind": [KIND_CODE[e.kind] for e in events],
            "pair": [-1 if e.pair is None else e.pair for e in events],
            "slot": [-1 if e.slot is None else e.slot for e in events],
            "stamp": [none(e.stamp) for e in events],
            "aux": [none(e.aux) for e in events],
            "payload": [e.payload for e in events],
        }
        return cls(columns, initial_payload, initial_stamp)

    @property
    def events(self) -> list[HistoryEvent]:
        return [
            HistoryEvent(
                int(self.index[k]), THREADS[self.thread[k]], KINDS[self.kind[k]],
                None if self.pair[k] < 0 else int(self.pair[k]),
                None if self.slot[k] < 0 else int(self.slot[k]),
                _int_or_none(self.stamp[k]), self.payload[k], _int_or_none(self.aux[k]),
            )
            for k in range(len(self))
        ]

    # -- structure ------------------------------------------------------------

    def validate(self) -> None:
        """Raise MalformedHistory unless every thread's events are well nested."""
        if len(self) and np.any(np.diff(self.index) <= 0):
            raise MalformedHistory("recording clock values are not strictly increasing")
        for t, (inv, ret) in enumerate(((WINV, WRET), (RINV, RRET))):
            mine = self.kind[self.thread == t]
            if np.any((mine != inv) & (mine != ret) & (mine != SENTER) & (mine != SEXIT)):
                raise MalformedHistory(f"{THREADS[t]} thread logged another side's operation")
            ops = mine[(mine == inv) | (mine == ret)]
            if len(ops) % 2 or np.any(ops[0::2] != inv) or np.any(ops[1::2] != ret):
                raise MalformedHistory(f"{THREADS[t]} operations are not invoke/return pairs")
            depth = np.cumsum((mine == inv).astype(np.int64) - (mine == ret))
            slots = np.flatnonzero((mine == SENTER) | (mine == SEXIT))
            if len(slots):
                kinds = mine[slots]
                if len(kinds) % 2 or np.any(kinds[0::2] != SENTER) or np.any(kinds[1::2] != SEXIT):
                    raise MalformedHistory(f"{THREADS[t]} slot events are not enter/exit pairs")
                if np.any(depth[slots] != 1):
                    raise MalformedHistory(f"{THREADS[t]} slot access outside an operation")
                pos = np.flatnonzero(self.thread == t)[slots]
                if np.any(self.pair[pos[0::2]] != self.pair[pos[1::2]]) or \
                        np.any(self.slot[pos[0::2]] != self.slot[pos[1::2]]):
                    raise MalformedHistory(f"{THREADS[t]} slot exit does not match its enter")

    def operation_columns(self) -> dict:
        """Writes and reads as parallel arrays, in each thread's program order."""
        if self._ops is None:
            self.validate()
            k = self.kind
            winv, wret = np.flatnonzero(k == WINV), np.flatnonzero(k == WRET)
            rinv, rret = np.flatnonzero(k == RINV), np.flatnonzero(k == RRET)
            self._ops = {
                "w_inv": self.index[winv], "w_ret": self.index[wret],
                "w_stamp": self.stamp[winv], "w_payload": self.payload[winv],
                "r_inv": self.index[rinv], "r_ret": self.index[rret],
                "r_stamp": self.stamp[rret], "r_payload": self.payload[rret],
                "r_index_stamp": self.aux[rret],
            }
        return self._ops

    def operations(self) -> tuple[list[OpInterval], list[OpInterval]]:
        ops = self.operation_columns()
        writes = [OpInterval("write", int(a), int(b), int(s), p) for a, b, s, p in
                  zip(ops["w_inv"], ops["w_ret"], ops["w_stamp"], ops["w_payload"])]
        reads = [OpInterval("read", int(a), int(b), int(s), p) for a, b, s, p in
                 zip(ops["r_inv"], ops["r_ret"], ops["r_stamp"], ops["r_payload"])]
        return writes, reads

    def slot_intervals(self) -> list[tuple[str, int, int, int, int]]:
        """(thread, pair, slot, enter, exit) for every recorded slot access."""
        out = []
        for t in range(2):
            pos = np.flatnonzero((self.thread == t) & ((self.kind == SENTER) | (self.kind == SEXIT)))
            for a, b in zip(pos[0::2], pos[1::2]):
                out.append((THREADS[t], int(self.pair[a]), int(self.slot[a]),
                            int(self.index[a]), int(self.index[b])))
        return out

    # -- line-delimited dump/load ---------------------------------------------

    def dump(self, fh: TextIO) -> None:
        fh.write(json.dumps({"initial_payload": self.initial_payload,
                             "initial_stamp": self.initial_stamp}) + "\n")
        for e in self.events:
            fh.write(json.dumps(list(e)) + "\n")

    def dumps(self) -> str:
        buf = io.StringIO()
        self.dump(buf)
        return buf.getvalue()

    @classmethod
    def load(cls, fh: TextIO) -> "History":
        lines = iter(fh)
        try:
            header = json.loads(next(lines))
        except StopIteration:
            raise MalformedHistory("empty history file") from None
        except json.JSONDecodeError as err:
            raise MalformedHistory(f"line 1: {err}") from None
        events = []
        for n, line in enumerate(lines, 2):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as err:
                raise MalformedHistory(f"line {n}: {err}") from None
            if not isinstance(row, list) or len(row) != len(HistoryEvent._fields):
                raise MalformedHistory(f"line {n}: expected {len(HistoryEvent._fields)} fields")
            events.append(HistoryEvent(*row))
        return cls.from_events(events, header.get("initial_payload"),
                               header.get("initial_stamp", INITIAL_STAMP))

    @classmethod
    def loads(cls, text: str) -> "History":
        return cls.load(io.StringIO(text))
