"""Explicit-state transition systems for the four-slot mechanism.

Two variants are encoded over the same state shape:

* ``plain``: control bits only. Payloads are abstracted away, so the two
  slot-access commands (``a`` and ``b``) only advance their program counter.
* ``timestamped``: every stored payload is replaced by the write round that
  produced it, and the reader carries the stamps it observes.

Both variants carry the writer round counter ``wtm`` and the reader round
counter ``rround`` so that a round bound ``K`` keeps the system finite.  In
the plain variant ``wtm`` is a ghost round counter only.

A command labelled ``L`` executes the statement at ``L`` and moves its
thread's program counter to the next label, wrapping ``a+2 -> a-2`` and
``b+1 -> b-3``.  ``a-2`` and ``b-3`` double as the idle position between
rounds.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass
from typing import Callable, Iterator

BOT = -1
"""Stamp sentinel for an uninitialised slot.  Orders below every natural."""

WRITER_LABELS = ("a-2", "a-1", "a", "a+1", "a+2")
READER_LABELS = ("b-3", "b-2", "b-1", "b", "b+1")
LABELS = WRITER_LABELS + READER_LABELS

PLAIN = "plain"
TIMESTAMPED = "timestamped"
VARIANTS = (PLAIN, TIMESTAMPED)

MUTATIONS = ("drop-b-2", "swap-a+1-a+2", "swap-b-3-b-2")

_NEXT = {
    **{l: WRITER_LABELS[(k + 1) % 5] for k, l in enumerate(WRITER_LABELS)},
    **{l: READER_LABELS[(k + 1) % 5] for k, l in enumerate(READER_LABELS)},
}

FIELDS = (
    "alpha", "beta",
    "wp", "wi", "rp", "ri",
    "reading", "latest",
    "li0", "li1", "lt0", "lt1",
    "d00", "d01", "d10", "d11",
    "wtm", "rtm", "y", "rround",
)

# Fields holding a stamp or a round count.  Everything else is control.
STAMP_FIELDS = frozenset(
    {"lt0", "lt1", "d00", "d01", "d10", "d11", "wtm", "rtm", "y", "rround"}
)
CONTROL_FIELDS = tuple(f for f in FIELDS if f not in STAMP_FIELDS)

# Thread-local variables, plus the round counters.
LOCAL_FIELDS = frozenset({"wp", "wi", "wtm", "rp", "ri", "rtm", "y", "rround"})

WRITER_FIELDS = frozenset(
    {"alpha", "wp", "wi", "wtm", "latest", "li0", "li1", "lt0", "lt1",
     "d00", "d01", "d10", "d11"}
)
READER_FIELDS = frozenset(f for f in FIELDS if f not in WRITER_FIELDS)

_LI = ("li0", "li1")
_LT = ("lt0", "lt1")
_D = (("d00", "d01"), ("d10", "d11"))


class StateAccess:
    """Indexed views onto the flattened arrays ``LI`` and ``D``."""

    __slots__ = ()

    def li(self, p: int) -> int:
        return getattr(self, _LI[p])

    def lt(self, p: int) -> int:
        return getattr(self, _LT[p])

    def d(self, p: int, i: int) -> int:
        return getattr(self, _D[p][i])


class GlobalState(namedtuple("GlobalState", FIELDS), StateAccess):
    """One valuation of every shared, local and program-counter variable.

    ``li0/li1`` are the index bits, ``lt0/lt1`` their stamps and ``dPI`` the
    stamp stored in slot ``[P][I]``.  Equality and hashing are structural.
    """

    __slots__ = ()

    def canonical(self) -> str:
        return " ".join(f"{name}={_fmt(getattr(self, name))}" for name in FIELDS)

    @classmethod
    def parse(cls, text: str) -> "GlobalState":
        values = dict(item.split("=", 1) for item in text.split())
        if set(values) != set(FIELDS):
            raise ValueError(f"expected fields {FIELDS}, got {sorted(values)}")
        return cls(**{k: _unfmt(k, v) for k, v in values.items()})


def _fmt(value) -> str:
    if value == BOT and not isinstance(value, str):
        return "_"
    return str(value)


def _unfmt(name: str, text: str):
    if name in ("alpha", "beta"):
        return text
    return BOT if text == "_" else int(text)


def slot_field(p: int, i: int) -> str:
    return _D[p][i]


def index_fields(p: int) -> tuple[str, str]:
    return _LI[p], _LT[p]


def initial_state(variant: str = TIMESTAMPED, K: int = 4) -> GlobalState:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if K < 1:
        raise ValueError("round bound K must be >= 1")
    stamped = variant == TIMESTAMPED
    return GlobalState(
        alpha="a-2", beta="b-3",
        wp=1, wi=0, rp=0, ri=0,
        reading=0, latest=1,
        li0=0, li1=0,
        lt0=0 if stamped else BOT, lt1=1 if stamped else BOT,
        d00=0 if stamped else BOT, d01=BOT,
        d10=1 if stamped else BOT, d11=BOT,
        wtm=1, rtm=0 if stamped else BOT, y=BOT, rround=0,
    )


# -- command bodies ---------------------------------------------------------
# Each body returns the assignments of one labelled statement, excluding the
# program-counter advance.  ``s`` may be a GlobalState or any object exposing
# the same attributes (the checker passes lazily-valued states).

def _a_m2(s, stamped):
    return {"wtm": s.wtm + 1, "wp": 1 - s.reading}


def _a_m1(s, stamped):
    return {"wi": 1 - s.li(s.wp)}


def _a(s, stamped):
    if not stamped:
        return {}
    return {slot_field(s.wp, s.wi): s.wtm}


def _a_p1(s, stamped):
    li, lt = index_fields(s.wp)
    if not stamped:
        return {li: s.wi}
    return {li: s.wi, lt: s.wtm}


def _a_p2(s, stamped):
    return {"latest": s.wp}


def _b_m3(s, stamped):
    return {"rp": s.latest, "rround": s.rround + 1}


def _b_m2(s, stamped):
    return {"reading": s.rp}


def _b_m1(s, stamped):
    if not stamped:
        return {"ri": s.li(s.rp)}
    return {"ri": s.li(s.rp), "rtm": s.lt(s.rp)}


def _b(s, stamped):
    if not stamped:
        return {}
    stamp = s.d(s.rp, s.ri)
    return {"rtm": stamp, "y": stamp}


def _b_p1(s, stamped):
    return {}


def _noop(s, stamped):
    return {}


def _b_m3_swapped(s, stamped):
    # reading published from the stale rp, then rp refreshed one step later
    return {"reading": s.rp, "rround": s.rround + 1}


def _b_m2_swapped(s, stamped):
    return {"rp": s.latest}


_BODIES = {
    "a-2": _a_m2, "a-1": _a_m1, "a": _a, "a+1": _a_p1, "a+2": _a_p2,
    "b-3": _b_m3, "b-2": _b_m2, "b-1": _b_m1, "b": _b, "b+1": _b_p1,
}

_MUTATED_BODIES = {
    "drop-b-2": {"b-2": _noop},
    "swap-a+1-a+2": {"a+1": _a_p2, "a+2": _a_p1},
    "swap-b-3-b-2": {"b-3": _b_m3_swapped, "b-2": _b_m2_swapped},
}


@dataclass(frozen=True)
class Command:
    id: str
    side: str
    body: Callable

    @property
    def pc(self) -> str:
        return "alpha" if self.side == "writer" else "beta"

    @property
    def order(self) -> int:
        return LABELS.index(self.id)

    def __repr__(self) -> str:
        return f"Command({self.id})"


class TransitionSystem:
    """``(S, S0, Delta)`` for one variant with both sides bounded to ``K`` rounds."""

    def __init__(self, variant: str = TIMESTAMPED, K: int = 4, mutation: str | None = None,
                 reader: bool = True):
        if mutation is not None and mutation not in MUTATIONS:
            raise ValueError(f"unknown mutation {mutation!r}; choose from {MUTATIONS}")
        self.variant = variant
        self.K = K
        self.mutation = mutation
        # reader=False gives the writer-only system: reader commands never fire
        self.reader = reader
        self.initial = initial_state(variant, K)
        bodies = dict(_BODIES)
        if mutation:
            bodies.update(_MUTATED_BODIES[mutation])
        self.commands = tuple(
            Command(l, "writer" if l in WRITER_LABELS else "reader", bodies[l])
            for l in LABELS
        )
        self._by_id = {c.id: c for c in self.commands}

    @property
    def stamped(self) -> bool:
        return self.variant == TIMESTAMPED

    def __repr__(self) -> str:
        mut = f", mutation={self.mutation!r}" if self.mutation else ""
        if not self.reader:
            mut += ", reader=False"
        return f"TransitionSystem({self.variant!r}, K={self.K}{mut})"

    def command(self, cid: str) -> Command:
        return self._by_id[cid]

    def is_enabled(self, s, c: Command) -> bool:
        if c.side == "writer":
            if s.alpha != c.id:
                return False
            return c.id != "a-2" or s.wtm < self.K + 1
        if not self.reader or s.beta != c.id:
            return False
        return c.id != "b-3" or s.rround < self.K

    def enabled(self, s) -> list[Command]:
        """Enabled commands, writer first (command-id order)."""
        out = []
        w = self._by_id[s.alpha]
        if self.is_enabled(s, w):
            out.append(w)
        r = self._by_id[s.beta]
        if self.is_enabled(s, r):
            out.append(r)
        return out

    def updates(self, s, c: Command) -> dict:
        """Assignments made by ``c`` in ``s``, including the counter advance."""
        upd = c.body(s, self.stamped)
        upd[c.pc] = _NEXT[c.id]
        return upd

    def step(self, s, c: Command | str):
        if isinstance(c, str):
            c = self._by_id[c]
        if not self.is_enabled(s, c):
            raise ValueError(f"command {c.id} is not enabled in {s}")
        return s._replace(**self.updates(s, c))

    def successors(self, s) -> list[tuple[Command, GlobalState]]:
        return [(c, s._replace(**self.updates(s, c))) for c in self.enabled(s)]

    def replay(self, labels, start=None) -> Iterator[GlobalState]:
        """Yield the states visited by executing ``labels`` from ``start``."""
        s = self.initial if start is None else start
        yield s
        for label in labels:
            s = self.step(s, label)
            yield s


def next_label(label: str) -> str:
    return _NEXT[label]
