"""Exhaustive search over the bounded syntactic state domain.

An obligation is a Python callable over one or more states.  Instead of
materialising the full product domain the search hands the callable
*partial* states and runs it to completion along one path at a time:

* control fields (bits, program counters, the reader round) are branched
  on lazily: the first read of an unassigned one aborts the run and the
  search retries once per value of its domain;
* stamp fields (``wtm``, ``rtm``, ``y`` and every ``LI``/``D`` stamp) are
  symbolic integers.  They may be compared and shifted by constants; a
  comparison the path so far does not decide aborts the run and the search
  retries under the comparison and under its negation.

Path conditions on stamps are conjunctions of difference constraints
``x - y <= c`` kept closed under shortest paths, so entailment and
feasibility are exact.  Every valuation of the domain satisfies exactly one
explored path, hence a search without a failing leaf proves the obligation
on the whole domain.  A failing leaf is turned into a concrete state and
re-checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .model import BOT, FIELDS, PLAIN, READER_LABELS, WRITER_LABELS, GlobalState, StateAccess

_FIELD_SET = frozenset(FIELDS)
SYMBOLIC_FIELDS = frozenset({"lt0", "lt1", "d00", "d01", "d10", "d11", "wtm", "rtm", "y"})

ZERO = "0"
INF = float("inf")


class Unassigned(Exception):
    """Raised on the first read of a control field the search has not fixed."""


class Fork(Exception):
    """Raised on a stamp comparison the current path does not decide."""


def state_domain(variant: str, K: int) -> dict[str, tuple]:
    """Per-field value ranges: stamps up to ``K+1`` plus the bottom stamp."""
    bits = (0, 1)
    stamps = (BOT, *range(0, K + 2)) if variant != PLAIN else (BOT,)
    return {
        "alpha": WRITER_LABELS,
        "beta": READER_LABELS,
        "wp": bits, "wi": bits, "rp": bits, "ri": bits,
        "reading": bits, "latest": bits,
        "li0": bits, "li1": bits,
        "lt0": stamps, "lt1": stamps,
        "d00": stamps, "d01": stamps, "d10": stamps, "d11": stamps,
        "wtm": tuple(range(1, K + 2)),
        "rtm": stamps, "y": stamps,
        "rround": tuple(range(0, K + 1)),
    }


def domain_size(domain: dict[str, tuple]) -> int:
    n = 1
    for values in domain.values():
        n *= len(values)
    return n


def _is_range(values: tuple) -> bool:
    return len(values) > 1 and list(values) == list(range(values[0], values[-1] + 1))


# -- difference constraints ---------------------------------------------------

class Zone:
    """Closed set of constraints ``v - u <= w`` stored as ``dist[u][v] = w``."""

    __slots__ = ("dist",)

    def __init__(self, dist=None):
        self.dist: dict = dist if dist is not None else {ZERO: {ZERO: 0}}

    def copy(self) -> "Zone":
        return Zone({u: dict(row) for u, row in self.dist.items()})

    def bound(self, u, v) -> float:
        """Tightest known upper bound of ``v - u``."""
        return self.dist[u].get(v, INF)

    def add_var(self, v, lo: int, hi: int) -> None:
        if v in self.dist:
            return
        self.dist[v] = {v: 0}
        self.add(ZERO, v, hi)
        self.add(v, ZERO, -lo)

    def add(self, u, v, w) -> bool:
        """Add ``v - u <= w``; return False if that makes the zone empty."""
        dist = self.dist
        if dist[v].get(u, INF) + w < 0:
            return False
        if dist[u].get(v, INF) <= w:
            return True
        into_u = [(i, row[u]) for i, row in dist.items() if u in row]
        from_v = list(dist[v].items())
        for i, a in into_u:
            row = dist[i]
            for j, b in from_v:
                d = a + w + b
                if d < row.get(j, INF):
                    row[j] = d
        return True

    def model(self) -> dict:
        """A satisfying valuation: each variable at its largest feasible value."""
        return {v: int(d) for v, d in self.dist[ZERO].items() if v != ZERO}


_ZONES: list[Zone] = []


def _decide(x, y, c) -> bool:
    """Truth of ``x - y <= c`` on the current path, or raise Fork."""
    if x == y:
        return 0 <= c
    zone = _ZONES[-1]
    if zone.bound(y, x) <= c:
        return True
    if zone.bound(x, y) <= -c - 1:
        return False
    raise Fork((y, x, c))


class Sym:
    """A symbolic integer ``var + off``."""

    __slots__ = ("var", "off")

    def __init__(self, var, off: int = 0):
        self.var = var
        self.off = off

    def __add__(self, k):
        if isinstance(k, bool) or not isinstance(k, int):
            return NotImplemented
        return Sym(self.var, self.off + k)

    __radd__ = __add__

    def __sub__(self, k):
        if isinstance(k, bool) or not isinstance(k, int):
            return NotImplemented
        return Sym(self.var, self.off - k)

    def __le__(self, other):
        return _le(self, other)

    def __lt__(self, other):
        return _le(self, _shift(other, -1))

    def __ge__(self, other):
        return _le(other, self)

    def __gt__(self, other):
        return _le(_shift(other, 1), self)

    def __eq__(self, other):
        if not isinstance(other, (int, Sym)) or isinstance(other, bool):
            return NotImplemented
        return _le(self, other) and _le(other, self)

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __bool__(self):
        raise TypeError("symbolic stamps have no truth value")

    def __hash__(self):
        raise TypeError("symbolic stamps are not hashable")

    def __index__(self):
        raise TypeError("symbolic stamps cannot be used as indices")

    def __repr__(self) -> str:
        return f"Sym({self.var}{self.off:+d})"


def _term(v):
    if isinstance(v, Sym):
        return v.var, v.off
    if isinstance(v, int) and not isinstance(v, bool):
        return ZERO, v
    raise TypeError(f"cannot compare a symbolic stamp with {v!r}")


def _shift(v, k):
    return v + k


def _le(a, b) -> bool:
    x, ox = _term(a)
    y, oy = _term(b)
    return _decide(x, y, oy - ox)


# -- partial states -------------------------------------------------------

class PartialState(StateAccess):
    __slots__ = ("_tag", "_assign", "_bounds")

    def __init__(self, tag: int, assign: dict, bounds: dict):
        object.__setattr__(self, "_tag", tag)
        object.__setattr__(self, "_assign", assign)
        object.__setattr__(self, "_bounds", bounds)

    def __getattr__(self, name):
        if name not in _FIELD_SET:
            raise AttributeError(name)
        bounds = self._bounds.get(name)
        if bounds is not None:
            var = (self._tag, name)
            _ZONES[-1].add_var(var, *bounds)
            return Sym(var)
        try:
            return self._assign[self._tag, name]
        except KeyError:
            raise Unassigned(self._tag, name) from None

    def _replace(self, **updates):
        return Overlay(self, updates)


class Overlay(StateAccess):
    """A state that differs from ``base`` on ``updates`` only."""

    __slots__ = ("_base", "_updates")

    def __init__(self, base, updates: dict):
        object.__setattr__(self, "_base", base)
        object.__setattr__(self, "_updates", updates)

    def __getattr__(self, name):
        if name in self._updates:
            return self._updates[name]
        return getattr(self._base, name)

    def _replace(self, **updates):
        return Overlay(self, updates)


class Tracking(StateAccess):
    """Records every field read through it into ``log``."""

    __slots__ = ("_inner", "_log")

    def __init__(self, inner, log: set):
        object.__setattr__(self, "_inner", inner)
        object.__setattr__(self, "_log", log)

    def __getattr__(self, name):
        value = getattr(self._inner, name)
        if name in _FIELD_SET:
            self._log.add(name)
        return value

    def _replace(self, **updates):
        return Overlay(self, updates)


# -- search -----------------------------------------------------------------

@dataclass
class SearchResult:
    counterexample: tuple[GlobalState, ...] | None
    leaves: int
    runs: int

    @property
    def holds(self) -> bool:
        return self.counterexample is None


def search(obligation: Callable[..., bool], arity: int, domain: dict[str, tuple],
           max_runs: int = 20_000_000) -> SearchResult:
    """Look for states making ``obligation`` false.

    Returns the first failing valuation found, or no counterexample when the
    obligation holds on every valuation of ``domain``.
    """
    bounds = {
        name: (values[0], values[-1])
        for name, values in domain.items()
        if name in SYMBOLIC_FIELDS and _is_range(values)
    }
    stack: list[tuple[dict, Zone]] = [({}, Zone())]
    leaves = runs = 0
    while stack:
        assign, zone = stack.pop()
        runs += 1
        if runs > max_runs:
            raise RuntimeError(f"symbolic search exceeded {max_runs} runs")
        states = [PartialState(k, assign, bounds) for k in range(arity)]
        _ZONES.append(zone)
        try:
            ok = obligation(*states)
        except Unassigned as need:
            tag, name = need.args
            for value in reversed(domain[name]):
                child = dict(assign)
                child[tag, name] = value
                stack.append((child, zone))
            continue
        except Fork as fork:
            u, v, w = fork.args[0]
            neg = zone.copy()
            if neg.add(v, u, -w - 1):
                stack.append((assign, neg))
            pos = zone.copy()
            if pos.add(u, v, w):
                stack.append((assign, pos))
            continue
        finally:
            _ZONES.pop()
        leaves += 1
        if not ok:
            witness = _complete(arity, assign, zone, domain)
            if obligation(*witness):
                raise AssertionError("obligation is not a function of the fields it reads")
            return SearchResult(witness, leaves, runs)
    return SearchResult(None, leaves, runs)


def _complete(arity: int, assign: dict, zone: Zone, domain: dict[str, tuple]) -> tuple:
    values = zone.model()
    out = []
    for tag in range(arity):
        fields = {}
        for name in FIELDS:
            key = (tag, name)
            if key in values:
                fields[name] = values[key]
            else:
                fields[name] = assign.get(key, domain[name][0])
        out.append(GlobalState(**fields))
    return tuple(out)


def footprint(fn: Callable[..., bool], arity: int, domain: dict[str, tuple]) -> list[frozenset]:
    """Per-argument set of fields ``fn`` may read anywhere on ``domain``."""
    reads = [set() for _ in range(arity)]

    def probe(*states):
        fn(*(Tracking(s, reads[k]) for k, s in enumerate(states)))
        return True

    search(probe, arity, domain)
    return [frozenset(r) for r in reads]
