"""Explicit-state verification engine.

Reachability and plain invariant checks run over the reachable set of a
bounded :class:`~fourslot.model.TransitionSystem`.  Induction checks run over
the whole bounded syntactic domain via :mod:`fourslot.symbolic`, so a
predicate reported inductive is preserved from *every* state satisfying it,
not only from reachable ones.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .model import CONTROL_FIELDS, FIELDS, LOCAL_FIELDS, GlobalState, TransitionSystem
from .predicates import PairPredicate, StatePredicate
from .symbolic import Tracking, search, state_domain

DEFAULT_STATE_BUDGET = 10**7
DEFAULT_PAIR_BUDGET = 10**9


class BudgetExceeded(RuntimeError):
    pass


class UnverifiedSupport(ValueError):
    pass


# -- traces and reports --------------------------------------------------------

@dataclass
class Trace:
    """A command-labelled state sequence.

    ``marks`` names the positions of the states a verdict talks about (one
    position for a state predicate, two for a pair predicate).
    """

    start: GlobalState
    steps: list[tuple[str, GlobalState]] = field(default_factory=list)
    marks: tuple[int, ...] = ()

    @property
    def states(self) -> list[GlobalState]:
        return [self.start] + [s for _, s in self.steps]

    @property
    def labels(self) -> list[str]:
        return [c for c, _ in self.steps]

    def marked(self) -> tuple[GlobalState, ...]:
        states = self.states
        return tuple(states[k] for k in self.marks)

    def replay(self, ts: TransitionSystem) -> list[GlobalState]:
        """Re-execute the labels from ``start``; raise if any step disagrees."""
        states = list(ts.replay(self.labels, self.start))
        if states != self.states:
            raise AssertionError("trace does not replay through the model")
        return states

    def to_dict(self) -> dict:
        return {
            "start": self.start.canonical(),
            "labels": self.labels,
            "marks": list(self.marks),
        }

    def render(self) -> str:
        lines = [f"  [0] {self.start.canonical()}"]
        for k, (label, s) in enumerate(self.steps, 1):
            mark = " *" if k in self.marks else ""
            lines.append(f"  [{k}] --{label}--> {s.canonical()}{mark}")
        if 0 in self.marks:
            lines[0] += " *"
        return "\n".join(lines)


VERDICTS = ("holds", "fails", "inductive", "inductive_subject_to", "not_inductive")


@dataclass
class CheckReport:
    name: str
    verdict: str
    formula: str = ""
    method: str = ""
    support: tuple[str, ...] = ()
    counterexample: Trace | None = None
    offending_command: str | None = None
    obligation: str | None = None
    nontrivial: tuple[str, ...] | None = None
    detail: str = ""
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict in ("holds", "inductive", "inductive_subject_to")

    def record(self) -> dict:
        """Structured form with a stable key order."""
        return {
            "name": self.name,
            "verdict": self.verdict,
            "method": self.method,
            "support": list(self.support),
            "formula": self.formula,
            "offending_command": self.offending_command,
            "obligation": self.obligation,
            "nontrivial": list(self.nontrivial) if self.nontrivial is not None else None,
            "detail": self.detail,
            "stats": dict(sorted(self.stats.items())),
            "counterexample": self.counterexample.to_dict() if self.counterexample else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.record(), ensure_ascii=False)

    def render(self) -> str:
        verdict = self.verdict
        if self.verdict == "inductive_subject_to":
            verdict += "(" + ", ".join(self.support) + ")"
        elif self.verdict == "not_inductive" and self.offending_command:
            verdict += f"({self.offending_command}, {self.obligation or 'step'})"
        line = f"{'pass' if self.ok else 'FAIL'}  {self.name:<16} {verdict}"
        if self.method:
            line += f"  [{self.method}]"
        if self.nontrivial is not None:
            line += "  non-trivial at: " + (", ".join(self.nontrivial) or "-")
        if self.detail:
            line += f"  {self.detail}"
        if self.counterexample is not None and not self.ok:
            line += "\n" + self.counterexample.render()
        return line


# -- reachability ----------------------------------------------------------

class ReachSet:
    """Reachable states of a bounded system, in breadth-first discovery order.

    State 0 is the initial state.  ``parent[k]`` is the BFS tree edge into
    state ``k`` so ``trace_to`` yields a shortest trace, ties broken by
    command order.
    """

    def __init__(self, ts: TransitionSystem, states, succ, parent):
        self.ts = ts
        self.states: list[GlobalState] = states
        self.index = {s: k for k, s in enumerate(states)}
        self.succ: list[list[tuple[str, int]]] = succ
        self.parent: list[tuple[int, str] | None] = parent
        self._desc: list[int] | None = None

    def __len__(self) -> int:
        return len(self.states)

    def __contains__(self, s) -> bool:
        return s in self.index

    @property
    def transitions(self) -> Iterable[tuple[GlobalState, str, GlobalState]]:
        for k, out in enumerate(self.succ):
            for label, j in out:
                yield self.states[k], label, self.states[j]

    @property
    def transition_count(self) -> int:
        return sum(len(out) for out in self.succ)

    def trace_to(self, k: int) -> Trace:
        steps = []
        while self.parent[k] is not None:
            p, label = self.parent[k]
            steps.append((label, self.states[k]))
            k = p
        steps.reverse()
        return Trace(self.states[0], steps, (len(steps),))

    def path_between(self, a: int, b: int) -> list[tuple[str, GlobalState]]:
        """Shortest non-empty command path from state ``a`` to state ``b``."""
        prev: dict[int, tuple[int, str]] = {}
        queue = deque()
        for label, j in self.succ[a]:
            if j not in prev:
                prev[j] = (a, label)
                queue.append(j)
        while queue:
            k = queue.popleft()
            if k == b:
                break
            for label, j in self.succ[k]:
                if j not in prev:
                    prev[j] = (k, label)
                    queue.append(j)
        if b not in prev:
            raise ValueError("no path between the given states")
        # the graph is acyclic, so walking back from b ends at a
        steps = []
        k = b
        while k != a:
            p, label = prev[k]
            steps.append((label, self.states[k]))
            k = p
        steps.reverse()
        return steps

    def pair_trace(self, a: int, b: int) -> Trace:
        head = self.trace_to(a)
        tail = self.path_between(a, b)
        steps = head.steps + tail
        return Trace(head.start, steps, (len(head.steps), len(steps)))

    def descendants(self) -> list[int]:
        """Per-state bitset of strict descendants, i.e. the relation (Δ^R)^+."""
        if self._desc is None:
            desc = [0] * len(self.states)
            changed = True
            while changed:
                changed = False
                for k in range(len(self.states) - 1, -1, -1):
                    bits = 0
                    for _, j in self.succ[k]:
                        bits |= (1 << j) | desc[j]
                    if bits != desc[k]:
                        desc[k] = bits
                        changed = True
            self._desc = desc
        return self._desc

    def pair_count(self) -> int:
        return sum(d.bit_count() for d in self.descendants())


def explore(ts: TransitionSystem, budget: int = DEFAULT_STATE_BUDGET) -> ReachSet:
    """Breadth-first fixpoint of ``ts`` from its initial state."""
    states = [ts.initial]
    index = {ts.initial: 0}
    parent: list[tuple[int, str] | None] = [None]
    succ: list[list[tuple[str, int]]] = []
    k = 0
    while k < len(states):
        out = []
        for c, t in ts.successors(states[k]):
            j = index.get(t)
            if j is None:
                if len(states) >= budget:
                    raise BudgetExceeded(
                        f"state budget {budget} exceeded after expanding {k} of "
                        f"{len(states)} discovered states"
                    )
                j = index[t] = len(states)
                states.append(t)
                parent.append((k, c.id))
            out.append((c.id, j))
        succ.append(out)
        k += 1
    return ReachSet(ts, states, succ, parent)


# -- invariants on the reachable set ------------------------------------

def check_state_invariant(p: StatePredicate, r: ReachSet) -> CheckReport:
    for k, s in enumerate(r.states):
        if not p(s):
            return CheckReport(
                p.name, "fails", p.formula, "reachable states",
                counterexample=r.trace_to(k),
                detail=f"violated in state #{k} of {len(r)}",
            )
    return CheckReport(p.name, "holds", p.formula, "reachable states",
                       stats={"states": len(r)})


class _Escaped(Exception):
    pass


class _Guarded:
    """Reads through to ``inner`` but rejects fields outside ``allowed``."""

    __slots__ = ("_inner", "_allowed", "_miss")

    def __init__(self, inner, allowed, miss: set):
        self._inner, self._allowed, self._miss = inner, allowed, miss

    def __getattr__(self, name):
        if name in _FIELD_SET and name not in self._allowed:
            self._miss.add(name)
            raise _Escaped(name)
        return getattr(self._inner, name)

    def li(self, p):
        return self.__getattr__(("li0", "li1")[p])

    def lt(self, p):
        return self.__getattr__(("lt0", "lt1")[p])

    def d(self, p, i):
        return self.__getattr__((("d00", "d01"), ("d10", "d11"))[p][i])


_FIELD_SET = frozenset(FIELDS)
_FIELD_ORDER = {f: k for k, f in enumerate(FIELDS)}


TRANSITION_METHODS = ("grouped", "per-source")


def check_transition_invariant(pp: PairPredicate, r: ReachSet,
                               budget: int = DEFAULT_PAIR_BUDGET,
                               method: str = "grouped") -> CheckReport:
    """Check ``pp`` on every reachable big-step pair.

    ``method="per-source"`` runs a forward search from every reachable state
    and evaluates ``pp`` on each pair it meets.  The default ``"grouped"``
    method gives the same verdict with far fewer evaluations:
    states are grouped by their projection onto the fields ``pp`` reads on
    each side, and each distinct (earlier class, later class) combination
    that occurs in ``(Δ^R)^+`` is evaluated once on representatives.  The
    projection starts empty; an evaluation that touches a field outside it
    widens the projection and restarts, so every counted evaluation depends
    only on projected fields and therefore speaks for its whole class.
    """
    if method not in TRANSITION_METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {TRANSITION_METHODS}")
    if method == "per-source":
        return _per_source(pp, r, budget)
    pairs = r.pair_count()
    if pairs > budget:
        raise BudgetExceeded(f"{pairs} reachable pairs exceed the budget {budget}")
    desc = r.descendants()

    f1: set = set()
    f2: set = set()
    while True:
        try:
            failure, evaluated = _grouped_pass(pp, r, desc, f1, f2)
            break
        except _Escaped:
            continue
    stats = {"pairs": pairs, "classes": evaluated,
             "footprint": [sorted(f1, key=_FIELD_ORDER.get), sorted(f2, key=_FIELD_ORDER.get)]}
    if failure is not None:
        a, b = failure
        return CheckReport(
            pp.name, "fails", pp.formula, "reachable big-step pairs",
            counterexample=r.pair_trace(a, b),
            detail=f"violated on pair (#{a}, #{b})", stats=stats,
        )
    return CheckReport(pp.name, "holds", pp.formula, "reachable big-step pairs", stats=stats)


def _per_source(pp, r: ReachSet, budget: int) -> CheckReport:
    states, succ = r.states, r.succ
    pairs = 0
    for a, s in enumerate(states):
        seen = {a}
        queue = deque(j for _, j in succ[a])
        seen.update(queue)
        while queue:
            b = queue.popleft()
            pairs += 1
            if pairs > budget:
                raise BudgetExceeded(f"more than {budget} reachable pairs (stopped at source #{a})")
            if not pp(s, states[b]):
                return CheckReport(
                    pp.name, "fails", pp.formula, "reachable big-step pairs",
                    counterexample=r.pair_trace(a, b),
                    detail=f"violated on pair (#{a}, #{b})", stats={"pairs_checked": pairs},
                )
            for _, j in succ[b]:
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
    return CheckReport(pp.name, "holds", pp.formula, "reachable big-step pairs",
                       stats={"pairs": pairs})


def _grouped_pass(pp, r: ReachSet, desc, f1: set, f2: set):
    k1 = sorted(f1, key=_FIELD_ORDER.get)
    k2 = sorted(f2, key=_FIELD_ORDER.get)
    first_cls: dict[tuple, list[int]] = {}
    second_mask: dict[tuple, int] = {}
    second_rep: dict[tuple, int] = {}
    for k, s in enumerate(r.states):
        first_cls.setdefault(tuple(getattr(s, f) for f in k1), []).append(k)
        key = tuple(getattr(s, f) for f in k2)
        second_mask[key] = second_mask.get(key, 0) | (1 << k)
        second_rep.setdefault(key, k)

    evaluated = 0
    for members in first_cls.values():
        reach_bits = 0
        for k in members:
            reach_bits |= desc[k]
        if not reach_bits:
            continue
        s = _Guarded(r.states[members[0]], f1, f1)
        for key2, mask in second_mask.items():
            if not reach_bits & mask:
                continue
            evaluated += 1
            # a miss adds the field to f1 or f2 and aborts this pass
            if pp(s, _Guarded(r.states[second_rep[key2]], f2, f2)):
                continue
            for a in members:
                hit = desc[a] & mask
                if hit:
                    return (a, (hit & -hit).bit_length() - 1), evaluated
    return None, evaluated


def check_invariant(pred, r: ReachSet) -> CheckReport:
    if pred.arity == 1:
        return check_state_invariant(pred, r)
    return check_transition_invariant(pred, r)


# -- induction over the syntactic domain -----------------------------------

SupportArg = "Sequence | Mapping[str, Sequence] | None"


def _per_command(sup, ts: TransitionSystem) -> dict[str, list]:
    if sup is None:
        return {c.id: [] for c in ts.commands}
    if isinstance(sup, Mapping):
        return {c.id: list(sup.get(c.id, ())) for c in ts.commands}
    return {c.id: list(sup) for c in ts.commands}


def _support_names(*sups) -> tuple[str, ...]:
    names: list[str] = []
    for sup in sups:
        if sup is None:
            continue
        items = sup.values() if isinstance(sup, Mapping) else [sup]
        for group in items:
            for p in group:
                if p.name not in names:
                    names.append(p.name)
    return tuple(names)


def _holds_on(preds, s, t) -> bool:
    """Supports on the transition ``(s, t)``: state ones at both ends."""
    for p in preds:
        if p.arity == 1:
            if not (p(s) and p(t)):
                return False
        elif not p(s, t):
            return False
    return True


def verify_supports(r: ReachSet | None, *sups) -> None:
    """Reject supports that do not hold on the reachable set of ``r``."""
    if r is None:
        raise UnverifiedSupport("supports require a reachable set to be verified against")
    seen = set()
    for sup in sups:
        if sup is None:
            continue
        groups = sup.values() if isinstance(sup, Mapping) else [sup]
        for group in groups:
            for p in group:
                if p.name in seen:
                    continue
                seen.add(p.name)
                report = check_invariant(p, r)
                if not report.ok:
                    raise UnverifiedSupport(f"support {p.name} does not hold: {report.detail}")


def _domain(ts: TransitionSystem) -> dict:
    return state_domain(ts.variant, ts.K)


def _not_inductive(p, method, support, c, which, states, ts) -> CheckReport:
    start = states[0] if len(states) == 1 else states[-1]
    nxt = ts.step(start, c)
    trace = Trace(start, [(c.id, nxt)], (0, 1))
    detail = "pre-state " + start.canonical()
    if len(states) > 1:
        detail = f"earlier state {states[0].canonical()}; " + detail
    return CheckReport(
        p.name, "not_inductive", p.formula, method, support,
        counterexample=trace, offending_command=c.id, obligation=which, detail=detail,
    )


def check_inductive(p: StatePredicate, ts: TransitionSystem) -> CheckReport:
    """Induction-S: ``init ⟹ p`` and ``p ∧ c ⟹ p'`` for every command."""
    return _state_induction(p, ts, None, "Induction-S")


def check_inductive_subject_to(p: StatePredicate, support, ts: TransitionSystem,
                               reach: ReachSet | None = None) -> CheckReport:
    """Subject-S: ``p ∧ inv_c ∧ c ⟹ p'`` with ``inv_c`` already verified.

    ``support`` is a list applied to every command or a map from command id
    to list.  State supports constrain both ends of the transition; pair
    supports constrain ``(s, step(s, c))``.
    """
    verify_supports(reach, support)
    return _state_induction(p, ts, support, "Subject-S")


def _state_induction(p, ts, support, method) -> CheckReport:
    names = _support_names(support)
    if not p(ts.initial):
        return CheckReport(p.name, "not_inductive", p.formula, method, names,
                           counterexample=Trace(ts.initial, [], (0,)),
                           obligation="init", detail="initial state violates it")
    per_cmd = _per_command(support, ts)
    domain = _domain(ts)
    runs = 0
    for c in ts.commands:
        sup = per_cmd[c.id]

        def obligation(s, c=c, sup=sup):
            if not ts.is_enabled(s, c) or not p(s):
                return True
            t = s._replace(**ts.updates(s, c))
            return not _holds_on(sup, s, t) or p(t)

        res = search(obligation, 1, domain)
        runs += res.runs
        if not res.holds:
            return _not_inductive(p, method, names, c, "step", res.counterexample, ts)
    verdict = "inductive_subject_to" if names else "inductive"
    report = CheckReport(p.name, verdict, p.formula, method, names, stats={"runs": runs})
    if p.antecedent is not None and not names:
        report.nontrivial = nontrivial_commands(p, ts)
    return report


def nontrivial_commands(p: StatePredicate, ts: TransitionSystem) -> tuple[str, ...]:
    """Commands whose preservation of ``A ⟹ C`` needs an actual argument.

    A command's case is trivial when, from every enabled state satisfying
    ``p``, either the antecedent is false afterwards, or the antecedent
    already held and the command neither assigns a variable the consequent
    reads nor reads one of its own local variables that the consequent reads.
    """
    A, C = p.antecedent, p.consequent
    domain = _domain(ts)
    out = []
    for c in ts.commands:

        def trivial(s, c=c):
            if not ts.is_enabled(s, c) or not p(s):
                return True
            cmd_reads: set = set()
            upd = ts.updates(Tracking(s, cmd_reads), c)
            t = s._replace(**upd)
            if not A(t):
                return True
            if not A(s):
                return False
            cons_reads: set = set()
            C(Tracking(s, cons_reads))
            C(Tracking(t, cons_reads))
            written = set(upd) - {c.pc}
            local_reads = cmd_reads & LOCAL_FIELDS
            return not (cons_reads & (written | local_reads))

        if not search(trivial, 1, domain).holds:
            out.append(c.id)
    return tuple(out)


def check_inductive_transition(pp: PairPredicate, support, ts: TransitionSystem,
                               reach: ReachSet | None = None, base=None,
                               prefix=None) -> CheckReport:
    """Induction-T / Subject-T over the syntactic domain.

    For every command ``c`` and states ``s, s0`` with ``s1 = step(s0, c)``:

    * extension: ``pp(s, s0) ∧ prefix(s, s0) ∧ support_c(s0, s1) ⟹ pp(s, s1)``
    * base: ``base_c(s0) ∧ support_c(s0, s1) ⟹ pp(s0, s1)``

    ``prefix`` holds verified invariants assumed on the already-established
    big-step pair ``(s, s0)``; state invariants in it are assumed at both
    states.  ``base`` holds verified state invariants assumed at ``s0``.
    """
    if support or base or prefix:
        verify_supports(reach, support, base, prefix)
    names = _support_names(support, prefix, base)
    method = "Subject-T" if names else "Induction-T"
    per_cmd = _per_command(support, ts)
    per_base = _per_command(base, ts)
    pre_sup = list(prefix or ())
    domain = _domain(ts)
    runs = 0
    for c in ts.commands:
        sup = per_cmd[c.id]
        base_c = per_base[c.id]

        def extension(s, s0, c=c, sup=sup):
            if not ts.is_enabled(s0, c) or not pp(s, s0):
                return True
            if not _holds_on(pre_sup, s, s0):
                return True
            s1 = s0._replace(**ts.updates(s0, c))
            return not _holds_on(sup, s0, s1) or pp(s, s1)

        def base_case(s0, c=c, sup=sup, base_c=base_c):
            if not ts.is_enabled(s0, c) or not all(q(s0) for q in base_c):
                return True
            s1 = s0._replace(**ts.updates(s0, c))
            return not _holds_on(sup, s0, s1) or pp(s0, s1)

        for which, fn, arity in (("base", base_case, 1), ("extension", extension, 2)):
            res = search(fn, arity, domain)
            runs += res.runs
            if not res.holds:
                return _not_inductive(pp, method, names, c, which, res.counterexample, ts)
    verdict = "inductive_subject_to" if names else "inductive"
    return CheckReport(pp.name, verdict, pp.formula, method, names, stats={"runs": runs})


# -- consequence and composition ------------------------------------------

def check_consequence(target, premises: Sequence, ts: TransitionSystem,
                      reach: ReachSet | None = None) -> CheckReport:
    """Consequence/Conjunction: ``∧ premises ⟹ target`` on the whole domain."""
    verify_supports(reach, premises)
    arity = target.arity
    if any(p.arity > arity for p in premises):
        raise ValueError("a pair premise cannot imply a state predicate")
    names = tuple(p.name for p in premises)

    def obligation(*states):
        for p in premises:
            if p.arity == arity:
                ok = p(*states)
            else:
                ok = all(p(s) for s in states)
            if not ok:
                return True
        return target(*states)

    res = search(obligation, arity, _domain(ts))
    if not res.holds:
        states = res.counterexample
        trace = Trace(states[0], [], (0,))
        return CheckReport(
            target.name, "fails", target.formula, "Consequence", names,
            counterexample=trace,
            detail="premises hold but target fails on " + " | ".join(s.canonical() for s in states),
        )
    return CheckReport(target.name, "holds", target.formula, "Consequence", names,
                       stats={"runs": res.runs})


def check_composition(target: PairPredicate, links: Sequence[PairPredicate],
                      guards: Sequence[StatePredicate], ts: TransitionSystem,
                      reach: ReachSet, assume: Sequence[StatePredicate] = ()) -> CheckReport:
    """Composition along witness states.

    ``target`` must have ``pre``/``post`` antecedents.  Three obligations:

    1. every link and assumption is a verified invariant of ``reach``;
    2. every reachable path from a ``pre`` state to a later ``post`` state
       passes strictly through states satisfying ``guards`` in order;
    3. for all ``s, m1..mn, u`` in the domain with ``pre(s)``, ``post(u)``,
       ``guards[k](mk)``, ``links[k]`` on consecutive states and ``assume``
       at every state: ``target(s, u)``.
    """
    if len(links) != len(guards) + 1:
        raise ValueError("need exactly one more link than guards")
    if target.pre is None or target.post is None:
        raise ValueError("composition target needs pre/post antecedents")
    verify_supports(reach, links, assume)
    names = tuple(p.name for p in (*assume, *links))
    method = "Composition"

    bad = _find_unguarded_path(reach, target.pre, target.post, guards)
    if bad is not None:
        a, b = bad
        return CheckReport(
            target.name, "fails", target.formula, method, names,
            counterexample=reach.pair_trace(a, b),
            detail="a path between the endpoints avoids the witness guards",
        )

    n = len(guards)

    def obligation(*states):
        s, u = states[0], states[-1]
        if not (target.pre(s) and target.post(u)):
            return True
        for k in range(n):
            if not guards[k](states[k + 1]):
                return True
        for q in assume:
            if not all(q(x) for x in states):
                return True
        for k, link in enumerate(links):
            if not link(states[k], states[k + 1]):
                return True
        return target(s, u)

    res = search(obligation, n + 2, _domain(ts))
    if not res.holds:
        states = res.counterexample
        return CheckReport(
            target.name, "fails", target.formula, method, names,
            counterexample=Trace(states[0], [], (0,)),
            detail="links hold but target fails on " + " | ".join(s.canonical() for s in states),
        )
    return CheckReport(target.name, "holds", target.formula, method, names,
                       stats={"runs": res.runs})


def _find_unguarded_path(r: ReachSet, pre, post, guards):
    """Search ``(state, guards matched)`` for a post-state reached too early."""
    n = len(guards)
    seen: dict[tuple[int, int], int] = {}
    queue = deque()
    for a, s in enumerate(r.states):
        if not pre(s):
            continue
        for _, j in r.succ[a]:
            if (j, 0) not in seen:
                seen[j, 0] = a
                queue.append((j, 0))
    while queue:
        k, phase = queue.popleft()
        s = r.states[k]
        if phase < n and post(s):
            return seen[k, phase], k
        nphase = phase + 1 if phase < n and guards[phase](s) else phase
        if nphase == n:
            continue
        for _, j in r.succ[k]:
            if (j, nphase) not in seen:
                seen[j, nphase] = seen[k, phase]
                queue.append((j, nphase))
    return None


# -- saturation of the control skeleton ----------------------------------------

def control_projection(r: ReachSet) -> frozenset:
    """Reachable states with stamps and the reader's round counter erased."""
    return frozenset(tuple(getattr(s, f) for f in CONTROL_FIELDS) for s in r.states)


def saturation(ts: TransitionSystem, limit: int = 8, budget: int = DEFAULT_STATE_BUDGET) -> dict:
    """Control-projection sizes from ``ts.K`` up to ``limit``.

    ``stable_from`` is the first bound whose projection equals the next
    one's, or None if that never happens up to ``limit``.
    """
    sizes: dict[int, int] = {}
    prev = None
    stable_from = None
    for k in range(ts.K, max(limit, ts.K + 1) + 1):
        proj = control_projection(explore(TransitionSystem(ts.variant, k, ts.mutation), budget))
        sizes[k] = len(proj)
        if prev is not None and proj == prev:
            stable_from = k - 1
            break
        prev = proj
    return {"sizes": sizes, "stable_from": stable_from}
