"""Named state and state-pair predicates over :mod:`fourslot.model` states.

Stamps compare as plain integers with the bottom stamp encoded as ``-1``, so
``BOT < 0 < 1 < ...`` and every comparison below is total.

Pair predicates take ``(s, t)`` with ``s`` the earlier state of a big-step
transition and ``t`` the later one.  Implication-shaped entries keep their
antecedent separately (``pre`` on the earlier state, ``post`` on the later
one) so that the checker can reason about when they are vacuous.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable


PAIR = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class StatePredicate:
    name: str
    fn: Callable = field(repr=False, compare=False)
    formula: str = ""
    antecedent: Callable | None = field(default=None, repr=False, compare=False)
    consequent: Callable | None = field(default=None, repr=False, compare=False)
    arity = 1

    def __call__(self, s) -> bool:
        return self.fn(s)


@dataclass(frozen=True)
class PairPredicate:
    name: str
    fn: Callable = field(repr=False, compare=False)
    formula: str = ""
    pre: Callable | None = field(default=None, repr=False, compare=False)
    post: Callable | None = field(default=None, repr=False, compare=False)
    arity = 2

    def __call__(self, s, t) -> bool:
        return self.fn(s, t)


def implication(name, antecedent, consequent, formula="") -> StatePredicate:
    return StatePredicate(
        name, lambda s: not antecedent(s) or consequent(s), formula,
        antecedent=antecedent, consequent=consequent,
    )


def pair_implication(name, pre, post, consequent, formula="") -> PairPredicate:
    return PairPredicate(
        name, lambda s, t: not (pre(s) and post(t)) or consequent(s, t), formula,
        pre=pre, post=post,
    )


def TRUE_STATE() -> StatePredicate:
    return StatePredicate("true", lambda s: True, "true")


# -- combinators ---------------------------------------------------------------

def conjoin(*preds):
    """Pointwise conjunction of predicates of equal arity."""
    if not preds:
        return TRUE_STATE()
    arity = preds[0].arity
    if any(p.arity != arity for p in preds):
        raise ValueError("cannot conjoin state and pair predicates")
    name = " & ".join(p.name for p in preds)
    if arity == 1:
        return StatePredicate(name, lambda s: all(p(s) for p in preds), name)
    return PairPredicate(name, lambda s, t: all(p(s, t) for p in preds), name)


def lift(p: StatePredicate, at: str = "both") -> PairPredicate:
    """View a state predicate as a pair predicate on one or both endpoints."""
    if at == "first":
        fn = lambda s, t: p(s)
    elif at == "second":
        fn = lambda s, t: p(t)
    else:
        fn = lambda s, t: p(s) and p(t)
    return PairPredicate(f"{p.name}@{at}", fn, p.formula)


@dataclass(frozen=True)
class Composed:
    """``pp ; qq``: holds on ``(s, u)`` via a supplied middle state ``m``."""

    first: PairPredicate
    second: PairPredicate
    arity = 3

    @property
    def name(self) -> str:
        return f"{self.first.name};{self.second.name}"

    def __call__(self, s, m, u) -> bool:
        return self.first(s, m) and self.second(m, u)


def compose(pp: PairPredicate, qq: PairPredicate) -> Composed:
    return Composed(pp, qq)


def implies(p, q, domain: Iterable) -> bool:
    """``p ==> q`` on every element of ``domain`` (states or state tuples)."""
    for item in domain:
        args = item if isinstance(item, tuple) and not hasattr(item, "_fields") else (item,)
        if p(*args) and not q(*args):
            return False
    return True


# -- catalog -----------------------------------------------------------------

def _stamps(s):
    return (s.lt0, s.lt1, s.d00, s.d01, s.d10, s.d11)


def _le(a, b):
    return a <= b


def loc_mono(loc: str) -> PairPredicate:
    return PairPredicate(
        f"LOC_MONO[{loc}]", lambda s, t: getattr(s, _LOC[loc]) <= getattr(t, _LOC[loc]),
        f"{loc}.tm <= {loc}'.tm",
    )


_LOC = {
    "LI[0]": "lt0", "LI[1]": "lt1",
    "D[0][0]": "d00", "D[0][1]": "d01", "D[1][0]": "d10", "D[1][1]": "d11",
}
LOCATIONS = tuple(_LOC)


def _build() -> dict:
    W = lambda *labels: (lambda s: s.alpha in labels)
    R = lambda *labels: (lambda s: s.beta in labels)
    notR = lambda *labels: (lambda s: s.beta not in labels)

    entries = [
        implication(
            "RACE_FREEDOM", lambda s: s.alpha == "a" and s.beta == "b",
            lambda s: s.wp != s.rp or s.wi != s.ri,
            "α=a ∧ β=b ⟹ (wp≠rp ∨ wi≠ri)"),
        implication(
            "RACE_FREEDOM_EX",
            lambda s: s.alpha in ("a", "a+1") and s.beta not in ("b-2", "b-1"),
            lambda s: s.wp != s.rp or s.wi != s.ri,
            "α∈{a,a+1} ∧ β∉{b-2,b-1} ⟹ (wp≠rp ∨ wi≠ri)"),
        implication(
            "COND1", W("a", "a+1"), lambda s: s.wi != s.li(s.wp),
            "α∈{a,a+1} ⟹ wi≠li[wp]"),
        implication(
            "COND2", notR("b-2"), lambda s: s.reading == s.rp,
            "β∉{b-2} ⟹ reading=rp"),
        implication(
            "COND3",
            lambda s: s.alpha in ("a-1", "a", "a+1") and s.beta not in ("b-2", "b-1"),
            lambda s: s.wp != s.reading or s.ri == s.li(s.rp),
            "α∈{a-1,a,a+1} ∧ β∉{b-2,b-1} ⟹ (wp≠reading ∨ ri=li[rp])"),
        StatePredicate(
            "STAMP_BOUND", lambda s: all(x <= s.wtm for x in _stamps(s)),
            "∀x∈{LI[p],D[p][i]}: x.tm ≤ wtm"),
        implication(
            "COND_A", R("b"), lambda s: s.rtm == s.d(s.rp, s.ri),
            "β=b ⟹ rtm = D[rp][ri].tm"),
        implication(
            "COND_B", R("b-2", "b-1"), lambda s: s.rtm <= s.lt(s.rp),
            "β∈{b-2,b-1} ⟹ rtm ≤ LI[rp].tm"),
        StatePredicate(
            "AUX_a", lambda s: all(s.lt(p) == s.d(p, s.li(p)) for p in (0, 1)),
            "∀p: LI[p].tm = D[p][LI[p].val].tm"),
        implication(
            "AUX_RI", notR("b-2", "b-1"), lambda s: s.ri == s.li(s.rp),
            "β∉{b-2,b-1} ⟹ ri = li[rp]"),
        implication(
            "AUX_WSTAMP", W("a+1"), lambda s: s.wtm == s.d(s.wp, s.wi),
            "α=a+1 ⟹ wtm = D[wp][wi].tm"),
        StatePredicate(
            "AUX_LPUB",
            lambda s: (s.alpha != "a+2" or s.lt(s.wp) == s.wtm)
            and s.lt0 <= s.wtm and s.lt1 <= s.wtm,
            "(α=a+2 ⟹ LI[wp].tm = wtm) ∧ ∀i: LI[i].tm ≤ wtm"),
        implication(
            "AUX_RTM_LE", notR("b-2", "b-1"), lambda s: s.rtm <= s.lt(s.rp),
            "β∉{b-2,b-1} ⟹ rtm ≤ LI[rp].tm"),
        implication(
            "AUX_RTM_LATEST", R("b-3"),
            lambda s: s.rtm <= s.lt(s.rp) <= s.lt(s.latest),
            "β=b-3 ⟹ rtm ≤ LI[rp].tm ≤ LI[l].tm"),
        StatePredicate(
            "AUX_e", lambda s: all(s.d(p, i) < s.wtm + 1 for p, i in PAIR),
            "∀p,i: D[p][i].tm < wtm+1"),
        implication(
            "AUX_f", R("b", "b+1"), lambda s: s.rtm == s.d(s.rp, s.ri),
            "β∈{b,b+1} ⟹ rtm = D[rp][ri].tm"),
        implication(
            "AUX_f_SWAPPED", R("b", "b+1"), lambda s: s.rtm == s.d(s.ri, s.rp),
            "β∈{b,b+1} ⟹ rtm = D[ri][rp].tm  (literal index order, kept as a documented experiment)"),
        StatePredicate(
            "AUX_LLB", lambda s: s.lt(s.latest) >= s.wtm - 1,
            "LI[l].tm ≥ wtm-1"),
        StatePredicate(
            "AUX_RPAIR",
            lambda s: (s.wp != s.rp or s.latest == s.rp) and (
                s.beta != "b-2" or s.reading == s.rp
                or (s.latest == s.rp and (s.alpha == "a-2" or s.wp == s.rp))),
            "(wp=rp ⟹ l=rp) ∧ (β=b-2 ∧ reading≠rp ⟹ l=rp ∧ (α≠a-2 ⟹ wp=rp))"),
        implication(
            "AUX_Y", R("b+1"), lambda s: s.y == s.rtm, "β=b+1 ⟹ y = rtm"),
        StatePredicate(
            "AUX_RPL", lambda s: s.lt(s.rp) <= s.lt(s.latest),
            "LI[rp].tm ≤ LI[l].tm"),
    ]

    entries += [loc_mono(loc) for loc in LOCATIONS]
    entries += [
        PairPredicate(
            "LOC_MONO", lambda s, t: all(a <= b for a, b in zip(_stamps(s), _stamps(t))),
            "∀x∈{LI[p],D[p][i]}: x.tm ≤ x'.tm"),
        PairPredicate("READER_MONO", lambda s, t: s.rtm <= t.rtm, "rtm ≤ rtm'"),
        PairPredicate(
            "AUX_1", lambda s, t: s.lt(s.latest) <= t.lt(t.latest),
            "LI[l].tm ≤ LI'[l'].tm"),
        pair_implication(
            "FRESH1", R("b+1"), R("b-2"), lambda s, t: s.rtm < t.wtm + 1,
            "β=b+1 ∧ β'=b-2 ⟹ rtm < wtm'+1"),
        pair_implication(
            "FRESH1_CORE", R("b+1"), lambda t: True, lambda s, t: s.rtm < t.wtm + 1,
            "β=b+1 ⟹ rtm < wtm'+1"),
        pair_implication(
            "FRESH1_REVERSED", R("b-2"), R("b+1"), lambda s, t: t.rtm < s.wtm + 1,
            "β=b-2 ∧ β'=b+1 ⟹ rtm' < wtm+1  (reversed orientation, kept as a documented experiment)"),
        pair_implication(
            "FRESH2", R("b-3"), R("b+1"), lambda s, t: t.rtm >= s.wtm - 1,
            "β=b-3 ∧ β'=b+1 ⟹ rtm' ≥ wtm-1"),
        pair_implication(
            "AUX_k", R("b-3"), R("b"), lambda s, t: t.rtm >= s.wtm - 1,
            "β=b-3 ∧ β'=b ⟹ rtm' ≥ wtm-1"),
        pair_implication(
            "AUX_RPUB", R("b-3"), R("b-2"), lambda s, t: t.lt(t.rp) >= s.lt(s.latest),
            "β=b-3 ∧ β'=b-2 ⟹ LI'[rp'].tm ≥ LI[l].tm"),
        pair_implication(
            "AUX_RREAD", R("b-1"), R("b"), lambda s, t: t.rtm >= s.lt(s.rp),
            "β=b-1 ∧ β'=b ⟹ rtm' ≥ LI[rp].tm"),
        pair_implication(
            "AUX_RREAD_CORE", R("b-1"), lambda t: True,
            lambda s, t: t.rtm >= s.lt(s.rp) or (t.beta == "b-1" and t.lt(t.rp) >= s.lt(s.rp)),
            "β=b-1 ⟹ (rtm' ≥ LI[rp].tm ∨ (β'=b-1 ∧ LI'[rp'].tm ≥ LI[rp].tm))"),
        pair_implication(
            "AUX_RP_LOC", R("b-2"), R("b-1"), lambda s, t: t.lt(t.rp) >= s.lt(s.rp),
            "β=b-2 ∧ β'=b-1 ⟹ LI'[rp'].tm ≥ LI[rp].tm"),
        pair_implication(
            "AUX_RP_LOC_CORE", R("b-2"), lambda t: True,
            lambda s, t: t.rtm >= s.lt(s.rp)
            or (t.beta in ("b-2", "b-1") and t.lt(t.rp) >= s.lt(s.rp)),
            "β=b-2 ⟹ (rtm' ≥ LI[rp].tm ∨ (β'∈{b-2,b-1} ∧ LI'[rp'].tm ≥ LI[rp].tm))"),
        pair_implication(
            "COHERENCE", R("b+1"), R("b+1"), lambda s, t: s.y <= t.y,
            "β=b+1 ∧ β'=b+1 ⟹ y ≤ y'"),
    ]
    names = [e.name for e in entries]
    assert len(names) == len(set(names))
    return {e.name: e for e in entries}


_CATALOG = _build()


def catalog() -> dict:
    """All named predicates, keyed by name (insertion order is stable)."""
    return dict(_CATALOG)


def get(name: str):
    return _CATALOG[name]
