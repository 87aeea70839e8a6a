"""The dependency-ordered proof script for race freedom, coherence and freshness.

Each node discharges one predicate with one rule (induction, induction
subject to earlier nodes, consequence, composition, or a reachable-set check)
and is then cross-checked against the reachable set of its model.  Supports
are only ever nodes that appear earlier in the script.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from . import checker
from .checker import CheckReport, ReachSet, UnverifiedSupport, explore
from .model import PLAIN, TIMESTAMPED, TransitionSystem
from .predicates import StatePredicate, get


def _at(label: str) -> StatePredicate:
    return StatePredicate(f"β={label}", lambda s: s.beta == label, f"β={label}")


class ProofContext:
    """Timestamped system plus its plain twin, with lazily explored reach sets."""

    def __init__(self, ts: TransitionSystem):
        if ts.variant != TIMESTAMPED:
            raise ValueError("the proof script runs on the timestamped system")
        self.ts = ts
        self.plain = TransitionSystem(PLAIN, ts.K, ts.mutation)
        self.writer_only = TransitionSystem(TIMESTAMPED, ts.K, ts.mutation, reader=False)
        self._reach: dict[int, ReachSet] = {}

    def system(self, model: str) -> TransitionSystem:
        return {"timestamped": self.ts, "plain": self.plain,
                "writer-only": self.writer_only}[model]

    def reach(self, model: str) -> ReachSet:
        ts = self.system(model)
        if id(ts) not in self._reach:
            self._reach[id(ts)] = explore(ts)
        return self._reach[id(ts)]


@dataclass
class Node:
    name: str
    model: str
    discharge: Callable[[ProofContext], CheckReport]
    uses: tuple[str, ...] = ()


@dataclass
class ProofRun:
    reports: list[CheckReport] = field(default_factory=list)
    failed: str | None = None

    @property
    def ok(self) -> bool:
        return self.failed is None and bool(self.reports)

    def render(self) -> str:
        lines = [r.render() for r in self.reports]
        lines.append("overall: " + ("pass" if self.ok else f"FAIL at {self.failed}"))
        return "\n".join(lines)

    def structured(self) -> str:
        return "\n".join(r.to_json() for r in self.reports)


# -- node constructors ------------------------------------------------------

def induction(name, model="timestamped") -> Node:
    return Node(name, model, lambda ctx: checker.check_inductive(get(name), ctx.system(model)))


def subject(name, supports, model="timestamped") -> Node:
    def run(ctx):
        return checker.check_inductive_subject_to(
            get(name), [get(s) for s in supports], ctx.system(model), ctx.reach(model))
    return Node(name, model, run, tuple(supports))


def induction_t(name, supports=(), base=(), prefix=()) -> Node:
    def run(ctx):
        return checker.check_inductive_transition(
            get(name), [get(s) for s in supports], ctx.ts, ctx.reach("timestamped"),
            base=[get(s) for s in base], prefix=[get(s) for s in prefix])
    return Node(name, "timestamped", run, (*supports, *base, *prefix))


def consequence(name, premises, model="timestamped") -> Node:
    def run(ctx):
        return checker.check_consequence(
            get(name), [get(s) for s in premises], ctx.system(model), ctx.reach(model))
    return Node(name, model, run, tuple(premises))


def composition(name, links, guards, assume=()) -> Node:
    def run(ctx):
        return checker.check_composition(
            get(name), [get(s) for s in links], [_at(g) for g in guards], ctx.ts,
            ctx.reach("timestamped"), assume=[get(s) for s in assume])
    return Node(name, "timestamped", run, (*links, *assume))


def reachable(name, models) -> Node:
    """Established by exhaustive checking on each of ``models``."""
    def run(ctx):
        pred = get(name)
        parts = []
        for model in models:
            report = checker.check_invariant(pred, ctx.reach(model))
            if not report.ok:
                report.detail = f"{model} model: {report.detail}"
                return report
            parts.append(model)
        return CheckReport(pred.name, "holds", pred.formula, "reachable states",
                           detail="on " + ", ".join(parts) + " models")
    return Node(name, models[0], run)


def script() -> list[Node]:
    """All proof nodes in dependency order."""
    return [
        # data-race freedom, on the control skeleton
        induction("COND1", PLAIN),
        induction("COND2", PLAIN),
        induction("COND3", PLAIN),
        consequence("RACE_FREEDOM_EX", ["COND1", "COND2", "COND3"], PLAIN),
        consequence("RACE_FREEDOM", ["RACE_FREEDOM_EX"], PLAIN),
        # location monotonicity
        induction("STAMP_BOUND"),
        induction_t("LOC_MONO", ["STAMP_BOUND"]),
        # coherence
        induction("AUX_WSTAMP"),
        subject("AUX_a", ["COND1", "AUX_WSTAMP"]),
        subject("COND_A", ["AUX_a", "RACE_FREEDOM_EX"]),
        induction("AUX_LPUB"),
        subject("AUX_RTM_LE", ["LOC_MONO", "COND_A"]),
        subject("AUX_RPAIR", ["COND2"], PLAIN),
        subject("AUX_RPL", ["AUX_RPAIR", "AUX_LPUB"]),
        consequence("AUX_RTM_LATEST", ["AUX_RTM_LE", "AUX_RPL"]),
        subject("COND_B", ["LOC_MONO", "AUX_RTM_LATEST"]),
        induction_t("READER_MONO", ["COND_A", "COND_B"]),
        induction("AUX_Y"),
        consequence("COHERENCE", ["READER_MONO", "AUX_Y"]),
        # freshness, lower bound of the window
        induction("AUX_e"),
        subject("AUX_f", ["RACE_FREEDOM_EX", "COND_A"]),
        induction_t("FRESH1_CORE", ["READER_MONO"], base=["AUX_e", "AUX_f"]),
        consequence("FRESH1", ["FRESH1_CORE"]),
        # freshness, upper bound of the window
        reachable("AUX_LLB", ["timestamped", "writer-only"]),
        induction_t("AUX_1", ["LOC_MONO", "AUX_LPUB"]),
        reachable("AUX_1", ["writer-only"]),
        induction_t("AUX_RPUB", ["LOC_MONO"], prefix=["AUX_1"]),
        induction_t("AUX_RP_LOC_CORE", ["LOC_MONO", "COND_A", "COND_B"]),
        consequence("AUX_RP_LOC", ["AUX_RP_LOC_CORE", "COND_B"]),
        induction_t("AUX_RREAD_CORE", ["LOC_MONO", "COND_A", "COND_B"]),
        consequence("AUX_RREAD", ["AUX_RREAD_CORE"]),
        composition("AUX_k", ["AUX_RPUB", "AUX_RP_LOC", "AUX_RREAD"], ["b-2", "b-1"],
                    assume=["AUX_LLB"]),
        composition("FRESH2", ["AUX_k", "READER_MONO"], ["b"]),
    ]


def run_proof_script(ts: TransitionSystem, stop_on_failure: bool = True) -> ProofRun:
    """Run every node of :func:`script` on ``ts``; one report per node."""
    ctx = ProofContext(ts)
    run = ProofRun()
    for node in script():
        report = _run_node(node, ctx)
        run.reports.append(report)
        if not report.ok and run.failed is None:
            run.failed = report.name
            if stop_on_failure:
                break
    return run


def _run_node(node: Node, ctx: ProofContext) -> CheckReport:
    try:
        report = node.discharge(ctx)
    except UnverifiedSupport as err:
        report = CheckReport(node.name, "fails", get(node.name).formula,
                             detail=f"rejected: {err}")
    pred = get(node.name)
    models = [node.model] if node.model != "writer-only" else []
    if node.model == PLAIN:
        models.append("timestamped")
    for model in models:
        shadow = checker.check_invariant(pred, ctx.reach(model))
        if shadow.ok:
            continue
        if report.ok:
            # a sound rule can never get here; surface it loudly if it does
            report.verdict = "fails"
            report.detail = f"rule passed but {model} reachable check fails"
        else:
            report.detail = (report.detail + "; " if report.detail else "") + \
                f"also violated on the {model} reachable set"
        report.counterexample = shadow.counterexample
        report.stats["trace_model"] = model
        break
    return report
