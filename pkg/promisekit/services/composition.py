# promisekit/services/composition.py
"""Serial and parallel composition of promises, proxy delivery chains and their audits.

A chain with N proxies is written with agents ``Server``, ``Proxy1`` .. ``ProxyN`` and
``Client``; body expressions use the symbols ``S``, ``P1`` .. ``PN``. Every binding line of a
chain is an offer immediately followed by its matching acceptance.
"""
import logging
import math
from collections import Counter
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from promisekit.errors import NotAConditional
from promisekit.services import findings as fnd
from promisekit.services.body_expr import BodyExpr, Term, expression_size
from promisekit.services.findings import Finding
from promisekit.services.promise_core import (
    Body,
    Continuity,
    Polarity,
    Promise,
    PromiseGraph,
    bind,
    condition_digraph,
    condition_sources,
)

logger = logging.getLogger(__name__)

SERVER, CLIENT = "Server", "Client"


class ChainSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_proxies: int = Field(ge=0)
    with_direct_trust: bool = False
    minimal_trust: bool = False


class FragilityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    dependent: int
    classification: str  # "Redundant" | "Fragile"
    groups: Dict[str, Tuple[int, ...]]
    single_points: Tuple[int, ...]
    unsourced: Tuple[str, ...] = ()
    intermediaries: Tuple[str, ...] = ()
    serial: bool = False

    @property
    def fragile(self) -> bool:
        return self.classification == "Fragile"


# --- proxy chains ---

def _proxy(k: int) -> str:
    return f"Proxy{k}"


def _sym(k: int) -> str:
    return "S" if k == 0 else f"P{k}"


def _upstream(k: int) -> Term:
    """P_k(P_{k-1}(...P_1(S))): what proxy k passes on."""
    return Term.nested([_sym(j) for j in range(k, -1, -1)])


def _downstream(k: int, n: int) -> Term:
    """P_k(P_{k+1}(...(P_N))): what proxy k assures upstream."""
    return Term.nested([_sym(j) for j in range(k, n + 1)])


def _line(promiser: str, promisee: str, expr: BodyExpr, conditions: Sequence[Term], label: str) -> List[Promise]:
    body = Body.of(str(expr))
    return [
        Promise(
            promiser=promiser, promisee=promisee, polarity=Polarity.OFFER, body=body,
            conditions=tuple(Body.of(str(c)) for c in conditions), label=label,
        ),
        Promise(promiser=promisee, promisee=promiser, polarity=Polarity.ACCEPT, body=body, label=label),
    ]


def gen_proxy_chain(spec: ChainSpec) -> PromiseGraph:
    """Generate the fully assured delivery chain through `spec.n_proxies` intermediaries.

    Lines come in the order: end-to-end, then per proxy k its downstream handoff, upstream
    assurance and client delivery; with direct trust, one direct proxy->server line per proxy
    follows at the end.
    """
    n = spec.n_proxies
    agents = (SERVER, *(_proxy(k) for k in range(1, n + 1)), CLIENT)
    promises: List[Promise] = []

    end_to_end = [_downstream(0, n)]
    end_conditions = [_downstream(1, n)] if n else []
    if spec.with_direct_trust:
        direct = [Term(symbol=_sym(k)) for k in range(1, n + 1)]
        end_to_end += direct
        end_conditions += direct
    promises += _line(SERVER, CLIENT, BodyExpr(terms=tuple(end_to_end)), end_conditions, "end-to-end")

    for k in range(1, n + 1):
        upstream_agent = SERVER if k == 1 else _proxy(k - 1)
        handoff_conditions = [_upstream(k - 2)] if k > 1 else []
        promises += _line(
            upstream_agent, _proxy(k), BodyExpr.of(_upstream(k - 1)), handoff_conditions,
            f"handoff {upstream_agent}->{_proxy(k)}",
        )
        assurance_conditions = [_downstream(k + 1, n)] if k < n else []
        promises += _line(
            _proxy(k), upstream_agent, BodyExpr.of(_downstream(k, n)), assurance_conditions,
            f"assurance {_proxy(k)}->{upstream_agent}",
        )
        delivery = [_upstream(k)]
        delivery_conditions = [_upstream(k - 1)]
        if k < n:
            delivery.append(_downstream(k + 1, n))
            delivery_conditions.append(_downstream(k + 1, n))
        promises += _line(
            _proxy(k), CLIENT, BodyExpr(terms=tuple(delivery)), delivery_conditions,
            f"delivery {_proxy(k)}->{CLIENT}",
        )

    if spec.with_direct_trust:
        for k in range(1, n + 1):
            promises += _line(
                _proxy(k), SERVER, BodyExpr.of(Term(symbol=_sym(k))), [], f"direct {_proxy(k)}->{SERVER}",
            )
    return PromiseGraph(agents=agents, promises=tuple(promises))


def chain_lines(graph: PromiseGraph) -> List[Tuple[int, int]]:
    """(offer, acceptance) index pairs, each promise used in at most one line."""
    lines, used = [], set()
    for b in bind(graph):
        if b.inert or b.offer in used or b.accept in used:
            continue
        used.update((b.offer, b.accept))
        lines.append((b.offer, b.accept))
    return lines


def canonical_lines(graph: PromiseGraph) -> List[str]:
    """``Promiser ± body Promisee`` for every binding line, in promise order."""
    out = []
    for o, _ in chain_lines(graph):
        p = graph.promises[o]
        out.append(f"{p.promiser} ± {' '.join(sorted(p.body.words))} {p.promisee}")
    return out


def chain_cost(graph: PromiseGraph) -> int:
    """Total symbol count of all offered bodies (an acceptance repeats its offer's body)."""
    return sum(expression_size(w) for _, p in graph.offers() for w in p.body.words)


def growth_exponent(ns: Iterable[int], direct_trust: bool = False) -> float:
    """Slope of log chain_cost against log N, fitted by least squares."""
    ns = [n for n in ns if n > 0]
    if len(ns) < 2:
        raise ValueError("a growth fit needs at least two positive chain lengths")
    costs = [chain_cost(gen_proxy_chain(ChainSpec(n_proxies=n, with_direct_trust=direct_trust))) for n in ns]
    slope, _ = np.polyfit(np.log(ns), np.log(costs), 1)
    return float(slope)


# --- audits ---

def verify_continuity(graph: PromiseGraph) -> List[Finding]:
    out = []
    oneshot = {i for i, p in enumerate(graph.promises) if p.continuity is Continuity.ONESHOT}
    for i in sorted(oneshot):
        out.append(fnd.warn("OneShotPromise", (i,), f"{graph.promises[i]} is one-shot in a continuous system"))
    if not oneshot:
        return out
    for i, p in graph.offers():
        for c in p.conditions:
            broken = [s for s in condition_sources(graph, i, c) if s in oneshot]
            if broken:
                out.append(fnd.error(
                    "ConditionOnOneShot", (i, *broken),
                    f"{p.promiser} depends on {c} from a one-shot promise; it lapses after one delivery",
                ))
    return out


def _bootstrap_graph(graph: PromiseGraph) -> nx.DiGraph:
    """Condition digraph plus repayment edges closing loops through unconditional offers.

    An unconditional offer p gets an edge to every offer q made to p's promiser that waits on
    p, directly or transitively: q is how p's promiser gets repaid.
    """
    dg = condition_digraph(graph)
    loops = dg.copy()
    for p in dg.nodes:
        if dg.nodes[p]["conditional"]:
            continue
        for q in nx.ancestors(dg, p):
            if graph.promises[q].promisee == graph.promises[p].promiser:
                loops.add_edge(p, q, repayment=True)
    return loops


def detect_bootstrap_deadlock(graph: PromiseGraph) -> List[Finding]:
    """Flag every loop of conditional offers; report loops started by an unconditional offer."""
    out = []
    loops = _bootstrap_graph(graph)
    for cycle in nx.simple_cycles(loops):
        members = tuple(sorted(cycle))
        text = ", ".join(str(graph.promises[i]) for i in members)
        starters = [i for i in members if not graph.promises[i].is_conditional]
        if starters:
            out.append(fnd.info(
                "BootstrappedLoop", members,
                f"loop bootstrapped by {graph.promises[starters[0]].promiser} acting unconditionally: {text}",
            ))
        else:
            out.append(fnd.error(
                "BootstrapDeadlock", members,
                f"every offer in the loop waits on another; one agent must act unconditionally: {text}",
            ))
    return out


def _input_groups(
    graph: PromiseGraph, dependent: int, redundancy: Optional[Mapping[int, str]]
) -> Tuple[Dict[str, Tuple[int, ...]], Tuple[str, ...]]:
    p = graph.promises[dependent]
    groups: Dict[str, List[int]] = {}
    unsourced = []
    for c in p.conditions:
        sources = condition_sources(graph, dependent, c)
        if not sources:
            unsourced.append(str(c))
        for s in sources:
            if redundancy and s in redundancy:
                group = redundancy[s]
            else:
                group = graph.promises[s].redundancy_group or str(c)
            members = groups.setdefault(group, [])
            if s not in members:
                members.append(s)
    return {g: tuple(m) for g, m in groups.items()}, tuple(unsourced)


def fragility(graph: PromiseGraph, dependent: int, redundancy: Optional[Mapping[int, str]] = None) -> FragilityReport:
    """Classify a conditional offer as Redundant or Fragile in its inputs.

    Sources of the same condition form one group unless `redundancy` (input index -> group)
    or the promise's own ``redundancy_group`` says otherwise. Any group of one is a single point.
    """
    p = graph.promises[dependent]
    if not (p.is_offer and p.is_conditional):
        raise NotAConditional(f"promise {dependent} ({p}) is not a conditional offer")
    groups, unsourced = _input_groups(graph, dependent, redundancy)
    single = tuple(sorted(m[0] for m in groups.values() if len(m) == 1))

    # walk upstream through relaying offers
    intermediaries: List[str] = []
    serial = True
    seen: Set[int] = set()
    frontier = [dependent]
    while frontier:
        i = frontier.pop()
        if i in seen:
            continue
        seen.add(i)
        q = graph.promises[i]
        if not q.is_conditional:
            continue
        if q.promiser not in intermediaries:
            intermediaries.append(q.promiser)
        inputs = [s for c in q.conditions for s in condition_sources(graph, i, c)]
        if len(inputs) != 1 or len(q.conditions) != 1:
            serial = False
        frontier.extend(inputs)

    fragile = bool(single or unsourced)
    return FragilityReport(
        dependent=dependent,
        classification="Fragile" if fragile else "Redundant",
        groups=groups,
        single_points=single,
        unsourced=unsourced,
        intermediaries=tuple(intermediaries),
        serial=serial,
    )


def fragility_findings(graph: PromiseGraph) -> List[Finding]:
    out = []
    for i, p in graph.offers():
        if not p.is_conditional:
            continue
        report = fragility(graph, i)
        if not report.fragile:
            continue
        if report.serial:
            message = f"{p} relays through {', '.join(reversed(report.intermediaries))}; chief suspect when transmission fails"
        else:
            message = f"{p} has {len(report.single_points) + len(report.unsourced)} single-point inputs"
        out.append(fnd.info("Fragile", (i, *report.single_points), message))
    return out


def aggregate_keep_probability(
    graph: PromiseGraph, dependent: int, redundancy: Optional[Mapping[int, str]] = None
) -> float:
    """Chance the dependent promise is kept, given its inputs' keep probabilities.

    Groups combine as 1 - prod(1 - p); distinct groups multiply in series. Unsourced
    conditions can never be met.
    """
    def reliability(i: int, stack: Set[int]) -> float:
        q = graph.promises[i]
        if not q.is_conditional or i in stack:
            return q.keep_prob
        groups, unsourced = _input_groups(graph, i, redundancy)
        if unsourced:
            return 0.0
        total = q.keep_prob
        for members in groups.values():
            miss = math.prod(1.0 - reliability(m, stack | {i}) for m in members)
            total *= 1.0 - miss
        return total

    return reliability(dependent, set())


def _signature(p: Promise) -> Tuple:
    return (
        p.promiser,
        p.promisee,
        p.polarity.value,
        tuple(sorted(p.body.words)),
        tuple(sorted(tuple(sorted(c.words)) for c in p.conditions)),
        p.kind.value,
        p.continuity.value,
    )


def completeness_against_pattern(
    graph: PromiseGraph, spec: ChainSpec, minimal_trust: Optional[bool] = None
) -> List[Finding]:
    """Diff a graph against the chain `spec` generates; optionally require a complete trust graph."""
    expected = gen_proxy_chain(spec)
    have = Counter(_signature(p) for p in graph.promises)
    want = Counter(_signature(p) for p in expected.promises)
    out = []

    labels = {_signature(p): p.label for p in expected.promises}
    for sig, count in sorted((want - have).items()):
        promiser, promisee, polarity, words = sig[:4]
        out.append(fnd.error(
            "MissingPromise", (),
            f"missing {labels[sig]}: {promiser} {polarity}{{{','.join(words)}}} {promisee}"
            + (f" (x{count})" if count > 1 else ""),
        ))
    extra = have - want
    for i, p in enumerate(graph.promises):
        sig = _signature(p)
        if extra[sig] > 0:
            extra[sig] -= 1
            out.append(fnd.warn("ExtraPromise", (i,), f"{p} is not part of the {spec.n_proxies}-proxy pattern"))

    if spec.minimal_trust if minimal_trust is None else minimal_trust:
        bound = nx.Graph()
        bound.add_nodes_from(graph.agents)
        for b in bind(graph):
            if not b.inert:
                o = graph.promises[b.offer]
                bound.add_edge(o.promiser, o.promisee)
        for a, b in sorted(tuple(sorted(e)) for e in nx.non_edges(bound)):
            out.append(fnd.error(
                "IncompleteTrustGraph", (),
                f"{a} and {b} share no binding; minimal trust needs every pair to promise each other",
            ))
    return out
