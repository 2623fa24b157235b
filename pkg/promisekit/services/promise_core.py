# promisekit/services/promise_core.py
"""Agents, promises, bindings and structural analysis of a promise graph.

Every function here is pure: graphs are frozen values and analyses return new values or
lists of findings.
"""
import logging
import re
from collections import defaultdict
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, StringConstraints, field_serializer, model_validator
from typing_extensions import Annotated

from promisekit.errors import AutonomyViolation, SelfPromise, UnknownAgent
from promisekit.services import findings as fnd
from promisekit.services.body_expr import BodyExpr
from promisekit.services.findings import Finding

logger = logging.getLogger(__name__)

AgentId = Annotated[str, StringConstraints(min_length=1, pattern=r"^\S+$")]

# "B.send" in A's body says B is the one who sends
_ACTOR_WORD = re.compile(r"^(?P<actor>[^.\s]+)\.(?P<action>\S.*)$")


class Polarity(str, Enum):
    OFFER = "+"
    ACCEPT = "-"


class Kind(str, Enum):
    PROMISE = "promise"
    IMPOSITION = "imposition"


class Continuity(str, Enum):
    CONTINUOUS = "continuous"
    ONESHOT = "oneshot"


class PromiseType(str, Enum):
    SCALAR = "scalar"
    VECTOR = "vector"
    TENSOR = "tensor"


class Body(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    words: FrozenSet[str] = frozenset()
    attrs: Dict[str, float] = Field(default_factory=dict)

    @field_serializer("words")
    def _sorted_words(self, words: FrozenSet[str]) -> List[str]:
        return sorted(words)

    @classmethod
    def of(cls, *words: str, **attrs: float) -> "Body":
        return cls(words=frozenset(words), attrs=attrs)

    def covers(self, other: "Body") -> bool:
        return bool(other.words) and other.words <= self.words

    def overlap(self, other: "Body") -> "Body":
        return Body(words=self.words & other.words)

    def __str__(self) -> str:
        return "{" + ",".join(sorted(self.words)) + "}"


class Promise(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    promiser: AgentId
    promisee: AgentId
    polarity: Polarity
    body: Body
    conditions: Tuple[Body, ...] = ()
    kind: Kind = Kind.PROMISE
    continuity: Continuity = Continuity.CONTINUOUS
    referenced_agents: Tuple[AgentId, ...] = ()
    keep_prob: float = Field(1.0, ge=0.0, le=1.0)
    label: Optional[str] = None
    redundancy_group: Optional[str] = None

    @model_validator(mode="after")
    def _acceptance_is_never_imposed(self):
        if self.polarity is Polarity.ACCEPT and self.kind is Kind.IMPOSITION:
            raise ValueError("an acceptance (-) cannot be an imposition")
        return self

    @property
    def is_offer(self) -> bool:
        return self.polarity is Polarity.OFFER

    @property
    def is_conditional(self) -> bool:
        return bool(self.conditions)

    def __str__(self) -> str:
        text = f"{self.promiser} {self.polarity.value}{self.body}"
        if self.conditions:
            text += "|" + "&".join(str(c) for c in self.conditions)
        return f"{text} {self.promisee}"


class PromiseGraph(BaseModel):
    model_config = ConfigDict(frozen=True)

    agents: Tuple[AgentId, ...] = ()
    promises: Tuple[Promise, ...] = ()

    @model_validator(mode="after")
    def _references_resolve(self):
        if len(set(self.agents)) != len(self.agents):
            raise ValueError("agent names must be unique")
        known = set(self.agents)
        for i, p in enumerate(self.promises):
            missing = {p.promiser, p.promisee, *p.referenced_agents} - known
            if missing:
                raise ValueError(f"promise {i} references unknown agents {sorted(missing)}")
        return self

    def offers(self) -> List[Tuple[int, Promise]]:
        return [(i, p) for i, p in enumerate(self.promises) if p.is_offer]

    def acceptances(self) -> List[Tuple[int, Promise]]:
        return [(i, p) for i, p in enumerate(self.promises) if not p.is_offer]

    def appended(self, p: Promise) -> "PromiseGraph":
        """Append without the autonomy check; analyses report problems as findings instead."""
        return self.model_copy(update={"promises": self.promises + (p,)})


class Binding(BaseModel):
    model_config = ConfigDict(frozen=True)

    offer: int
    accept: int
    overlap: Body
    inert: bool


# --- construction ---

def add_promise(graph: PromiseGraph, p: Promise) -> PromiseGraph:
    """Return a new graph with `p` appended, enforcing the autonomy tenet."""
    known = set(graph.agents)
    for name in (p.promiser, p.promisee, *p.referenced_agents):
        if name not in known:
            raise UnknownAgent(f"agent {name!r} is not declared in the graph")
    if p.promiser == p.promisee:
        raise SelfPromise(f"{p.promiser} cannot promise itself")
    for word in sorted(p.body.words):
        m = _ACTOR_WORD.match(word)
        if m and m.group("actor") in known and m.group("actor") != p.promiser:
            raise AutonomyViolation(
                f"{p.promiser} cannot promise on behalf of {m.group('actor')} ({word!r})"
            )
    return graph.appended(p)


def promise_type(p: Promise) -> PromiseType:
    n = len(set(p.referenced_agents))
    if n == 0:
        return PromiseType.SCALAR
    return PromiseType.VECTOR if n == 1 else PromiseType.TENSOR


# --- bindings ---

def bind(graph: PromiseGraph) -> List[Binding]:
    """Pair every offer with the acceptances its promisee gives back.

    Pairs with a shared word always bind. An offer (or acceptance) that shares no word with
    any counterpart still binds to each of them, flagged inert. A disjoint pair whose two sides
    both bind elsewhere is left out.
    """
    offers: Dict[Tuple[str, str], List[int]] = defaultdict(list)
    accepts: Dict[Tuple[str, str], List[int]] = defaultdict(list)
    for i, p in enumerate(graph.promises):
        if p.is_offer:
            offers[(p.promiser, p.promisee)].append(i)
        else:
            accepts[(p.promisee, p.promiser)].append(i)

    bindings = []
    for pair, offer_ids in offers.items():
        accept_ids = accepts.get(pair, [])
        overlaps = {
            (o, a): graph.promises[o].body.overlap(graph.promises[a].body)
            for o in offer_ids
            for a in accept_ids
        }
        offer_live = {o: any(overlaps[o, a].words for a in accept_ids) for o in offer_ids}
        accept_live = {a: any(overlaps[o, a].words for o in offer_ids) for a in accept_ids}
        for (o, a), overlap in overlaps.items():
            if overlap.words or not offer_live[o] or not accept_live[a]:
                bindings.append(Binding(offer=o, accept=a, overlap=overlap, inert=not overlap.words))
    bindings.sort(key=lambda b: (b.offer, b.accept))
    logger.debug("bound %d pairs (%d inert)", len(bindings), sum(b.inert for b in bindings))
    return bindings


def binding_findings(graph: PromiseGraph, bindings: List[Binding]) -> List[Finding]:
    out = []
    for b in bindings:
        if b.inert:
            o, a = graph.promises[b.offer], graph.promises[b.accept]
            out.append(fnd.warn(
                "InertBinding", (b.offer, b.accept),
                f"{o.promiser} offers {o.body} but {a.promiser} accepts {a.body}: no overlap, no influence",
            ))
    bound = {b.offer for b in bindings}
    for i, p in graph.offers():
        if i not in bound:
            out.append(fnd.info("UnacceptedOffer", (i,), f"{p} has no acceptance; it has no effect downstream"))
    for i, a in graph.acceptances():
        offered: Set[str] = set()
        for o, p in graph.offers():
            if p.promiser == a.promisee and p.promisee == a.promiser:
                offered |= p.body.words
        dangling = a.body.words - offered
        if dangling:
            out.append(fnd.info(
                "UnmatchedAcceptance", (i,),
                f"{a.promiser} accepts {sorted(dangling)} from {a.promisee}, which nobody offers",
            ))
    return out


# --- conditions ---

def condition_sources(graph: PromiseGraph, index: int, condition: Body) -> List[int]:
    """Offers made to the promiser of `index` whose body covers `condition`."""
    p = graph.promises[index]
    return [
        i for i, q in graph.offers()
        if i != index
        and q.promisee == p.promiser
        and q.promiser != p.promiser
        and q.body.covers(condition)
    ]


def signalled_words(body: Body) -> Set[str]:
    out: Set[str] = set()
    for word in body.words:
        expr = BodyExpr.try_parse(word)
        if expr is not None:
            out |= expr.signalled()
    return out


def _accepts(graph: PromiseGraph, promiser: str, promisee: str, condition: Body) -> bool:
    return any(
        a.promiser == promiser and a.promisee == promisee and a.body.covers(condition)
        for _, a in graph.acceptances()
    )


def resolve_conditionals(graph: PromiseGraph) -> List[Finding]:
    """Check the three legs each conditional offer +b|c by A_i to A_j needs.

    (1) some A_k offers +c to A_i, (2) A_i accepts -c from A_k, (3) A_i signals -c to A_j.
    A nested body such as ``b(c)`` counts as signalling c. Imposition conditions are ignored.
    """
    out = []
    for i, p in graph.offers():
        if not p.conditions or p.kind is Kind.IMPOSITION:
            continue
        signalled = signalled_words(p.body)
        for c in p.conditions:
            sources = condition_sources(graph, i, c)
            if not sources:
                out.append(fnd.error(
                    "NoConditionSource", (i,),
                    f"{p.promiser} depends on {c} but no agent offers it to {p.promiser}",
                ))
                continue
            if not any(_accepts(graph, p.promiser, graph.promises[s].promiser, c) for s in sources):
                out.append(fnd.warn(
                    "MissingConditionAcceptance", (i, *sources),
                    f"leg 2: {p.promiser} never accepts {c} from its provider",
                ))
            if not (c.words <= signalled or _accepts(graph, p.promiser, p.promisee, c)):
                out.append(fnd.warn(
                    "MissingConditionSignal", (i,),
                    f"leg 3: {p.promiser} does not promise -{c} to {p.promisee}",
                ))
    return out


def condition_digraph(graph: PromiseGraph) -> nx.DiGraph:
    """Edge p -> q when offer p waits on offer q for one of its conditions."""
    dg = nx.DiGraph()
    for i, p in graph.offers():
        dg.add_node(i, conditional=p.is_conditional)
    for i, p in graph.offers():
        if p.kind is Kind.IMPOSITION:
            continue
        for c in p.conditions:
            for s in condition_sources(graph, i, c):
                dg.add_edge(i, s, condition=str(c))
    return dg


# --- impositions ---

def detect_impositions(graph: PromiseGraph) -> List[Finding]:
    out = []
    for i, p in enumerate(graph.promises):
        if p.kind is not Kind.IMPOSITION:
            continue
        absorbing = [
            j for j, a in graph.acceptances()
            if a.promiser == p.promisee and a.promisee == p.promiser and a.body.covers(p.body)
        ]
        if absorbing:
            out.append(fnd.info(
                "AbsorbedImposition", (i, absorbing[0]),
                f"{p.promisee} already accepts {p.body} from {p.promiser} as policy",
            ))
        else:
            out.append(fnd.warn(
                "UnilateralImposition", (i,),
                f"{p.promiser} imposes {p.body} on {p.promisee}, which accepts nothing covering it",
            ))
    return out


def undeclared_words(graph: PromiseGraph, lexicon: Mapping[str, Iterable[str]]) -> List[Finding]:
    """Body words outside the promiser's declared vocabulary, for agents that declare one."""
    out = []
    for i, p in enumerate(graph.promises):
        if p.promiser not in lexicon:
            continue
        stray = p.body.words - set(lexicon[p.promiser])
        if stray:
            out.append(fnd.warn(
                "UndeclaredWord", (i,),
                f"{p.promiser} uses {sorted(stray)} outside its vocabulary",
            ))
    return out
