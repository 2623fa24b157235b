# promisekit/services/dynamics.py
"""Discrete-time simulation of promise keeping over sampled channels.

Each tick, the sender of a channel emits at its bandwidth B and the receiver samples at rate f
(fixed, or recomputed from its current trust potential). Emissions are delivered according to
the Nyquist fidelity of (B, f); deliveries are assessed Kept or Broken and fed back into trust.
"""
import logging
from collections import Counter
from enum import Enum
from typing import Dict, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from promisekit.errors import InertChannel, NoObservations
from promisekit.services.promise_core import Binding, PromiseGraph, bind
from promisekit.services.trust import (
    AssessmentRecord,
    Outcome,
    TrustProfile,
    TrustState,
    assess,
    kinetic_cost,
    sampling_rate,
)

logger = logging.getLogger(__name__)

TSV_HEADER = "tick\tbinding\tevent\tV\tv"


class Mode(str, Enum):
    DETERMINISTIC = "det"
    STOCHASTIC = "stoch"


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    horizon: int = Field(ge=1)
    seed: int = 0
    mode: Mode = Mode.DETERMINISTIC


class ChannelSpec(BaseModel):
    """A sampled channel over the binding of `offer` (and `accept`, when several exist)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(min_length=1)
    offer: int = Field(ge=0)
    accept: Optional[int] = Field(None, ge=0)
    bandwidth: float = Field(gt=0)
    sampling: Union[float, Literal["trust"]]

    @model_validator(mode="after")
    def _nonnegative_rate(self):
        if self.sampling != "trust" and self.sampling < 0:
            raise ValueError("sampling rate cannot be negative")
        return self

    @property
    def trust_driven(self) -> bool:
        return self.sampling == "trust"


class Fidelity(BaseModel):
    model_config = ConfigDict(frozen=True)

    faithful: bool
    p_miss: float


class Event(str, Enum):
    EMITTED = "Emitted"
    SAMPLED = "Sampled"
    DELIVERED = "Delivered"
    MISSED = "Missed"
    KEPT = "Kept"
    BROKEN = "Broken"


class EventRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    tick: int
    binding: str
    event: Event
    V: float
    v: float

    def tsv(self) -> str:
        return f"{self.tick}\t{self.binding}\t{self.event.value}\t{self.V:.9f}\t{self.v:.9f}"


class EventLog(BaseModel):
    records: List[EventRecord] = Field(default_factory=list)
    # sampling rate per tick, per channel; not part of the TSV export
    rates: Dict[str, List[float]] = Field(default_factory=dict)

    def to_tsv(self) -> str:
        return "\n".join([TSV_HEADER, *(r.tsv() for r in self.records)]) + "\n"

    def counts(self, binding: str) -> Counter:
        return Counter(r.event for r in self.records if r.binding == binding)

    def last(self, binding: str) -> Optional[EventRecord]:
        for r in reversed(self.records):
            if r.binding == binding:
                return r
        return None


class OutcomeSpectrum(BaseModel):
    model_config = ConfigDict(frozen=True)

    outcomes: Tuple[str, ...] = Field(min_length=1)
    p: Tuple[float, ...]

    @model_validator(mode="after")
    def _distribution(self):
        if len(self.outcomes) != len(self.p):
            raise ValueError("one probability per outcome")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ValueError("outcome labels must be distinct")
        if any(x < 0 for x in self.p) or abs(sum(self.p) - 1.0) > 1e-9:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        return self

    def probability(self, outcome: str) -> float:
        return dict(zip(self.outcomes, self.p)).get(outcome, 0.0)

    @classmethod
    def uniform(cls, outcomes: Sequence[str]) -> "OutcomeSpectrum":
        return cls(outcomes=tuple(outcomes), p=tuple(1.0 / len(outcomes) for _ in outcomes))


def nyquist_fidelity(bandwidth: float, rate: float) -> Fidelity:
    """Faithful only when sampling strictly faster than twice the bandwidth."""
    if rate > 2 * bandwidth:
        return Fidelity(faithful=True, p_miss=0.0)
    p_miss = min(1.0, max(0.0, 1.0 - rate / (2 * bandwidth)))
    return Fidelity(faithful=False, p_miss=p_miss)


def mutual_sampling_faithful(bandwidth_a: float, rate_a: float, bandwidth_b: float, rate_b: float) -> bool:
    """Whether A hears B and B hears A faithfully; each samples the other's emissions."""
    return nyquist_fidelity(bandwidth_b, rate_a).faithful and nyquist_fidelity(bandwidth_a, rate_b).faithful


def resolve_channel(channel: ChannelSpec, bindings: Sequence[Binding]) -> Binding:
    matches = [
        b for b in bindings
        if b.offer == channel.offer and (channel.accept is None or b.accept == channel.accept)
    ]
    live = [b for b in matches if not b.inert]
    if not live:
        raise InertChannel(f"channel {channel.id!r} does not ride on a live binding of promise {channel.offer}")
    return live[0]


class _ChannelState:
    def __init__(self, spec: ChannelSpec, binding: Binding, observer: str, profile: TrustProfile, keep_prob: float):
        self.spec = spec
        self.binding = binding
        self.observer = observer
        self.profile = profile
        self.keep_prob = keep_prob
        self.emit_credit = 0.0
        self.sample_credit = 0.0


def run(
    graph: PromiseGraph,
    trust: TrustState,
    policies: Mapping[str, TrustProfile],
    channels: Sequence[ChannelSpec],
    cfg: SimConfig,
) -> EventLog:
    """Simulate `cfg.horizon` ticks. The result depends only on the arguments, seed included."""
    bindings = bind(graph)
    rng = np.random.default_rng(cfg.seed)
    states = []
    for spec in channels:
        binding = resolve_channel(spec, bindings)
        offer = graph.promises[binding.offer]
        observer = offer.promisee
        profile = policies.get(observer) or TrustProfile(agent=observer)
        states.append(_ChannelState(spec, binding, observer, profile, offer.keep_prob))

    log = EventLog(rates={ch.spec.id: [] for ch in states})
    records = log.records
    for tick in range(cfg.horizon):
        for ch in states:
            key = (ch.observer, ch.binding.offer)
            V = trust.potential(*key)
            if ch.spec.trust_driven:
                f = sampling_rate(ch.profile.v_r, V, ch.profile.policy)
            else:
                f = float(ch.spec.sampling)
            fidelity = nyquist_fidelity(ch.spec.bandwidth, f)
            log.rates[ch.spec.id].append(f)

            ch.sample_credit += f
            n_samples = int(ch.sample_credit)
            ch.sample_credit -= n_samples
            for _ in range(n_samples):
                records.append(EventRecord(tick=tick, binding=ch.spec.id, event=Event.SAMPLED, V=V, v=f))

            ch.emit_credit += ch.spec.bandwidth
            n_emit = int(ch.emit_credit)
            ch.emit_credit -= n_emit
            for _ in range(n_emit):
                records.append(EventRecord(tick=tick, binding=ch.spec.id, event=Event.EMITTED, V=V, v=f))
                if cfg.mode is Mode.DETERMINISTIC:
                    delivered = fidelity.faithful
                else:
                    delivered = rng.random() < 1.0 - fidelity.p_miss
                if not delivered:
                    records.append(EventRecord(tick=tick, binding=ch.spec.id, event=Event.MISSED, V=V, v=f))
                    continue
                records.append(EventRecord(tick=tick, binding=ch.spec.id, event=Event.DELIVERED, V=V, v=f))
                outcome = Outcome.KEPT if rng.random() < ch.keep_prob else Outcome.BROKEN
                trust = assess(
                    trust,
                    AssessmentRecord(observer=ch.observer, promise=ch.binding.offer, outcome=outcome, tick=tick),
                    ch.profile.lam,
                )
                V = trust.potential(*key)
                records.append(EventRecord(tick=tick, binding=ch.spec.id, event=Event(outcome.value), V=V, v=f))

    for ch in states:
        counts = log.counts(ch.spec.id)
        logger.info(
            "channel %s: %d emitted, %d delivered, %d missed",
            ch.spec.id, counts[Event.EMITTED], counts[Event.DELIVERED], counts[Event.MISSED],
        )
    return log


def rate_trajectory(log: EventLog, binding: str) -> List[float]:
    return list(log.rates.get(binding, []))


def total_kinetic_cost(rates: Sequence[float], profile: TrustProfile) -> float:
    return float(sum(kinetic_cost(v, profile.policy) for v in rates))


def spectrum_entropy(s: OutcomeSpectrum) -> float:
    """Shannon entropy in bits; zero-probability outcomes contribute nothing."""
    p = np.asarray(s.p, dtype=float)
    p = p[p > 0]
    h = float(-(p * np.log2(p)).sum())
    return abs(h) if abs(h) < 1e-15 else h


def observed_spectrum(log: EventLog, binding: str) -> OutcomeSpectrum:
    counts = Counter()
    delivered = 0
    for r in log.records:
        if r.binding != binding:
            continue
        if r.event is Event.DELIVERED:
            delivered += 1
        elif r.event in (Event.KEPT, Event.BROKEN):
            counts[r.event.value] += 1
    if not delivered:
        raise NoObservations(f"no deliveries were observed on {binding!r}")
    total = sum(counts.values())
    labels = tuple(counts)
    return OutcomeSpectrum(outcomes=labels, p=tuple(counts[x] / total for x in labels))
