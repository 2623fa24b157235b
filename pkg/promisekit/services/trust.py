# promisekit/services/trust.py
"""Trustworthiness potentials and the kinetic sampling law.

An observer holds a potential V in [0, 1] per promise it watches, updated as an exponential
moving average of kept (1) and broken (0) outcomes from a 50-50 prior. The rate at which it
keeps checking follows v = sqrt(2 (V_R - V_S - risk) / rho), and is zero once the risk it
accepts swallows the potential gap.
"""
import math
from enum import Enum
from typing import Dict, Tuple

from pydantic import BaseModel, ConfigDict, Field

from promisekit import config
from promisekit.errors import TrustError
from promisekit.services.promise_core import AgentId

INITIAL_POTENTIAL = 0.5

StreamKey = Tuple[str, int]


class Outcome(str, Enum):
    KEPT = "Kept"
    BROKEN = "Broken"


class AssessmentRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    observer: AgentId
    promise: int = Field(ge=0)
    outcome: Outcome
    tick: int = Field(ge=0)


class TrustState(BaseModel):
    model_config = ConfigDict(frozen=True)

    V: Dict[StreamKey, float] = Field(default_factory=dict)
    last_tick: Dict[StreamKey, int] = Field(default_factory=dict)

    def potential(self, observer: str, promise: int) -> float:
        return self.V.get((observer, promise), INITIAL_POTENTIAL)


class RiskPolicy(BaseModel):
    model_config = ConfigDict(frozen=True)

    rho: float = Field(1.0, gt=0)
    risk: float = Field(0.0, ge=0)


class TrustProfile(BaseModel):
    """Per-agent trust configuration as declared in a model document."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    agent: AgentId
    rho: float = Field(1.0, gt=0)
    risk: float = Field(0.0, ge=0)
    lam: float = Field(default_factory=lambda: config.DEFAULT_LAMBDA, gt=0, le=1)
    v_r: float = Field(1.0, ge=0)

    @property
    def policy(self) -> RiskPolicy:
        return RiskPolicy(rho=self.rho, risk=self.risk)


def assess(state: TrustState, rec: AssessmentRecord, lam: float) -> TrustState:
    if not 0 < lam <= 1:
        raise TrustError(f"smoothing must lie in (0, 1], got {lam}")
    key = (rec.observer, rec.promise)
    previous_tick = state.last_tick.get(key)
    if previous_tick is not None and rec.tick < previous_tick:
        raise TrustError(f"tick {rec.tick} precedes tick {previous_tick} for stream {key}")
    target = 1.0 if rec.outcome is Outcome.KEPT else 0.0
    updated = (1 - lam) * state.potential(*key) + lam * target
    return TrustState(
        V={**state.V, key: updated},
        last_tick={**state.last_tick, key: rec.tick},
    )


def sampling_rate(v_r: float, v_s: float, policy: RiskPolicy) -> float:
    """Samples per tick an observer invests in checking a promise."""
    gap = v_r - v_s - policy.risk
    if gap <= 0:
        return 0.0
    return math.sqrt(2 * gap / policy.rho)


def kinetic_cost(v: float, policy: RiskPolicy) -> float:
    if v < 0:
        raise TrustError(f"sampling rate cannot be negative, got {v}")
    return 0.5 * policy.rho * v * v
