# promisekit/services/convergence.py
"""Fixed-point verification of promise operators on finite state spaces.

An operator is an explicit transition table, so idempotence and convergence are decided by
exhaustive iteration over the state space.
"""
import logging
from typing import Dict, FrozenSet, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from promisekit import config
from promisekit.errors import ConvergenceError, StateSpaceTooLarge, UnknownState

logger = logging.getLogger(__name__)


class StateSpace(BaseModel):
    model_config = ConfigDict(frozen=True)

    states: Tuple[str, ...] = Field(min_length=1)
    cap: int = Field(default_factory=lambda: config.STATE_CAP, ge=1)

    @model_validator(mode="after")
    def _distinct_and_bounded(self):
        if len(set(self.states)) != len(self.states):
            raise ValueError("state labels must be distinct")
        if len(self.states) > self.cap:
            raise StateSpaceTooLarge(f"{len(self.states)} states exceed the cap of {self.cap}")
        return self

    def __len__(self) -> int:
        return len(self.states)


class Operator(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    space: StateSpace
    table: Dict[str, str]

    @model_validator(mode="after")
    def _total(self):
        states = set(self.space.states)
        if set(self.table) != states:
            raise ValueError(f"operator {self.name!r} must map every state exactly once")
        stray = set(self.table.values()) - states
        if stray:
            raise ValueError(f"operator {self.name!r} maps into unknown states {sorted(stray)}")
        return self

    @classmethod
    def from_table(cls, name: str, table: Dict[str, str], states: Optional[Tuple[str, ...]] = None) -> "Operator":
        return cls(name=name, space=StateSpace(states=states or tuple(table)), table=table)


class ConvergenceVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    convergent: bool
    # steps until a fixed point is reached; None where the orbit never settles
    orbit_lengths: Dict[str, Optional[int]]


def apply(op: Operator, q: str) -> str:
    try:
        return op.table[q]
    except KeyError:
        raise UnknownState(f"{q!r} is not a state of operator {op.name!r}")


def is_idempotent(op: Operator) -> bool:
    return all(apply(op, apply(op, q)) == apply(op, q) for q in op.space.states)


def is_convergent(op: Operator, max_iter: Optional[int] = None) -> ConvergenceVerdict:
    n = len(op.space)
    max_iter = n if max_iter is None else max_iter
    if max_iter < n:
        raise ConvergenceError(f"max_iter={max_iter} cannot decide convergence on {n} states")
    lengths: Dict[str, Optional[int]] = {}
    for q in op.space.states:
        x, steps = q, 0
        while op.table[x] != x and steps < max_iter:
            x = op.table[x]
            steps += 1
        lengths[q] = steps if op.table[x] == x else None
    convergent = all(v is not None for v in lengths.values())
    logger.debug("operator %s: convergent=%s", op.name, convergent)
    return ConvergenceVerdict(convergent=convergent, orbit_lengths=lengths)


def fixed_points(op: Operator) -> FrozenSet[str]:
    return frozenset(q for q in op.space.states if op.table[q] == q)


def compose(outer: Operator, inner: Operator) -> Operator:
    """outer after inner."""
    if outer.space.states != inner.space.states:
        raise ConvergenceError("operators act on different state spaces")
    table = {q: outer.table[inner.table[q]] for q in inner.space.states}
    return Operator(name=f"{outer.name}.{inner.name}", space=inner.space, table=table)


def commutes(a: Operator, b: Operator) -> bool:
    return compose(a, b).table == compose(b, a).table
