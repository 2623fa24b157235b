from pathlib import Path

import pytest

from promisekit.services.language import TranslationMatrix, Vocabulary
from promisekit.services.promise_core import Body, Kind, Polarity, Promise

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def offer(promiser, promisee, *words, conditions=(), **kw):
    return Promise(
        promiser=promiser, promisee=promisee, polarity=Polarity.OFFER, body=Body.of(*words),
        conditions=tuple(Body.of(*c) if isinstance(c, tuple) else Body.of(c) for c in conditions), **kw,
    )


def accept(promiser, promisee, *words, **kw):
    return Promise(promiser=promiser, promisee=promisee, polarity=Polarity.ACCEPT, body=Body.of(*words), **kw)


def impose(promiser, promisee, *words):
    return Promise(promiser=promiser, promisee=promisee, polarity=Polarity.OFFER, body=Body.of(*words), kind=Kind.IMPOSITION)


@pytest.fixture
def samples_dir() -> Path:
    return SAMPLES


@pytest.fixture
def beta() -> Vocabulary:
    return Vocabulary(id="beta", symbols=("send", "receive", "seek", "forward", "back"))


@pytest.fixture
def beta_prime() -> Vocabulary:
    return Vocabulary(id="beta_prime", symbols=("put", "get", "append"))


@pytest.fixture
def to_signals() -> TranslationMatrix:
    """put/get/append expressed in send/receive/seek/forward/back."""
    return TranslationMatrix(
        from_vocab="beta_prime", to_vocab="beta",
        entries=((1, 0, 1), (0, 1, 0), (0, 0, 1), (0, 0, 1), (0, 0, 0)),
    )


@pytest.fixture
def to_commands() -> TranslationMatrix:
    return TranslationMatrix(
        from_vocab="beta", to_vocab="beta_prime",
        entries=((1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (1, 0, 1, 1, 0)),
    )
