# promisekit/services/model_document.py
"""The model document: one self-contained UTF-8 JSON object describing a promise system.

This module is the only place that reads or writes model files; everything else works on the
validated `ModelDocument`.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from promisekit.errors import MissingTranslation, ParseError, UnresolvedReference, UnsupportedVersion
from promisekit.services.composition import ChainSpec
from promisekit.services.convergence import Operator, StateSpace
from promisekit.services.dynamics import ChannelSpec
from promisekit.services.language import TranslationMatrix, Vocabulary
from promisekit.services.promise_core import AgentId, Promise, PromiseGraph
from promisekit.services.trust import TrustProfile

logger = logging.getLogger(__name__)

CURRENT_VERSION = 1
SUPPORTED_VERSIONS = {1}


class AgentDecl(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: AgentId
    vocabulary: Optional[str] = None


class OperatorDecl(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    name: str = Field(min_length=1)
    states: Tuple[str, ...] = Field(min_length=1)
    table: Dict[str, str] = Field(alias="map")

    def operator(self) -> Operator:
        try:
            return Operator(name=self.name, space=StateSpace(states=self.states), table=self.table)
        except ValidationError as e:
            raise UnresolvedReference(f"operator {self.name!r}: {e.errors()[0]['msg']}")


class ModelDocument(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    version: int
    agents: Tuple[AgentDecl, ...] = ()
    vocabularies: Tuple[Vocabulary, ...] = ()
    matrices: Tuple[TranslationMatrix, ...] = ()
    promises: Tuple[Promise, ...] = ()
    trust: Tuple[TrustProfile, ...] = ()
    channels: Tuple[ChannelSpec, ...] = ()
    operators: Tuple[OperatorDecl, ...] = ()
    chains: Tuple[ChainSpec, ...] = ()

    # --- lookups ---

    def graph(self) -> PromiseGraph:
        return PromiseGraph(agents=tuple(a.name for a in self.agents), promises=self.promises)

    def vocabulary(self, vocab_id: str) -> Vocabulary:
        for v in self.vocabularies:
            if v.id == vocab_id:
                return v
        raise UnresolvedReference(f"no vocabulary {vocab_id!r}")

    def matrix(self, from_vocab: str, to_vocab: str) -> TranslationMatrix:
        for m in self.matrices:
            if (m.from_vocab, m.to_vocab) == (from_vocab, to_vocab):
                return m
        raise MissingTranslation(f"no translation matrix from {from_vocab!r} to {to_vocab!r}")

    def operator(self, name: str) -> Operator:
        for op in self.operators:
            if op.name == name:
                return op.operator()
        raise UnresolvedReference(f"no operator {name!r}")

    def profiles(self) -> Dict[str, TrustProfile]:
        return {t.agent: t for t in self.trust}

    def lexicon(self) -> Dict[str, Tuple[str, ...]]:
        vocabs = {v.id: v for v in self.vocabularies}
        return {a.name: vocabs[a.vocabulary].symbols for a in self.agents if a.vocabulary}


def _check_references(doc: ModelDocument) -> None:
    names = [a.name for a in doc.agents]
    if len(set(names)) != len(names):
        raise UnresolvedReference("agent names must be unique")
    agents = set(names)
    vocabs = {v.id: v for v in doc.vocabularies}
    if len(vocabs) != len(doc.vocabularies):
        raise UnresolvedReference("vocabulary ids must be unique")

    for a in doc.agents:
        if a.vocabulary and a.vocabulary not in vocabs:
            raise UnresolvedReference(f"agent {a.name!r} uses unknown vocabulary {a.vocabulary!r}")
    for m in doc.matrices:
        for vid in (m.from_vocab, m.to_vocab):
            if vid not in vocabs:
                raise UnresolvedReference(f"matrix refers to unknown vocabulary {vid!r}")
        m.check_vocabularies(vocabs[m.from_vocab], vocabs[m.to_vocab])
    for i, p in enumerate(doc.promises):
        for name in (p.promiser, p.promisee, *p.referenced_agents):
            if name not in agents:
                raise UnresolvedReference(f"promise {i} refers to unknown agent {name!r}")
    for t in doc.trust:
        if t.agent not in agents:
            raise UnresolvedReference(f"trust profile for unknown agent {t.agent!r}")
    for ch in doc.channels:
        if ch.offer >= len(doc.promises) or not doc.promises[ch.offer].is_offer:
            raise UnresolvedReference(f"channel {ch.id!r}: promise {ch.offer} is not an offer")
        if ch.accept is not None and (ch.accept >= len(doc.promises) or doc.promises[ch.accept].is_offer):
            raise UnresolvedReference(f"channel {ch.id!r}: promise {ch.accept} is not an acceptance")
    if len({op.name for op in doc.operators}) != len(doc.operators):
        raise UnresolvedReference("operator names must be unique")
    for op in doc.operators:
        op.operator()


def loads(text: str) -> ModelDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", e.lineno, e.colno)
    if not isinstance(raw, dict):
        raise ParseError("a model document must be a JSON object")
    if "version" not in raw:
        raise ParseError("missing 'version'")
    version = raw["version"]
    if not isinstance(version, int) or isinstance(version, bool):
        raise ParseError(f"'version' must be an integer, got {version!r}")
    if version not in SUPPORTED_VERSIONS:
        raise UnsupportedVersion(f"model version {version!r} is not supported (expected {CURRENT_VERSION})")
    try:
        doc = ModelDocument.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(x) for x in first["loc"])
        raise ParseError(f"{where}: {first['msg']}")
    _check_references(doc)
    return doc


def load(path: Union[str, Path]) -> ModelDocument:
    text = Path(path).read_text(encoding="utf-8")
    doc = loads(text)
    logger.debug("loaded %s: %d agents, %d promises", path, len(doc.agents), len(doc.promises))
    return doc


def dumps(doc: ModelDocument) -> str:
    data = doc.model_dump(mode="json", by_alias=True, exclude_defaults=True)
    data["version"] = doc.version
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def emit(doc: ModelDocument, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def from_graph(graph: PromiseGraph, chains: Sequence[ChainSpec] = ()) -> ModelDocument:
    return ModelDocument(
        version=CURRENT_VERSION,
        agents=tuple(AgentDecl(name=a) for a in graph.agents),
        promises=graph.promises,
        chains=tuple(chains),
    )
