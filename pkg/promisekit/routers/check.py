# promisekit/routers/check.py
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Tuple

from promisekit import config
from promisekit.errors import PromiseError
from promisekit.services import findings as fnd
from promisekit.services import model_document
from promisekit.services.composition import (
    completeness_against_pattern,
    detect_bootstrap_deadlock,
    fragility_findings,
    verify_continuity,
)
from promisekit.services.convergence import is_convergent, is_idempotent
from promisekit.services.findings import Finding
from promisekit.services.language import classify, rank, unitarity_check
from promisekit.services.model_document import ModelDocument
from promisekit.services.promise_core import (
    PromiseGraph,
    add_promise,
    bind,
    binding_findings,
    detect_impositions,
    promise_type,
    resolve_conditionals,
    undeclared_words,
)
from promisekit.services.report import Report, write

logger = logging.getLogger(__name__)


def _structure(doc: ModelDocument) -> List[Finding]:
    """Replay every promise through add_promise; rejected ones become findings."""
    out = []
    graph = PromiseGraph(agents=tuple(a.name for a in doc.agents))
    for i, p in enumerate(doc.promises):
        try:
            graph = add_promise(graph, p)
        except PromiseError as e:
            out.append(fnd.error(e.code, (i,), e.detail))
            graph = graph.appended(p)
    return out


def _language(doc: ModelDocument) -> List[Finding]:
    out = []
    for m in doc.matrices:
        cls = classify(m)
        out.append(fnd.info(
            "TranslationClass", (),
            f"{m.from_vocab}->{m.to_vocab} is {cls.value} (rank {rank(m)} of {m.shape[0]}x{m.shape[1]})",
        ))
    return out


def _chains(doc: ModelDocument) -> List[Finding]:
    graph = doc.graph()
    out = []
    for spec in doc.chains:
        out += completeness_against_pattern(graph, spec)
    return out


def _operators(doc: ModelDocument) -> List[Finding]:
    out = []
    for decl in doc.operators:
        op = decl.operator()
        if not is_convergent(op).convergent:
            out.append(fnd.error("NonConvergentOperator", (), f"operator {op.name!r} has states that never settle"))
        elif not is_idempotent(op):
            out.append(fnd.info("NonIdempotentOperator", (), f"operator {op.name!r} converges but needs repeated application"))
    return out


def _checks(doc: ModelDocument) -> List[Tuple[str, Callable[[], List[Finding]]]]:
    graph = doc.graph()
    return [
        ("structure", lambda: _structure(doc)),
        ("bindings", lambda: binding_findings(graph, bind(graph))),
        ("conditionals", lambda: resolve_conditionals(graph)),
        ("impositions", lambda: detect_impositions(graph)),
        ("vocabulary", lambda: undeclared_words(graph, doc.lexicon())),
        ("language", lambda: _language(doc)),
        ("continuity", lambda: verify_continuity(graph)),
        ("bootstrap", lambda: detect_bootstrap_deadlock(graph)),
        ("fragility", lambda: fragility_findings(graph)),
        ("chains", lambda: _chains(doc)),
        ("operators", lambda: _operators(doc)),
    ]


def _metrics(doc: ModelDocument, report: Report) -> None:
    graph = doc.graph()
    bindings = bind(graph)
    report.metrics["agents"] = len(doc.agents)
    report.metrics["promises"] = len(doc.promises)
    report.metrics["bindings"] = len(bindings)
    report.metrics["bindings.inert"] = sum(b.inert for b in bindings)
    types = Counter(promise_type(p).value for p in doc.promises)
    for t in sorted(types):
        report.metrics[f"promise_type.{t}"] = types[t]
    for m in doc.matrices:
        key = f"{m.from_vocab}->{m.to_vocab}"
        report.metrics[f"rank.{key}"] = rank(m)
        reverse = next((r for r in doc.matrices if (r.from_vocab, r.to_vocab) == (m.to_vocab, m.from_vocab)), None)
        if reverse is not None:
            report.metrics[f"unitary.{key}->{m.from_vocab}"] = unitarity_check(m, reverse)


def check(doc: ModelDocument) -> Report:
    """Run every static analysis over `doc`. Checks run concurrently and merge in a fixed order."""
    report = Report(command="check")
    checks = _checks(doc)
    with ThreadPoolExecutor(max_workers=config.WORKERS) as executor:
        futures = [(name, executor.submit(fn)) for name, fn in checks]
        for name, future in futures:
            found = future.result()
            logger.debug("check %s: %d findings", name, len(found))
            report.add(found, verdict=name)
    _metrics(doc, report)
    return report


def cmd_check(args) -> int:
    doc = model_document.load(args.model)
    return write(check(doc), args.format, args.out)


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("check", parents=parents, help="Static analysis of a model document")
    p.add_argument("model", help="path to the model document (JSON)")
    p.set_defaults(handler=cmd_check)
