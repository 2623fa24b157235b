# promisekit/routers/proxy.py
import logging
from typing import List, Optional, Tuple

from promisekit.errors import PromiseKitError
from promisekit.services import model_document
from promisekit.services.composition import (
    ChainSpec,
    canonical_lines,
    chain_cost,
    chain_lines,
    completeness_against_pattern,
    gen_proxy_chain,
    growth_exponent,
    verify_continuity,
)
from promisekit.services.model_document import ModelDocument
from promisekit.services.report import Report, write

logger = logging.getLogger(__name__)


def parse_range(text: str) -> List[int]:
    """"4..64" -> [4, 8, 16, 32, 64]"""
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError:
        raise PromiseKitError(f"--range expects A..B, got {text!r}")
    if lo < 1 or hi < lo:
        raise PromiseKitError(f"--range needs 1 <= A <= B, got {text!r}")
    ns = []
    n = lo
    while n <= hi:
        ns.append(n)
        n *= 2
    if len(ns) < 2:
        raise PromiseKitError(f"--range {text!r} holds fewer than two chain lengths")
    return ns


def proxy(n: int, direct_trust: bool = False, ns: Optional[List[int]] = None) -> Tuple[ModelDocument, Report]:
    if n < 0:
        raise PromiseKitError(f"--n must be >= 0, got {n}")
    spec = ChainSpec(n_proxies=n, with_direct_trust=direct_trust)
    graph = gen_proxy_chain(spec)
    doc = model_document.from_graph(graph, [spec])

    report = Report(command="proxy")
    report.add(verify_continuity(graph), verdict="continuity")
    report.add(completeness_against_pattern(graph, spec), verdict="pattern")
    report.details = canonical_lines(graph)
    report.metrics["n_proxies"] = n
    report.metrics["lines"] = len(chain_lines(graph))
    report.metrics["promises"] = len(graph.promises)
    report.metrics["chain_cost"] = chain_cost(graph)
    report.metrics["chain_cost.unit"] = "symbols in offered bodies, not promises"
    if ns:
        for k in ns:
            cost = chain_cost(gen_proxy_chain(ChainSpec(n_proxies=k, with_direct_trust=direct_trust)))
            report.metrics[f"chain_cost.n{k}"] = cost
        report.metrics["growth_exponent"] = growth_exponent(ns, direct_trust)
    return doc, report


def cmd_proxy(args) -> int:
    ns = parse_range(args.range) if args.range else None
    doc, report = proxy(args.n, args.direct_trust, ns)
    model_document.emit(doc, args.emit)
    logger.info("chain written to %s", args.emit)
    return write(report, args.format, args.out)


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("proxy", parents=parents, help="Generate and audit a proxy delivery chain")
    p.add_argument("--n", type=int, required=True, help="number of proxies")
    p.add_argument("--range", help="fit cost growth over A..B (doubling)")
    p.add_argument("--direct-trust", action="store_true", help="add direct proxy->server promises")
    p.add_argument("--emit", default="chain.json", help="where to write the model document (default: chain.json)")
    p.set_defaults(handler=cmd_proxy)
