# promisekit/routers/converge.py
from promisekit.services import findings as fnd
from promisekit.services import model_document
from promisekit.services.convergence import fixed_points, is_convergent, is_idempotent
from promisekit.services.model_document import ModelDocument
from promisekit.services.report import Report, write


def converge(doc: ModelDocument, name: str) -> Report:
    op = doc.operator(name)
    verdict = is_convergent(op)
    report = Report(command="converge")
    for q in op.space.states:
        steps = verdict.orbit_lengths[q]
        report.details.append(f"{q} -> {op.table[q]}" + (f" (fixed after {steps})" if steps is not None else " (cycles)"))

    if not verdict.convergent:
        stuck = sorted(q for q, n in verdict.orbit_lengths.items() if n is None)
        report.add([fnd.error("NonConvergentOperator", (), f"operator {name!r} never settles from {', '.join(stuck)}")])
    report.verdicts["convergent"] = "pass" if verdict.convergent else "fail"
    report.metrics["states"] = len(op.space)
    report.metrics["fixed_points"] = len(fixed_points(op))
    report.metrics["idempotent"] = is_idempotent(op)
    settled = [n for n in verdict.orbit_lengths.values() if n is not None]
    if settled:
        report.metrics["max_orbit"] = max(settled)
    return report


def cmd_converge(args) -> int:
    doc = model_document.load(args.model)
    return write(converge(doc, args.operator), args.format, args.out)


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("converge", parents=parents, help="Check an operator for convergence")
    p.add_argument("model", help="path to the model document (JSON)")
    p.add_argument("--operator", required=True)
    p.set_defaults(handler=cmd_converge)
