# promisekit/routers/translate.py
from promisekit.services import model_document
from promisekit.services.language import classify, rank, round_trip, translate, unitarity_check
from promisekit.services.model_document import ModelDocument
from promisekit.services.report import Report, write


def translate_words(doc: ModelDocument, from_vocab: str, to_vocab: str, words) -> Report:
    L = doc.matrix(from_vocab, to_vocab)
    source, target = doc.vocabulary(from_vocab), doc.vocabulary(to_vocab)
    L.check_vocabularies(source, target)
    v = source.vector(words)
    out = translate(v, L)

    report = Report(command="translate")
    report.details = [f"{from_vocab}: {' '.join(words)}", f"{to_vocab}: {' '.join(target.words(out))}"]
    report.metrics["class"] = classify(L).value
    report.metrics["rank"] = rank(L)
    report.metrics["coeffs"] = " ".join(str(c) for c in out.coeffs)
    reverse = next((m for m in doc.matrices if (m.from_vocab, m.to_vocab) == (to_vocab, from_vocab)), None)
    if reverse is not None:
        back = round_trip(v, L, reverse)
        report.details.append(f"{from_vocab} (round trip): {' '.join(source.words(back))}")
        report.verdicts["unitary"] = "pass" if unitarity_check(L, reverse) else "fail"
    return report


def cmd_translate(args) -> int:
    doc = model_document.load(args.model)
    return write(translate_words(doc, args.from_vocab, args.to_vocab, args.body), args.format, args.out)


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("translate", parents=parents, help="Translate a body between vocabularies")
    p.add_argument("model", help="path to the model document (JSON)")
    p.add_argument("--from", dest="from_vocab", required=True)
    p.add_argument("--to", dest="to_vocab", required=True)
    p.add_argument("--body", nargs="+", required=True, metavar="WORD")
    p.set_defaults(handler=cmd_translate)
