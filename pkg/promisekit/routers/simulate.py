# promisekit/routers/simulate.py
import logging
from pathlib import Path
from typing import Tuple

from promisekit.errors import NoChannels, PromiseKitError
from promisekit.services import findings as fnd
from promisekit.services import model_document
from promisekit.services.dynamics import (
    Event,
    EventLog,
    Mode,
    SimConfig,
    observed_spectrum,
    run,
    spectrum_entropy,
    total_kinetic_cost,
)
from promisekit.services.model_document import ModelDocument
from promisekit.services.report import Report, write
from promisekit.services.trust import INITIAL_POTENTIAL, TrustProfile, TrustState

logger = logging.getLogger(__name__)


def simulate(doc: ModelDocument, horizon: int, seed: int, mode: Mode = Mode.DETERMINISTIC) -> Tuple[EventLog, Report]:
    if not doc.channels:
        raise NoChannels("the model declares no channels to simulate")
    if horizon < 1:
        raise PromiseKitError(f"--horizon must be at least 1, got {horizon}")
    cfg = SimConfig(horizon=horizon, seed=seed, mode=mode)
    profiles = doc.profiles()
    log = run(doc.graph(), TrustState(), profiles, doc.channels, cfg)

    report = Report(command="simulate")
    report.metrics["horizon"] = horizon
    report.metrics["seed"] = seed
    total_cost = 0.0
    for ch in doc.channels:
        observer = doc.promises[ch.offer].promisee
        profile = profiles.get(observer) or TrustProfile(agent=observer)
        counts = log.counts(ch.id)
        last = log.last(ch.id)
        rates = log.rates[ch.id]
        cost = total_kinetic_cost(rates, profile)
        total_cost += cost

        report.metrics[f"{ch.id}.V_final"] = last.V if last else INITIAL_POTENTIAL
        report.metrics[f"{ch.id}.v_final"] = rates[-1]
        report.metrics[f"{ch.id}.emitted"] = counts[Event.EMITTED]
        report.metrics[f"{ch.id}.delivered"] = counts[Event.DELIVERED]
        report.metrics[f"{ch.id}.missed"] = counts[Event.MISSED]
        report.metrics[f"{ch.id}.kept"] = counts[Event.KEPT]
        report.metrics[f"{ch.id}.broken"] = counts[Event.BROKEN]
        report.metrics[f"{ch.id}.kinetic_cost"] = cost
        if counts[Event.DELIVERED]:
            report.metrics[f"{ch.id}.entropy"] = spectrum_entropy(observed_spectrum(log, ch.id))

        missed = counts[Event.MISSED]
        report.verdicts[f"fidelity.{ch.id}"] = "pass" if not missed else "fail"
        if missed:
            report.add([fnd.warn(
                "MissedEmissions", (ch.offer,),
                f"channel {ch.id}: {missed} of {counts[Event.EMITTED]} emissions went unobserved",
            )])
    report.metrics["kinetic_cost"] = total_cost
    return log, report


def cmd_simulate(args) -> int:
    doc = model_document.load(args.model)
    log, report = simulate(doc, args.horizon, args.seed, Mode(args.mode))
    Path(args.events).write_text(log.to_tsv(), encoding="utf-8")
    logger.info("%d events written to %s", len(log.records), args.events)
    return write(report, args.format, args.out)


def register(subparsers, parents) -> None:
    p = subparsers.add_parser("simulate", parents=parents, help="Run the sampling and trust simulation")
    p.add_argument("model", help="path to the model document (JSON)")
    p.add_argument("--horizon", type=int, required=True, help="number of ticks")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.DETERMINISTIC.value)
    p.add_argument("--events", default="events.tsv", help="where to write the event log (default: events.tsv)")
    p.set_defaults(handler=cmd_simulate)
