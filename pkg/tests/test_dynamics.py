import math

import numpy as np
import pytest

from promisekit.errors import InertChannel, NoObservations
from promisekit.services.dynamics import (
    TSV_HEADER,
    ChannelSpec,
    Event,
    EventLog,
    EventRecord,
    Mode,
    OutcomeSpectrum,
    SimConfig,
    mutual_sampling_faithful,
    nyquist_fidelity,
    observed_spectrum,
    rate_trajectory,
    run,
    spectrum_entropy,
    total_kinetic_cost,
)
from promisekit.services.promise_core import PromiseGraph
from promisekit.services.trust import TrustProfile, TrustState
from tests.conftest import accept, offer


def feed(keep_prob=1.0):
    return PromiseGraph(
        agents=("Source", "Sink"),
        promises=(offer("Source", "Sink", "data", keep_prob=keep_prob), accept("Sink", "Source", "data")),
    )


def simulate(graph, bandwidth, sampling, horizon, mode=Mode.DETERMINISTIC, seed=0, policies=None):
    channel = ChannelSpec(id="feed", offer=0, bandwidth=bandwidth, sampling=sampling)
    return run(graph, TrustState(), policies or {}, [channel], SimConfig(horizon=horizon, seed=seed, mode=mode))


class TestNyquist:
    def test_fidelity(self):
        assert nyquist_fidelity(1.0, 2.01).faithful
        assert not nyquist_fidelity(1.0, 2.0).faithful
        assert nyquist_fidelity(1.0, 1.0).p_miss == pytest.approx(0.5)
        assert nyquist_fidelity(1.0, 0.0).p_miss == 1.0

    def test_mutual_sampling_needs_both_directions(self):
        assert not mutual_sampling_faithful(1.0, 1.0, 1.0, 1.0)
        assert mutual_sampling_faithful(1.0, 2.5, 1.0, 2.5)
        assert not mutual_sampling_faithful(1.0, 2.5, 1.0, 1.5)

    def test_oversampled_channel_never_misses(self):
        log = simulate(feed(), bandwidth=1.0, sampling=2.5, horizon=10_000)
        counts = log.counts("feed")
        assert counts[Event.MISSED] == 0
        assert counts[Event.DELIVERED] == counts[Event.EMITTED] == 10_000

    def test_sampling_at_bandwidth_misses_half(self):
        log = simulate(feed(), bandwidth=1.0, sampling=1.0, horizon=100_000, mode=Mode.STOCHASTIC, seed=11)
        counts = log.counts("feed")
        assert counts[Event.EMITTED] == 100_000
        assert counts[Event.MISSED] / counts[Event.EMITTED] == pytest.approx(0.5, abs=0.02)


class TestRun:
    def test_same_seed_same_log(self):
        a = simulate(feed(0.7), 1.0, 1.5, 500, Mode.STOCHASTIC, seed=3)
        b = simulate(feed(0.7), 1.0, 1.5, 500, Mode.STOCHASTIC, seed=3)
        c = simulate(feed(0.7), 1.0, 1.5, 500, Mode.STOCHASTIC, seed=4)
        assert a.to_tsv() == b.to_tsv()
        assert a.to_tsv() != c.to_tsv()

    def test_tsv_layout(self):
        lines = simulate(feed(), 1.0, 3.0, 2).to_tsv().splitlines()
        assert lines[0] == TSV_HEADER
        tick, binding, event, V, v = lines[1].split("\t")
        assert (tick, binding, event, V, v) == ("0", "feed", "Sampled", "0.500000000", "3.000000000")

    def test_trusted_feed_needs_less_checking(self):
        log = simulate(feed(), bandwidth=0.25, sampling="trust", horizon=200)
        rates = rate_trajectory(log, "feed")
        assert rates[0] == pytest.approx(1.0)
        assert rates[-1] < rates[0]
        assert log.last("feed").V > 0.5

    def test_broken_promises_lower_trust(self):
        log = simulate(feed(0.0), 1.0, 3.0, 10)
        assert log.last("feed").event is Event.BROKEN
        assert log.last("feed").V < 0.01

    def test_profile_of_the_observer_is_used(self):
        policies = {"Sink": TrustProfile(agent="Sink", lam=1.0)}
        log = simulate(feed(), 1.0, 3.0, 1, policies=policies)
        assert log.last("feed").V == 1.0

    def test_inert_binding_cannot_carry_a_channel(self):
        g = PromiseGraph(agents=("A", "B"), promises=(offer("A", "B", "x"), accept("B", "A", "y")))
        with pytest.raises(InertChannel):
            run(g, TrustState(), {}, [ChannelSpec(id="c", offer=0, bandwidth=1, sampling=3)], SimConfig(horizon=1))

    def test_unaccepted_offer_cannot_carry_a_channel(self):
        g = PromiseGraph(agents=("A", "B"), promises=(offer("A", "B", "x"),))
        with pytest.raises(InertChannel):
            run(g, TrustState(), {}, [ChannelSpec(id="c", offer=0, bandwidth=1, sampling=3)], SimConfig(horizon=1))

    def test_kinetic_cost_of_the_trajectory(self):
        log = simulate(feed(), 1.0, 1.0, 4)
        profile = TrustProfile(agent="Sink", rho=2.0)
        assert total_kinetic_cost(rate_trajectory(log, "feed"), profile) == pytest.approx(4.0)

    def test_zero_rate_samples_nothing_and_learns_nothing(self):
        log = simulate(feed(), bandwidth=1.0, sampling=0.0, horizon=50)
        counts = log.counts("feed")
        assert counts[Event.SAMPLED] == 0
        assert counts[Event.DELIVERED] == 0
        assert all(r.V == 0.5 for r in log.records)

    def test_trust_driven_rate_never_rises_while_promises_hold(self):
        log = simulate(feed(), bandwidth=0.25, sampling="trust", horizon=300, mode=Mode.STOCHASTIC, seed=5)
        rates = rate_trajectory(log, "feed")
        assert all(later <= earlier for earlier, later in zip(rates, rates[1:]))

    def test_kept_promises_raise_trust_toward_one(self):
        policies = {"Sink": TrustProfile(agent="Sink", lam=0.1)}
        log = simulate(feed(), bandwidth=1.0, sampling=3.0, horizon=100, policies=policies)
        kept = [r.V for r in log.records if r.event is Event.KEPT]
        assert len(kept) == 100
        assert all(later >= earlier for earlier, later in zip(kept, kept[1:]))
        assert kept[-1] > 0.99


class TestEntropy:
    def test_uniform_is_log2_n(self):
        for n in range(1, 1025):
            s = OutcomeSpectrum.uniform([f"o{i}" for i in range(n)])
            assert spectrum_entropy(s) == pytest.approx(math.log2(n), abs=1e-12)

    @pytest.mark.parametrize("n", [2, 4, 8])
    def test_uniform_is_maximal(self, n):
        rng = np.random.default_rng(n)
        labels = [f"o{i}" for i in range(n)]
        bound = spectrum_entropy(OutcomeSpectrum.uniform(labels))
        for _ in range(1000):
            p = rng.dirichlet(np.ones(n))
            p = p / p.sum()
            assert spectrum_entropy(OutcomeSpectrum(outcomes=tuple(labels), p=tuple(float(x) for x in p))) <= bound + 1e-12

    def test_certain_outcome_has_no_entropy(self):
        assert spectrum_entropy(OutcomeSpectrum(outcomes=("Kept", "Broken"), p=(1.0, 0.0))) == 0.0

    def test_spectrum_must_be_a_distribution(self):
        with pytest.raises(ValueError):
            OutcomeSpectrum(outcomes=("a", "b"), p=(0.7, 0.7))

    def test_observed_spectrum(self):
        s = observed_spectrum(simulate(feed(), 1.0, 3.0, 20), "feed")
        assert s.probability("Kept") == 1.0
        assert spectrum_entropy(s) == 0.0

    def test_nothing_delivered(self):
        with pytest.raises(NoObservations):
            observed_spectrum(simulate(feed(), 1.0, 0.0, 20), "feed")

    def test_coin_flip_promise_carries_one_bit(self):
        log = simulate(feed(0.5), bandwidth=1.0, sampling=3.0, horizon=10_000, mode=Mode.STOCHASTIC, seed=17)
        assert spectrum_entropy(observed_spectrum(log, "feed")) == pytest.approx(1.0, abs=0.05)

    def test_seven_kept_three_broken(self):
        log = EventLog()
        for tick, event in enumerate([Event.KEPT] * 7 + [Event.BROKEN] * 3):
            log.records.append(EventRecord(tick=tick, binding="feed", event=Event.DELIVERED, V=0.5, v=3.0))
            log.records.append(EventRecord(tick=tick, binding="feed", event=event, V=0.5, v=3.0))
        s = observed_spectrum(log, "feed")
        assert (s.probability("Kept"), s.probability("Broken")) == (pytest.approx(0.7), pytest.approx(0.3))
        expected = -(0.7 * math.log2(0.7) + 0.3 * math.log2(0.3))
        assert spectrum_entropy(s) == pytest.approx(expected)
