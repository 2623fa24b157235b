import pytest

from promisekit.errors import NotAConditional
from promisekit.services import model_document
from promisekit.services.composition import (
    ChainSpec,
    aggregate_keep_probability,
    canonical_lines,
    chain_cost,
    chain_lines,
    completeness_against_pattern,
    detect_bootstrap_deadlock,
    fragility,
    fragility_findings,
    gen_proxy_chain,
    growth_exponent,
    verify_continuity,
)
from promisekit.services.findings import Severity
from promisekit.services.promise_core import Continuity, PromiseGraph, resolve_conditionals
from tests.conftest import accept, offer

THREE_PROXY_LINES = [
    "Server ± S(P1(P2(P3))) Client",
    "Server ± S Proxy1",
    "Proxy1 ± P1(P2(P3)) Server",
    "Proxy1 ± P1(S) & (P2(P3)) Client",
    "Proxy1 ± P1(S) Proxy2",
    "Proxy2 ± P2(P3) Proxy1",
    "Proxy2 ± P2(P1(S)) & (P3) Client",
    "Proxy2 ± P2(P1(S)) Proxy3",
    "Proxy3 ± P3 Proxy2",
    "Proxy3 ± P3(P2(P1(S))) Client",
]


def chain(n, direct_trust=False):
    return gen_proxy_chain(ChainSpec(n_proxies=n, with_direct_trust=direct_trust))


class TestProxyChain:
    def test_three_proxies(self):
        assert canonical_lines(chain(3)) == THREE_PROXY_LINES

    def test_single_proxy_roles(self):
        lines = canonical_lines(chain(1))
        assert lines == [
            "Server ± S(P1) Client",
            "Server ± S Proxy1",
            "Proxy1 ± P1 Server",
            "Proxy1 ± P1(S) Client",
        ]

    def test_no_proxies_is_a_direct_delivery(self):
        g = chain(0)
        assert canonical_lines(g) == ["Server ± S Client"]
        assert chain_cost(g) == 1

    @pytest.mark.parametrize("n", range(0, 65))
    def test_line_count(self, n):
        assert len(chain_lines(chain(n))) == 3 * n + 1

    def test_direct_trust_adds_a_line_per_proxy(self):
        g = chain(3, direct_trust=True)
        lines = canonical_lines(g)
        assert len(lines) == 3 * 3 + 1 + 3
        assert lines[0] == "Server ± S(P1(P2(P3))) & (P1) & (P2) & (P3) Client"
        assert lines[-3:] == ["Proxy1 ± P1 Server", "Proxy2 ± P2 Server", "Proxy3 ± P3 Server"]

    def test_every_conditional_is_fully_assured(self):
        for n in range(0, 6):
            for direct in (False, True):
                assert resolve_conditionals(chain(n, direct)) == []

    def test_cost(self):
        assert chain_cost(chain(3)) == 28
        assert [chain_cost(chain(n)) for n in range(4)] == [(n + 1) * (2 * n + 1) for n in range(4)]

    def test_cost_grows_quadratically(self):
        assert growth_exponent([4, 8, 16, 32, 64]) == pytest.approx(2.0, abs=0.15)

    def test_growth_fit_needs_two_points(self):
        with pytest.raises(ValueError):
            growth_exponent([8])


class TestContinuity:
    @pytest.mark.parametrize("n", range(0, 9))
    def test_generated_chains_pass(self, n):
        assert verify_continuity(chain(n)) == []
        assert verify_continuity(chain(n, direct_trust=True)) == []

    def test_condition_on_a_one_shot_promise(self):
        g = PromiseGraph(
            agents=("A", "B", "C"),
            promises=(
                offer("A", "C", "b", conditions=["c"]),
                offer("B", "A", "c", continuity=Continuity.ONESHOT),
            ),
        )
        found = verify_continuity(g)
        assert [f.code for f in found] == ["OneShotPromise", "ConditionOnOneShot"]
        assert found[1].severity is Severity.ERROR
        assert found[1].promises == (0, 1)


class TestBootstrap:
    def test_remuneration_cycle_deadlocks(self, samples_dir):
        g = model_document.load(samples_dir / "remuneration.json").graph()
        [f] = detect_bootstrap_deadlock(g)
        assert (f.code, f.severity, f.promises) == ("BootstrapDeadlock", Severity.ERROR, (0, 2))

    @pytest.mark.parametrize("unconditional", [0, 2])
    def test_either_side_acting_first_clears_it(self, samples_dir, unconditional):
        g = model_document.load(samples_dir / "remuneration.json").graph()
        promises = list(g.promises)
        promises[unconditional] = promises[unconditional].model_copy(update={"conditions": ()})
        found = detect_bootstrap_deadlock(g.model_copy(update={"promises": tuple(promises)}))
        assert [f.code for f in found] == ["BootstrappedLoop"]

    @pytest.mark.parametrize("n", range(0, 6))
    def test_chains_never_deadlock(self, n):
        assert detect_bootstrap_deadlock(chain(n)) == []


def _fan_in(*, redundant):
    second = offer("C", "A", "c", keep_prob=0.5) if redundant else offer("C", "A", "d", keep_prob=0.5)
    conditions = ["c"] if redundant else ["c", "d"]
    return PromiseGraph(
        agents=("A", "B", "C", "D"),
        promises=(offer("A", "D", "b", conditions=conditions), offer("B", "A", "c", keep_prob=0.5), second),
    )


class TestFragility:
    def test_two_providers_of_one_input_are_redundant(self):
        report = fragility(_fan_in(redundant=True), 0)
        assert report.classification == "Redundant"
        assert report.single_points == ()

    def test_two_inputs_in_series_are_fragile(self):
        report = fragility(_fan_in(redundant=False), 0)
        assert report.fragile
        assert report.single_points == (1, 2)

    def test_declared_groups_override(self):
        report = fragility(_fan_in(redundant=True), 0, redundancy={1: "left", 2: "right"})
        assert report.fragile

    def test_unsourced_condition_is_fragile(self):
        g = PromiseGraph(agents=("A", "D"), promises=(offer("A", "D", "b", conditions=["c"]),))
        assert fragility(g, 0).unsourced == ("{c}",)

    def test_unconditional_promise(self):
        with pytest.raises(NotAConditional):
            fragility(_fan_in(redundant=True), 1)

    def test_relay_chain_names_the_intermediaries(self):
        found = fragility_findings(chain(2))
        assert found and all(f.severity is Severity.INFO for f in found)
        assert any("chief suspect" in f.message for f in found)

    def test_keep_probability(self):
        assert aggregate_keep_probability(_fan_in(redundant=True), 0) == pytest.approx(0.75)
        assert aggregate_keep_probability(_fan_in(redundant=False), 0) == pytest.approx(0.25)


class TestCompleteness:
    def test_generated_chain_matches(self):
        spec = ChainSpec(n_proxies=3)
        assert completeness_against_pattern(gen_proxy_chain(spec), spec) == []

    def test_missing_line(self):
        spec = ChainSpec(n_proxies=2)
        g = gen_proxy_chain(spec)
        pruned = g.model_copy(update={"promises": g.promises[:-2]})
        found = completeness_against_pattern(pruned, spec)
        assert [f.code for f in found] == ["MissingPromise", "MissingPromise"]
        assert "delivery Proxy2->Client" in found[0].message

    def test_extra_line(self):
        spec = ChainSpec(n_proxies=1)
        g = gen_proxy_chain(spec)
        noisy = g.model_copy(update={"promises": g.promises + (offer("Client", "Server", "thanks"),)})
        [f] = completeness_against_pattern(noisy, spec)
        assert (f.code, f.severity, f.promises) == ("ExtraPromise", Severity.WARN, (len(g.promises),))

    def test_minimal_trust_needs_every_pair(self):
        assert completeness_against_pattern(chain(1), ChainSpec(n_proxies=1), minimal_trust=True) == []
        found = completeness_against_pattern(chain(2), ChainSpec(n_proxies=2), minimal_trust=True)
        assert [f.code for f in found] == ["IncompleteTrustGraph"]
        assert "Proxy2" in found[0].message and "Server" in found[0].message

    def test_stripped_condition_is_a_different_promise(self):
        spec = ChainSpec(n_proxies=2)
        g = chain(2)
        assert g.promises[0].conditions
        stripped = g.promises[0].model_copy(update={"conditions": ()})
        tampered = g.model_copy(update={"promises": (stripped, *g.promises[1:])})
        found = completeness_against_pattern(tampered, spec)
        assert [(f.code, f.severity) for f in found] == [
            ("MissingPromise", Severity.ERROR), ("ExtraPromise", Severity.WARN),
        ]
        assert found[1].promises == (0,)

    def test_oneshot_handoff_is_a_different_promise(self):
        spec = ChainSpec(n_proxies=1)
        g = chain(1)
        i = next(i for i, p in enumerate(g.promises) if p.promisee == "Proxy1" and p.is_offer)
        once = g.promises[i].model_copy(update={"continuity": Continuity.ONESHOT})
        tampered = g.model_copy(update={"promises": g.promises[:i] + (once,) + g.promises[i + 1:]})
        found = completeness_against_pattern(tampered, spec)
        assert [f.code for f in found] == ["MissingPromise", "ExtraPromise"]
        assert found[1].promises == (i,)
