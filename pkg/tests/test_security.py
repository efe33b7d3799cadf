"""
Tests for the PSNI decision procedures and the low-view report.
"""

import random

import pytest

from core import security
from core.exceptions import InputError, MethodDisagreement
from core.lumping import coarsest_lumpable_partition, union_graph
from core.models import Activity, Constant, Cooperation, Hiding, Prefix, Rate
from core.parser import parse_model
from core.security import (
    PsniMethod, PsniVerdict, Witness, check_against_attacker, check_psni, check_psni_bisim,
    check_psni_unwinding, hide_high, is_high_component, low_view_report, restrict_from,
    restrict_high
)
from core.semantics import derive_graph
from tests.factories import (
    HIGH, LOW_ACTIONS, RATES, change_one_rate, equivalent_pair, fig2_source, prefix, psni_model,
    random_model
)


def model(source):
    env, diagnostics = parse_model(source)
    assert env is not None, diagnostics
    return env


class TestViews:
    """Test restriction and hiding of high actions on graphs."""

    def test_restrict_prunes_unreachable(self, fig2_graph):
        """Restriction drops states reachable only via high actions."""
        restricted, kept = restrict_from(fig2_graph, {HIGH}, 0)
        assert kept == [0, 2]
        assert restricted.labels() == ["P1", "P3"]
        assert restricted.actions() == {"l"}

    def test_restrict_from_other_root(self, fig2_graph):
        """Restriction can start from any state."""
        restricted, kept = restrict_from(fig2_graph, {HIGH}, 1)
        assert kept == [1, 0, 2]
        assert restricted.root == 0
        assert restricted.size == 3

    def test_restrict_high_keeps_low_graph(self, fig2_graph):
        """A graph without high actions is unchanged."""
        assert restrict_high(fig2_graph, set()) == fig2_graph

    def test_hide_relabels(self, fig1_graph):
        """Hiding relabels high arcs and merges them with tau."""
        hidden = hide_high(fig1_graph, {HIGH})
        assert [(t.source, t.action, t.rate, t.multiplicity) for t in hidden.transitions] == [
            (0, "tau", Rate.finite(2), 2),
            (1, "l", Rate.finite(1), 1),
        ]
        assert hidden.states == fig1_graph.states


class TestGoldenVerdicts:
    """Test the two reference models under every method."""

    @pytest.mark.parametrize("method", list(PsniMethod))
    def test_fig1_fails(self, fig1_env, method):
        """The leaking model fails under every method."""
        verdict = check_psni(fig1_env, method)
        assert not verdict.holds
        assert verdict.method is method
        assert verdict.states == 2

    def test_fig1_unwinding_witness(self, fig1_env):
        """The unwinding witness is the high transition."""
        witness = check_psni_unwinding(fig1_env).witness
        assert (witness.source, witness.action, witness.target) == (0, "h", 1)
        assert witness.rate == Rate.finite(1)
        assert str(witness) == "P / {i} --(h, 1)--> Pp / {i}"

    def test_fig1_bisim_witness(self, fig1_env):
        """The bisimulation witness compares restricted and hidden roots."""
        witness = check_psni_bisim(fig1_env).witness
        assert witness.action is None
        assert (witness.source, witness.target) == (0, 2)
        assert str(witness) == "P / {i} \\ H is not equivalent to P / {i}"

    @pytest.mark.parametrize("method", list(PsniMethod))
    def test_fig2_holds(self, fig2_env, method):
        """The three-state model holds under every method."""
        verdict = check_psni(fig2_env, method)
        assert verdict.holds
        assert verdict.witness is None

    def test_fig2_diagnostics(self, fig2_env):
        """Diagnostics name each high step between equivalent states."""
        verdict = check_psni(fig2_env)
        assert "P1\\H ≈ P2\\H (via h)" in verdict.diagnostics
        assert verdict.partition.blocks == 2
        assert verdict.partition.sizes == (1, 1)
        assert verdict.states == 3

    def test_no_high_actions_holds(self, fig1_env):
        """A model without high actions holds."""
        assert check_psni(fig1_env.with_high([])).holds

    def test_verdict_requires_witness_on_failure(self, fig2_env):
        """A failing verdict must carry a witness."""
        summary = check_psni(fig2_env).partition
        with pytest.raises(ValueError):
            PsniVerdict(holds=False, method=PsniMethod.BISIM, witness=None, partition=summary, states=3)
        witness = Witness(source=0, target=1, source_label="P", target_label="Q")
        with pytest.raises(ValueError):
            PsniVerdict(holds=True, method=PsniMethod.BISIM, witness=witness, partition=summary, states=3)

    def test_disagreement_is_reported(self, fig1_env, fig2_env, monkeypatch):
        """Conflicting methods raise."""
        failing = check_psni_bisim(fig1_env)
        monkeypatch.setattr(security, "_bisim_on_graph", lambda env, g: failing)
        with pytest.raises(MethodDisagreement):
            check_psni(fig2_env, PsniMethod.BOTH)


class TestLowViewReport:
    """Test steady-state comparison of the hidden and restricted views."""

    def test_fig2_classes(self, fig2_env):
        """Hidden and restricted masses agree per class."""
        report = low_view_report(fig2_env)
        assert report.consistent
        masses = sorted((c.hidden_probability, c.restricted_probability) for c in report.classes)
        assert masses[0] == pytest.approx((1 / 3, 1 / 3), abs=1e-12)
        assert masses[1] == pytest.approx((2 / 3, 2 / 3), abs=1e-12)

    @pytest.mark.parametrize("lam,rho", [(1, 1), (1, 2), (3, 2)])
    def test_fig2_rate_grid(self, lam, rho):
        """Low views agree over a grid of rates."""
        report = low_view_report(model(fig2_source(lam, rho)))
        assert report.consistent
        first = rho / (2 * (lam + rho))
        third = lam / (lam + rho)
        assert report.hidden.probs == pytest.approx((first, first, third), abs=1e-9)
        assert report.restricted.probs == pytest.approx((2 * first, third), abs=1e-9)
        for c in report.classes:
            assert c.hidden_probability == pytest.approx(c.restricted_probability, abs=1e-9)

    def test_fig1_inconsistent(self, fig1_env):
        """The leaking model shows different low views."""
        report = low_view_report(fig1_env)
        assert not report.consistent
        assert report.hidden.probs == pytest.approx((1 / 3, 2 / 3), abs=1e-12)
        assert report.restricted.probs == pytest.approx((1 / 2, 1 / 2), abs=1e-12)


class TestAttacker:
    """Test confrontation with one concrete high component."""

    def test_fig1_attacked(self, fig1_env):
        """A high-only attacker exposes the leak."""
        env = fig1_env.with_defs({"H": prefix(HIGH, 1, "H")})
        verdict = check_against_attacker(env, Constant("H"))
        assert not verdict.holds
        assert (verdict.failing_state, verdict.failing_label) == (0, "P / {i}")
        assert verdict.attacker == "H"

    def test_fig2_resists(self, fig2_env):
        """No state of the safe model is distinguished."""
        env = fig2_env.with_defs({"H": prefix(HIGH, 1, "H")})
        verdict = check_against_attacker(env, Constant("H"))
        assert verdict.holds
        assert verdict.checked == 3

    def test_attacker_must_be_high(self, fig2_env):
        """An attacker with low actions is refused."""
        env = fig2_env.with_defs({"L": prefix("l", 1, "L")})
        assert not is_high_component(env, Constant("L"))
        with pytest.raises(InputError):
            check_against_attacker(env, Constant("L"))


@pytest.mark.slow
class TestMethodAgreement:
    """Both characterisations decide the same on generated models."""

    def _corpus(self, rng, count):
        for n in range(count):
            if n % 3 == 0:
                env = psni_model(rng)
                if n % 2:
                    env = change_one_rate(env, rng)
                yield env
            else:
                yield random_model(rng)

    def test_agreement_on_generated_models(self):
        """Both methods agree on generated models."""
        rng = random.Random(2024)
        outcomes = {True: 0, False: 0}
        for env in self._corpus(rng, 1000):
            bisim = check_psni(env, PsniMethod.BISIM)
            unwinding = check_psni(env, PsniMethod.UNWINDING)
            assert bisim.holds == unwinding.holds, env
            outcomes[bisim.holds] += 1
        assert outcomes[True] > 50
        assert outcomes[False] > 50

    def test_persistence(self):
        """Every derivative of a holding model holds."""
        rng = random.Random(99)
        checked = 0
        for env in self._corpus(rng, 300):
            if not check_psni(env).holds:
                continue
            g = derive_graph(env)
            for state in g.states:
                assert check_psni(env.with_system(state)).holds
            checked += 1
        assert checked > 40


@pytest.mark.slow
class TestCompositionality:
    """PSNI is preserved by low prefix, hiding and low cooperation."""

    def test_operators_preserve_psni(self):
        """Composing holding models keeps PSNI."""
        rng = random.Random(7)
        for _ in range(200):
            first = psni_model(rng, "S", max_constants=3)
            second = psni_model(rng, "U", max_constants=3)
            env = first.with_defs(second.defs)
            p, q = Constant("S0"), Constant("U0")
            assert check_psni(env.with_system(p)).holds
            assert check_psni(env.with_system(q)).holds

            activity = Activity(rng.choice(LOW_ACTIONS), Rate.finite(rng.choice(RATES)))
            hidden = frozenset(a for a in LOW_ACTIONS + (HIGH,) if rng.random() < 0.5)
            shared = frozenset(a for a in LOW_ACTIONS if rng.random() < 0.5)
            for system in (Prefix(activity, p), Hiding(p, hidden), Cooperation(p, shared, q)):
                assert check_psni(env.with_system(system)).holds

    def test_equivalent_components_share_psni(self):
        """Equivalent components have the same verdict."""
        rng = random.Random(13)
        for _ in range(100):
            env, p1, p2 = equivalent_pair(rng)
            g1, g2 = derive_graph(env, root=p1), derive_graph(env, root=p2)
            union, left, right = union_graph(g1, g2)
            assert coarsest_lumpable_partition(union).same_block(left, right)
            assert check_psni(env.with_system(p1)).holds
            assert check_psni(env.with_system(p2)).holds
