"""
Performance benchmarks for state-space exploration and the PSNI checks.
"""

import pytest

from core.models import Constant, Cooperation
from core.parser import parse_model
from core.security import PsniMethod, check_psni
from core.semantics import derive_graph

pytest.importorskip("pytest_benchmark")

pytestmark = pytest.mark.slow

RING = """\
high = {{h}};
{definitions}
system {system};
"""


def ring_model(length: int, copies: int):
    """Cooperating rings with a high shortcut that every low user can see."""
    lines = []
    for i in range(length):
        nxt = (i + 1) % length
        lines.append(f"R{i} := (l, {i % 3 + 1}).R{nxt} + (h, 1).R{nxt};")
    env, diagnostics = parse_model(RING.format(definitions="\n".join(lines), system="R0"))
    assert env is not None, diagnostics
    system = Constant("R0")
    for _ in range(copies - 1):
        system = Cooperation(system, frozenset(), Constant("R0"))
    return env.with_system(system)


class TestBenchmarks:
    """Timing of the main pipelines on medium-sized products."""

    def test_derive_graph(self, benchmark):
        """Exploration of a product of rings."""
        env = ring_model(12, 3)
        g = benchmark(derive_graph, env)
        assert g.size == 12 ** 3

    @pytest.mark.parametrize("method", [PsniMethod.BISIM, PsniMethod.UNWINDING])
    def test_check(self, benchmark, method):
        """PSNI check of a product of rings."""
        env = ring_model(8, 2)
        verdict = benchmark(check_psni, env, method)
        assert verdict.states == 64
