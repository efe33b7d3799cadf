"""
Model and graph generators shared by the test suites.

Every generator takes a seeded ``random.Random`` so failing cases can be
replayed.
"""

import random
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from core.models import (
    Activity, Choice, Constant, Cooperation, Hiding, ModelEnv, Prefix, ProcessTerm, Rate
)
from core.semantics import DerivationGraph, Transition, aggregate_transitions
from utils.constants import TAU

HIGH = "h"
LOW_ACTIONS = ("l", "m")
RATES = (1, 2, 3)


def fig2_source(lam: int = 1, rho: int = 2) -> str:
    return (
        "high = {h};\n"
        f"P1 := (h, {lam}).P2 + (l, {lam}).P3;\n"
        f"P2 := (l, {lam}).P3;\n"
        f"P3 := (l, {rho}).P1;\n"
        "system P1;\n"
    )


def choice_of(terms: Sequence[ProcessTerm]) -> ProcessTerm:
    """Left-nested choice over one or more terms."""
    result = terms[0]
    for term in terms[1:]:
        result = Choice(result, term)
    return result


def prefix(action: str, rate, target: str) -> Prefix:
    return Prefix(Activity(action, Rate.finite(rate)), Constant(target))


def random_model(rng: random.Random, max_constants: int = 6) -> ModelEnv:
    """
    Random sequential definitions over actions h, l, m with rates 1..3.

    The system is the first constant, optionally hidden on one low action
    or put in cooperation with another constant.
    """
    k = rng.randint(1, max_constants)
    names = [f"C{i}" for i in range(k)]
    defs = {}
    for name in names:
        branches = [
            prefix(rng.choice((HIGH,) + LOW_ACTIONS), rng.choice(RATES), rng.choice(names))
            for _ in range(rng.randint(1, 3))
        ]
        defs[name] = choice_of(branches)

    system: ProcessTerm = Constant(names[0])
    shape = rng.random()
    if shape < 0.2:
        system = Hiding(system, frozenset({rng.choice(LOW_ACTIONS)}))
    elif shape < 0.4:
        coop_set = frozenset(a for a in LOW_ACTIONS if rng.random() < 0.5)
        system = Cooperation(system, coop_set, Constant(rng.choice(names)))
    return ModelEnv(defs=defs, system=system, high=frozenset({HIGH}))


def psni_model(rng: random.Random, name: str = "S", max_constants: int = 4) -> ModelEnv:
    """
    A model that satisfies PSNI by construction.

    Each S_i offers random low prefixes to other S_j and possibly a high
    move to T_i, a copy of S_i's low behaviour without the high move, so
    every high transition links states with equal restricted behaviour.
    """
    k = rng.randint(1, max_constants)
    defs: Dict[str, ProcessTerm] = {}
    for i in range(k):
        low = [
            prefix(rng.choice(LOW_ACTIONS), rng.choice(RATES), f"{name}{rng.randrange(k)}")
            for _ in range(rng.randint(1, 2))
        ]
        branches: List[ProcessTerm] = list(low)
        if rng.random() < 0.7:
            branches.append(prefix(HIGH, rng.choice(RATES), f"{name}{i}c"))
        defs[f"{name}{i}"] = choice_of(branches)
        defs[f"{name}{i}c"] = choice_of(low)
    return ModelEnv(defs=defs, system=Constant(f"{name}0"), high=frozenset({HIGH}))


def merge(env: ModelEnv, other: ModelEnv, system: ProcessTerm) -> ModelEnv:
    return env.with_defs(other.defs).with_system(system)


def split_rate(env: ModelEnv, rng: random.Random) -> ModelEnv:
    """Replace one prefix (a, r).X by (a, r/2).X + (a, r/2).X."""
    name = rng.choice(sorted(env.defs))
    body = env.defs[name]
    branches = list(_branches(body))
    index = rng.randrange(len(branches))
    target = branches[index]
    half = Rate(target.activity.rate.value / 2)
    branches[index] = Choice(
        Prefix(Activity(target.activity.action, half), target.continuation),
        Prefix(Activity(target.activity.action, half), target.continuation),
    )
    return env.with_defs({name: choice_of(branches)})


def redirect_to_copy(env: ModelEnv, rng: random.Random) -> ModelEnv:
    """Point one prefix at a fresh constant with the same body as its old target."""
    name = rng.choice(sorted(env.defs))
    branches = list(_branches(env.defs[name]))
    index = rng.randrange(len(branches))
    target = branches[index]
    old = target.continuation.name
    copy_name = f"{old}x"
    while copy_name in env.defs:
        copy_name += "x"
    branches[index] = Prefix(target.activity, Constant(copy_name))
    return env.with_defs({name: choice_of(branches), copy_name: env.defs[old]})


def _branches(term: ProcessTerm) -> Iterator[Prefix]:
    if isinstance(term, Choice):
        yield from _branches(term.left)
        yield from _branches(term.right)
    else:
        yield term


def random_graph(rng: random.Random, n: int,
                 actions: Sequence[str] = (TAU, HIGH, "l"),
                 edges: Optional[int] = None) -> DerivationGraph:
    """A labelled graph with random arcs; states are placeholder constants."""
    if edges is None:
        edges = rng.randint(0, 2 * n)
    records = [
        Transition(rng.randrange(n), rng.choice(actions), Rate.finite(rng.choice(RATES)), 1,
                   rng.randrange(n))
        for _ in range(edges)
    ]
    return DerivationGraph(
        states=tuple(Constant(f"X{i}") for i in range(n)),
        transitions=aggregate_transitions(records),
    )


def set_partitions(items: Sequence[int]) -> Iterator[List[List[int]]]:
    """All partitions of items into nonempty blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield [[first]] + partition
        for i in range(len(partition)):
            yield partition[:i] + [[first] + partition[i]] + partition[i + 1:]


def brute_force_rate(g: DerivationGraph, state: int, block: Sequence[int], action: str) -> Fraction:
    """q[state, block, action] by direct summation over all records."""
    members = set(block)
    return sum(
        (t.rate.value for t in g.transitions
         if t.source == state and t.action == action and t.target in members),
        Fraction(0),
    )


def is_stable(g: DerivationGraph, blocks: List[List[int]], ignored) -> bool:
    actions = {t.action for t in g.transitions}
    for block in blocks:
        for p, q in combinations(block, 2):
            for target in blocks:
                for action in actions:
                    if action in ignored and (p in target or q in target):
                        continue
                    if brute_force_rate(g, p, target, action) != brute_force_rate(g, q, target, action):
                        return False
    return True


def coarsest_by_enumeration(g: DerivationGraph, ignored) -> List[List[int]]:
    """The stable partition with fewest blocks, over every partition of the states."""
    stable = [p for p in set_partitions(list(range(g.size))) if is_stable(g, p, ignored)]
    best = min(len(p) for p in stable)
    winners = [p for p in stable if len(p) == best]
    assert len(winners) == 1, "coarsest stable partition must be unique"
    return winners[0]


def canonical_blocks(blocks) -> List[Tuple[int, ...]]:
    return sorted(tuple(sorted(block)) for block in blocks)


def rename_constants(env: ModelEnv, suffix: str = "_") -> Dict[str, ProcessTerm]:
    """Copies of every sequential definition with each constant name suffixed."""

    def walk(term: ProcessTerm) -> ProcessTerm:
        if isinstance(term, Constant):
            return Constant(f"{term.name}{suffix}")
        if isinstance(term, Prefix):
            return Prefix(term.activity, walk(term.continuation))
        if isinstance(term, Choice):
            return Choice(walk(term.left), walk(term.right))
        raise TypeError(f"not a sequential term: {term!r}")

    return {f"{name}{suffix}": walk(body) for name, body in env.defs.items()}


def equivalent_pair(rng: random.Random) -> Tuple[ModelEnv, Constant, Constant]:
    """A PSNI model S0 and a rewritten copy S0_ that is lumpably bisimilar to it."""
    env = psni_model(rng)
    rewrite = split_rate if rng.random() < 0.5 else redirect_to_copy
    merged = env.with_defs(rename_constants(rewrite(env, rng)))
    return merged, Constant("S0"), Constant("S0_")


def change_one_rate(env: ModelEnv, rng: random.Random) -> ModelEnv:
    """Raise the rate of one prefix by one, which may break PSNI."""
    name = rng.choice(sorted(env.defs))
    branches = list(_branches(env.defs[name]))
    index = rng.randrange(len(branches))
    target = branches[index]
    faster = Activity(target.activity.action, target.activity.rate + Rate.finite(1))
    branches[index] = Prefix(faster, target.continuation)
    return env.with_defs({name: choice_of(branches)})
