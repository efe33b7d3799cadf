"""
Persistent stochastic non-interference (PSNI) checks.

The low observer's view of a component is built on the derivation graph:
restriction prunes high arcs (P \\ H), hiding relabels them to tau (P / H).
PSNI is decided by two independent characterisations that must agree:

* bisimulation: P \\ H and P are lumpably bisimilar up to the high actions;
* unwinding: every high transition P' -> P'' links states whose
  restrictions are lumpably bisimilar.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from core.ctmc import SteadyState, build_generator, steady_state
from core.exceptions import InputError, MethodDisagreement
from core.lumping import Partition, coarsest_lumpable_partition, union_graph
from core.models import Cooperation, Hiding, ModelEnv, ProcessTerm, Rate
from core.parser import render_term
from core.semantics import DerivationGraph, SemanticsEngine, Transition, aggregate_transitions
from utils.constants import DEFAULT_MAX_STATES, LUMPING_TOLERANCE, TAU

logger = logging.getLogger(__name__)


class PsniMethod(Enum):
    """Decision procedure used for a verdict."""
    BISIM = "bisim"
    UNWINDING = "unwinding"
    BOTH = "both"


@dataclass(frozen=True)
class Witness:
    """
    Evidence for a PSNI failure.

    For the unwinding method it is the violating high transition in the
    system's derivation graph. For the bisimulation method it is the pair
    of roots (restricted, unrestricted) in the union graph; ``action`` is
    then None.
    """
    source: int
    target: int
    source_label: str
    target_label: str
    action: Optional[str] = None
    rate: Optional[Rate] = None

    def __str__(self) -> str:
        if self.action is None:
            return f"{self.source_label} \\ H is not equivalent to {self.target_label}"
        return f"{self.source_label} --({self.action}, {self.rate})--> {self.target_label}"


@dataclass(frozen=True)
class PartitionSummary:
    blocks: int
    sizes: Tuple[int, ...]

    @classmethod
    def of(cls, partition: Partition) -> "PartitionSummary":
        return cls(blocks=len(partition), sizes=tuple(partition.sizes()))


@dataclass(frozen=True)
class PsniVerdict:
    """Outcome of a PSNI check; a witness is present exactly when PSNI fails."""
    holds: bool
    method: PsniMethod
    witness: Optional[Witness]
    partition: PartitionSummary
    states: int
    diagnostics: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.holds == (self.witness is not None):
            raise ValueError("a witness must be given exactly when PSNI fails")


@dataclass(frozen=True)
class LowViewClass:
    """One low-equivalence class with its mass under both views."""
    hidden_states: Tuple[int, ...]
    restricted_states: Tuple[int, ...]
    hidden_probability: float
    restricted_probability: float

    @property
    def agrees(self) -> bool:
        return abs(self.hidden_probability - self.restricted_probability) <= LUMPING_TOLERANCE


@dataclass(frozen=True)
class LowViewReport:
    """Steady states of P / H and P \\ H compared class by class."""
    hidden_labels: Tuple[str, ...]
    restricted_labels: Tuple[str, ...]
    hidden: SteadyState
    restricted: SteadyState
    classes: Tuple[LowViewClass, ...]

    @property
    def consistent(self) -> bool:
        return all(c.agrees for c in self.classes)


@dataclass(frozen=True)
class AttackVerdict:
    """Result of confronting every derivative with one concrete high component."""
    holds: bool
    attacker: str
    checked: int
    failing_state: Optional[int] = None
    failing_label: Optional[str] = None


def restrict_from(g: DerivationGraph, high: Iterable[str],
                  root: int) -> Tuple[DerivationGraph, List[int]]:
    """
    Graph of states[root] \\ H: high arcs removed, unreachable states pruned.

    Returns:
        Tuple of (graph, kept) where kept[new_index] is the index in g;
        the new root is 0
    """
    high = frozenset(high)
    reachable = {root}
    stack = [root]
    while stack:
        state = stack.pop()
        for transition in g.outgoing(state):
            if transition.action not in high and transition.target not in reachable:
                reachable.add(transition.target)
                stack.append(transition.target)

    kept = [root] + sorted(reachable - {root})
    renumber = {old: new for new, old in enumerate(kept)}
    records = [
        Transition(renumber[t.source], t.action, t.rate, t.multiplicity, renumber[t.target])
        for t in g.transitions
        if t.source in reachable and t.action not in high
    ]
    graph = DerivationGraph(
        states=tuple(g.states[old] for old in kept),
        transitions=aggregate_transitions(records),
    )
    return graph, kept


def restrict_high(g: DerivationGraph, high: Iterable[str]) -> DerivationGraph:
    """The derivation graph of P \\ H, rooted where g is."""
    return restrict_from(g, high, g.root)[0]


def hide_high(g: DerivationGraph, high: Iterable[str]) -> DerivationGraph:
    """The derivation graph of P / H: high arcs become tau arcs, then re-aggregate."""
    high = frozenset(high)
    relabelled = (
        Transition(t.source, TAU, t.rate, t.multiplicity, t.target) if t.action in high else t
        for t in g.transitions
    )
    return DerivationGraph(states=g.states, transitions=aggregate_transitions(relabelled), root=g.root)


def _high_obligations(g: DerivationGraph, high: FrozenSet[str]) -> List[Transition]:
    """High transitions in (source, action, target) order, one per triple."""
    seen = set()
    obligations = []
    for transition in g.transitions:
        key = (transition.source, transition.action, transition.target)
        if transition.action in high and key not in seen:
            seen.add(key)
            obligations.append(transition)
    return obligations


def _bisim_on_graph(env: ModelEnv, g: DerivationGraph) -> PsniVerdict:
    restricted = restrict_high(g, env.high)
    union, restricted_root, root = union_graph(restricted, g)
    partition = coarsest_lumpable_partition(union, env.high | {TAU})
    holds = partition.same_block(restricted_root, root)

    label = render_term(g.states[g.root])
    outcome = "holds" if holds else "fails"
    diagnostics = (f"{label} \\ H ≈ up to H {label}: {outcome}",)
    witness = None
    if not holds:
        witness = Witness(source=restricted_root, target=root, source_label=label, target_label=label)
    logger.info(f"Bisimulation check on {g.size} states: PSNI {outcome}")
    return PsniVerdict(
        holds=holds,
        method=PsniMethod.BISIM,
        witness=witness,
        partition=PartitionSummary.of(partition),
        states=g.size,
        diagnostics=diagnostics,
    )


def _unwinding_on_graph(env: ModelEnv, g: DerivationGraph) -> PsniVerdict:
    restricted, kept = restrict_from(g, env.high, g.root)
    image = {old: new for new, old in enumerate(kept)}
    partition = coarsest_lumpable_partition(restricted, {TAU})

    pair_cache: Dict[Tuple[int, int], bool] = {}

    def low_equivalent(source: int, target: int) -> bool:
        if source in image and target in image:
            return partition.same_block(image[source], image[target])
        key = (source, target)
        if key not in pair_cache:
            left, _ = restrict_from(g, env.high, source)
            right, _ = restrict_from(g, env.high, target)
            union, left_root, right_root = union_graph(left, right)
            pair_cache[key] = coarsest_lumpable_partition(union, {TAU}).same_block(left_root, right_root)
        return pair_cache[key]

    witness = None
    diagnostics = []
    for transition in _high_obligations(g, env.high):
        source_label = render_term(g.states[transition.source])
        target_label = render_term(g.states[transition.target])
        ok = low_equivalent(transition.source, transition.target)
        relation = "≈" if ok else "≉"
        diagnostics.append(
            f"{source_label}\\H {relation} {target_label}\\H (via {transition.action})"
        )
        if not ok and witness is None:
            witness = Witness(
                source=transition.source,
                target=transition.target,
                source_label=source_label,
                target_label=target_label,
                action=transition.action,
                rate=transition.rate,
            )

    holds = witness is None
    logger.info(
        f"Unwinding check on {g.size} states, {len(diagnostics)} high transitions: "
        f"PSNI {'holds' if holds else 'fails'}"
    )
    return PsniVerdict(
        holds=holds,
        method=PsniMethod.UNWINDING,
        witness=witness,
        partition=PartitionSummary.of(partition),
        states=g.size,
        diagnostics=tuple(diagnostics),
    )


def check_psni_bisim(env: ModelEnv, max_states: int = DEFAULT_MAX_STATES) -> PsniVerdict:
    """PSNI iff the restricted system is lumpably bisimilar to the system up to H."""
    g = SemanticsEngine(env).derive_graph(max_states=max_states)
    return _bisim_on_graph(env, g)


def check_psni_unwinding(env: ModelEnv, max_states: int = DEFAULT_MAX_STATES) -> PsniVerdict:
    """PSNI iff every high transition connects lumpably bisimilar restricted states."""
    g = SemanticsEngine(env).derive_graph(max_states=max_states)
    return _unwinding_on_graph(env, g)


def check_psni(env: ModelEnv, method: PsniMethod = PsniMethod.BOTH,
               max_states: int = DEFAULT_MAX_STATES) -> PsniVerdict:
    """
    Decide PSNI for the system component of env.

    Args:
        env: Model with its high action set
        method: Characterisation to use; BOTH runs the two and cross-checks
        max_states: Exploration limit

    Returns:
        The verdict; under BOTH it carries the unwinding witness and the
        diagnostics of both methods

    Raises:
        MethodDisagreement: the two characterisations disagree
        StateSpaceExceeded: the system has more than max_states derivatives
    """
    g = SemanticsEngine(env).derive_graph(max_states=max_states)
    if method is PsniMethod.BISIM:
        return _bisim_on_graph(env, g)
    if method is PsniMethod.UNWINDING:
        return _unwinding_on_graph(env, g)

    bisim = _bisim_on_graph(env, g)
    unwinding = _unwinding_on_graph(env, g)
    if bisim.holds != unwinding.holds:
        logger.error(f"PSNI methods disagree on {render_term(env.system)}")
        raise MethodDisagreement(
            f"bisimulation says {bisim.holds}, unwinding says {unwinding.holds} "
            f"for {render_term(env.system)}"
        )
    return PsniVerdict(
        holds=unwinding.holds,
        method=PsniMethod.BOTH,
        witness=unwinding.witness,
        partition=unwinding.partition,
        states=g.size,
        diagnostics=bisim.diagnostics + unwinding.diagnostics,
    )


def low_view_report(env: ModelEnv, max_states: int = DEFAULT_MAX_STATES) -> LowViewReport:
    """
    Steady states of P / H and P \\ H with class-wise probability masses.

    The classes are the blocks of plain lumpable bisimilarity over the
    union of both views.

    Raises:
        PassiveRateReachable: a view still carries passive rates
        NotIrreducible: a view's chain is not irreducible
    """
    g = SemanticsEngine(env).derive_graph(max_states=max_states)
    hidden = hide_high(g, env.high)
    restricted = restrict_high(g, env.high)
    hidden_pi = steady_state(build_generator(hidden))
    restricted_pi = steady_state(build_generator(restricted))

    union, _, restricted_root = union_graph(hidden, restricted)
    partition = coarsest_lumpable_partition(union, {TAU})
    offset = restricted_root
    classes = []
    for block in partition.blocks:
        hidden_states = tuple(s for s in block if s < offset)
        restricted_states = tuple(s - offset for s in block if s >= offset)
        classes.append(LowViewClass(
            hidden_states=hidden_states,
            restricted_states=restricted_states,
            hidden_probability=sum(hidden_pi[s] for s in hidden_states),
            restricted_probability=sum(restricted_pi[s] for s in restricted_states),
        ))

    report = LowViewReport(
        hidden_labels=tuple(hidden.labels()),
        restricted_labels=tuple(restricted.labels()),
        hidden=hidden_pi,
        restricted=restricted_pi,
        classes=tuple(classes),
    )
    if not report.consistent:
        logger.info("Low view differs between the hidden and restricted systems")
    return report


def is_high_component(env: ModelEnv, term: ProcessTerm,
                      max_states: int = DEFAULT_MAX_STATES) -> bool:
    """True iff every derivative of term engages only in high actions."""
    g = SemanticsEngine(env).derive_graph(term, max_states=max_states)
    return all(t.action in env.high for t in g.transitions)


def check_against_attacker(env: ModelEnv, attacker: ProcessTerm,
                           max_states: int = DEFAULT_MAX_STATES) -> AttackVerdict:
    """
    Compare, for every derivative P' of the system, P' \\ H with
    (P' cooperating with the attacker on H) / H.

    A failure exhibits a distinguishing high component; success says
    nothing about other attackers.

    Raises:
        InputError: the attacker performs non-high actions
    """
    attacker_label = render_term(attacker)
    engine = SemanticsEngine(env)
    if not is_high_component(env, attacker, max_states):
        raise InputError(f"attacker {attacker_label} performs actions outside the high set")

    g = engine.derive_graph(max_states=max_states)
    for state in range(g.size):
        restricted, _ = restrict_from(g, env.high, state)
        composed_root = Hiding(Cooperation(g.states[state], env.high, attacker), env.high)
        composed = engine.derive_graph(composed_root, max_states=max_states)
        union, left_root, right_root = union_graph(restricted, composed)
        if not coarsest_lumpable_partition(union, {TAU}).same_block(left_root, right_root):
            label = render_term(g.states[state])
            logger.info(f"Attacker {attacker_label} distinguishes {label}")
            return AttackVerdict(
                holds=False,
                attacker=attacker_label,
                checked=state + 1,
                failing_state=state,
                failing_label=label,
            )
    return AttackVerdict(holds=True, attacker=attacker_label, checked=g.size)
