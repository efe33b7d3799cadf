"""
Lumpable bisimilarity by signature refinement.

A partition is refined until every two states of a block have the same
total conditional rate into every block for every action type. For
action types in the ignored set, rates into a state's own block are not
compared; ignoring only tau gives plain lumpable bisimilarity, ignoring
the high actions as well gives lumpable bisimilarity up to the high set.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import AbstractSet, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from core.ctmc import total_conditional_rate
from core.exceptions import PartitionUnstable
from core.semantics import DerivationGraph, Transition
from utils.constants import TAU, VERIFY_PARTITIONS

logger = logging.getLogger(__name__)

Signature = Tuple[Tuple[str, int, bool, Fraction], ...]


@dataclass(frozen=True)
class Partition:
    """
    Disjoint, exhaustive blocks of graph states.

    Blocks are kept in canonical order: each block is sorted and blocks are
    ordered by their smallest state.
    """
    blocks: Tuple[Tuple[int, ...], ...]
    block_of: Tuple[int, ...]

    @classmethod
    def from_block_of(cls, block_of: Sequence) -> "Partition":
        """Build a partition from any per-state labelling, renumbering by first occurrence."""
        renumber: Dict = {}
        canonical = []
        for label in block_of:
            canonical.append(renumber.setdefault(label, len(renumber)))
        blocks: List[List[int]] = [[] for _ in renumber]
        for state, b in enumerate(canonical):
            blocks[b].append(state)
        return cls(blocks=tuple(tuple(block) for block in blocks), block_of=tuple(canonical))

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], n: Optional[int] = None) -> "Partition":
        blocks = [sorted(block) for block in blocks]
        members = [state for block in blocks for state in block]
        if n is None:
            n = len(members)
        if any(not block for block in blocks):
            raise ValueError("partition blocks must be nonempty")
        if sorted(members) != list(range(n)):
            raise ValueError(f"blocks must be disjoint and cover states 0..{n - 1}")
        labels = [0] * n
        for b, block in enumerate(blocks):
            for state in block:
                labels[state] = b
        return cls.from_block_of(labels)

    @classmethod
    def trivial(cls, n: int) -> "Partition":
        return cls.from_block_of([0] * n)

    @classmethod
    def discrete(cls, n: int) -> "Partition":
        return cls.from_block_of(range(n))

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def n_states(self) -> int:
        return len(self.block_of)

    def same_block(self, i: int, j: int) -> bool:
        return self.block_of[i] == self.block_of[j]

    def sizes(self) -> List[int]:
        return [len(block) for block in self.blocks]

    def block_sets(self) -> List[FrozenSet[int]]:
        return [frozenset(block) for block in self.blocks]


def _normalise_ignored(ignored: Iterable[str]) -> FrozenSet[str]:
    return frozenset(ignored) | {TAU}


def _signature(outgoing: Sequence[Transition], block_of: Sequence[int], own_block: int,
               ignored: AbstractSet[str]) -> Signature:
    totals: Dict[Tuple[str, int, bool], Fraction] = defaultdict(Fraction)
    for transition in outgoing:
        target_block = block_of[transition.target]
        if transition.action in ignored and target_block == own_block:
            continue
        totals[(transition.action, target_block, transition.rate.passive)] += transition.rate.value
    return tuple(sorted((a, b, p, v) for (a, b, p), v in totals.items()))


def coarsest_lumpable_partition(g: DerivationGraph,
                                ignored: Iterable[str] = frozenset({TAU}),
                                initial: Optional[Partition] = None,
                                verify: bool = VERIFY_PARTITIONS) -> Partition:
    """
    Coarsest lumpable refinement of ``initial``.

    Args:
        g: Derivation graph (possibly a union of several graphs)
        ignored: Action types whose rates into the own block are not
            compared; tau is always included
        initial: Starting partition, the single block by default
        verify: Re-check stability of the result by brute force

    Returns:
        The partition in canonical block order

    Raises:
        PartitionUnstable: the stability re-check failed
    """
    ignored = _normalise_ignored(ignored)
    partition = initial if initial is not None else Partition.trivial(g.size)
    if partition.n_states != g.size:
        raise ValueError(f"initial partition covers {partition.n_states} states, graph has {g.size}")

    iteration = 0
    while True:
        iteration += 1
        block_of = partition.block_of
        keys = [
            (block_of[state], _signature(g.outgoing(state), block_of, block_of[state], ignored))
            for state in range(g.size)
        ]
        refined = Partition.from_block_of(keys)
        logger.debug(f"Refinement iteration {iteration}: {len(partition)} -> {len(refined)} blocks")
        if len(refined) == len(partition):
            break
        partition = refined

    logger.info(
        f"Lumpable partition with ignored={sorted(ignored)}: {g.size} states in "
        f"{len(partition)} blocks after {iteration} iterations"
    )
    if verify:
        verify_stability(g, partition, ignored)
    return partition


def verify_stability(g: DerivationGraph, partition: Partition,
                     ignored: Iterable[str] = frozenset({TAU})):
    """
    Recompute every q[P, S, a] and check members of a block agree.

    Raises:
        PartitionUnstable: two states of one block differ on some block S
    """
    ignored = _normalise_ignored(ignored)
    block_sets = partition.block_sets()
    for b, block in enumerate(partition.blocks):
        if len(block) < 2:
            continue
        targets = {
            (t.action, partition.block_of[t.target])
            for state in block
            for t in g.outgoing(state)
        }
        for action, s in sorted(targets):
            if action in ignored and s == b:
                continue
            rates = {total_conditional_rate(g, state, block_sets[s], action) for state in block}
            if len(rates) > 1:
                raise PartitionUnstable(
                    f"block {list(block)} is unstable for action '{action}' into block {list(block_sets[s])}"
                )


def equivalent(g: DerivationGraph, i: int, j: int,
               ignored: Iterable[str] = frozenset({TAU})) -> bool:
    """True iff states i and j share a block of the coarsest lumpable partition."""
    return coarsest_lumpable_partition(g, ignored).same_block(i, j)


def union_graph(g1: DerivationGraph, g2: DerivationGraph) -> Tuple[DerivationGraph, int, int]:
    """
    Disjoint union of two graphs; identical terms are kept apart.

    Returns:
        Tuple of (union, root of g1, root of g2) in the union's numbering
    """
    offset = g1.size
    shifted = tuple(
        Transition(t.source + offset, t.action, t.rate, t.multiplicity, t.target + offset)
        for t in g2.transitions
    )
    union = DerivationGraph(
        states=g1.states + g2.states,
        transitions=g1.transitions + shifted,
        root=g1.root,
    )
    return union, g1.root, g2.root + offset
