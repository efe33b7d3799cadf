"""
Underlying continuous-time Markov chain of a derivation graph.

The generator is assembled with exact rationals; floating point is only
used inside the steady-state solvers. Small chains are solved directly
with an LU factorisation, large ones by power iteration on the
uniformised chain.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, AbstractSet, Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, lu_factor, lu_solve

from core.exceptions import (
    NotIrreducible, PassiveRateReachable, SingularSystem, SolverDidNotConverge
)
from core.models import Rate, rate_sum
from core.semantics import DerivationGraph
from utils.constants import (
    DENSE_SOLVER_LIMIT, ITERATIVE_MAX_ITERATIONS, ITERATIVE_TOLERANCE, PROBABILITY_TOLERANCE,
    RESIDUAL_TOLERANCE, UNIFORMIZATION_FACTOR
)

if TYPE_CHECKING:
    from core.lumping import Partition

logger = logging.getLogger(__name__)

SOLVER_METHODS = ("auto", "dense", "iterative")


@dataclass(frozen=True)
class Generator:
    """
    Infinitesimal generator Q with exact rational entries.

    ``off_diag`` holds only strictly positive rates q(i, j) for i != j;
    ``diag[i]`` is minus the sum of row i.
    """
    n: int
    off_diag: Mapping[Tuple[int, int], Fraction]
    diag: Tuple[Fraction, ...] = field(default=())

    def __post_init__(self):
        entries = dict(self.off_diag)
        for (i, j), value in entries.items():
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"invalid generator entry ({i}, {j})")
            if value <= 0:
                raise ValueError(f"generator entry ({i}, {j}) must be positive, got {value}")
        totals = [Fraction(0)] * self.n
        for (i, _), value in entries.items():
            totals[i] += value
        object.__setattr__(self, "off_diag", entries)
        object.__setattr__(self, "diag", tuple(-total for total in totals))

    def rate(self, i: int, j: int) -> Fraction:
        if i == j:
            return self.diag[i]
        return self.off_diag.get((i, j), Fraction(0))

    def row_sums(self) -> List[Fraction]:
        sums = list(self.diag)
        for (i, _), value in self.off_diag.items():
            sums[i] += value
        return sums

    def to_dense(self) -> np.ndarray:
        matrix = np.zeros((self.n, self.n))
        for (i, j), value in self.off_diag.items():
            matrix[i, j] = float(value)
        for i, value in enumerate(self.diag):
            matrix[i, i] = float(value)
        return matrix

    def to_sparse(self) -> sp.csr_matrix:
        rows, cols, data = [], [], []
        for (i, j), value in self.off_diag.items():
            rows.append(i)
            cols.append(j)
            data.append(float(value))
        for i, value in enumerate(self.diag):
            rows.append(i)
            cols.append(i)
            data.append(float(value))
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def to_digraph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.off_diag)
        return graph


@dataclass(frozen=True)
class SteadyState:
    """Stationary distribution of an irreducible generator."""
    probs: Tuple[float, ...]
    method: str = "dense"

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, state: int) -> float:
        return self.probs[state]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs)

    def residual(self, q: Generator) -> float:
        """Max-norm of pi Q."""
        return float(np.max(np.abs(q.to_sparse().T @ self.as_array()))) if self.probs else 0.0

    def class_sums(self, partition: "Partition") -> List[float]:
        """Probability mass of each block, in block order."""
        return [sum(self.probs[i] for i in block) for block in partition.blocks]


def build_generator(g: DerivationGraph) -> Generator:
    """
    Assemble Q from a derivation graph, summing arcs regardless of action.

    Self-loops do not contribute.

    Raises:
        PassiveRateReachable: some transition still carries a passive rate
    """
    off_diag: Dict[Tuple[int, int], Fraction] = defaultdict(Fraction)
    for transition in g.transitions:
        if transition.rate.passive:
            raise PassiveRateReachable(transition.source, transition.action)
        if transition.source != transition.target:
            off_diag[(transition.source, transition.target)] += transition.rate.value
    generator = Generator(n=g.size, off_diag=dict(off_diag))
    logger.debug(f"Built generator with {g.size} states and {len(off_diag)} off-diagonal entries")
    return generator


def conditional_rate(g: DerivationGraph, i: int, j: int, action: str) -> Optional[Rate]:
    """q(Pi, Pj, action); None stands for zero. Self-loops count."""
    return rate_sum(t.rate for t in g.outgoing(i) if t.target == j and t.action == action)


def total_conditional_rate(g: DerivationGraph, i: int, states: AbstractSet[int],
                           action: str) -> Optional[Rate]:
    """q[Pi, S, action]: the conditional rates from Pi summed over S."""
    return rate_sum(t.rate for t in g.outgoing(i) if t.target in states and t.action == action)


def _check_irreducible(q: Generator):
    if q.n == 1:
        return
    graph = q.to_digraph()
    if nx.is_strongly_connected(graph):
        return
    terminal = sorted(sorted(component) for component in nx.attracting_components(graph))
    logger.error(f"Chain with {q.n} states is not irreducible")
    raise NotIrreducible(terminal)


def _solve_dense(q: Generator) -> np.ndarray:
    # Balance equations pi Q = 0 transposed; the last one is replaced by sum(pi) = 1.
    system = q.to_dense().T
    system[-1, :] = 1.0
    rhs = np.zeros(q.n)
    rhs[-1] = 1.0
    try:
        factors = lu_factor(system, check_finite=True)
        solution = lu_solve(factors, rhs)
    except (LinAlgError, ValueError) as e:
        raise SingularSystem(f"balance equations could not be solved: {e}") from e
    if not np.all(np.isfinite(solution)):
        raise SingularSystem("balance equations are singular")
    return solution


def _solve_iterative(q: Generator) -> np.ndarray:
    uniformization = UNIFORMIZATION_FACTOR * max(abs(float(d)) for d in q.diag)
    if uniformization == 0:
        return np.full(q.n, 1.0 / q.n)
    step = (sp.identity(q.n, format="csr") + q.to_sparse() / uniformization).T.tocsr()
    probs = np.full(q.n, 1.0 / q.n)
    for iteration in range(1, ITERATIVE_MAX_ITERATIONS + 1):
        updated = step @ probs
        updated /= updated.sum()
        if np.max(np.abs(updated - probs)) < ITERATIVE_TOLERANCE:
            logger.info(f"Power iteration converged after {iteration} iterations")
            return updated
        probs = updated
    raise SolverDidNotConverge(
        f"power iteration did not converge within {ITERATIVE_MAX_ITERATIONS} iterations"
    )


def steady_state(q: Generator, method: str = "auto") -> SteadyState:
    """
    Solve pi Q = 0 with sum(pi) = 1.

    Args:
        q: Generator of an irreducible chain
        method: 'dense' (LU with partial pivoting), 'iterative' (power
            iteration on the uniformised chain) or 'auto' (dense up to
            DENSE_SOLVER_LIMIT states)

    Raises:
        NotIrreducible: the chain has more than one communicating class
        SingularSystem: the dense solve failed
        SolverDidNotConverge: the iterative solve ran out of iterations
    """
    if method not in SOLVER_METHODS:
        raise ValueError(f"unknown solver method {method!r}; expected one of {SOLVER_METHODS}")
    if q.n < 1:
        raise ValueError("generator has no states")
    _check_irreducible(q)

    if method == "auto":
        method = "dense" if q.n <= DENSE_SOLVER_LIMIT else "iterative"
    logger.info(f"Solving steady state of {q.n} states with the {method} solver")
    solution = _solve_dense(q) if method == "dense" else _solve_iterative(q)

    solution = np.clip(solution, 0.0, None)
    solution /= solution.sum()
    result = SteadyState(probs=tuple(float(p) for p in solution), method=method)

    total = sum(result.probs)
    if abs(total - 1.0) > PROBABILITY_TOLERANCE:
        logger.warning(f"Steady state sums to {total}")
    residual = result.residual(q)
    if residual > RESIDUAL_TOLERANCE:
        logger.warning(f"Steady state residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE}")
    return result


def quotient_generator(q: Generator, partition: "Partition") -> Generator:
    """
    Generator of the lumped chain.

    The rate from block B to another block C is q[P, C] for the smallest
    state P of B; every member of B agrees for a lumpable partition.
    """
    blocks: Sequence[Sequence[int]] = partition.blocks
    block_of = partition.block_of
    representatives = {min(block): b for b, block in enumerate(blocks)}
    off_diag: Dict[Tuple[int, int], Fraction] = defaultdict(Fraction)
    for (i, j), value in q.off_diag.items():
        b = representatives.get(i)
        if b is not None and block_of[j] != b:
            off_diag[(b, block_of[j])] += value
    return Generator(n=len(blocks), off_diag=dict(off_diag))
