"""
Structured operational semantics of PEPA components.

This module implements the transition rules for prefix, choice, hiding,
constants and cooperation (including the apparent-rate formula for shared
activities) and builds derivation graphs by breadth-first exploration.
"""

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Set, Tuple

from core.exceptions import StateSpaceExceeded
from core.models import (
    Activity, Choice, Constant, Cooperation, Hiding, ModelEnv, Prefix, ProcessTerm, Rate,
    choice_branches, rate_sum
)
from core.parser import render_term
from utils.constants import DEFAULT_MAX_STATES, TAU

logger = logging.getLogger(__name__)

Derivation = Tuple[Activity, ProcessTerm]


@dataclass(frozen=True)
class Transition:
    """
    An aggregated arc of a derivation graph.

    ``rate`` is the sum of the rates of ``multiplicity`` distinct
    derivations sharing source, action and target. Finite and passive
    derivations are never merged into one record.
    """
    source: int
    action: str
    rate: Rate
    multiplicity: int
    target: int

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError(f"multiplicity must be positive, got {self.multiplicity}")

    def sort_key(self) -> Tuple[int, str, int, bool]:
        return self.source, self.action, self.target, self.rate.passive


@dataclass(frozen=True)
class DerivationGraph:
    """Labelled multi-transition system over reachable derivatives; state 0 is the root."""
    states: Tuple[ProcessTerm, ...]
    transitions: Tuple[Transition, ...]
    root: int = 0

    @property
    def size(self) -> int:
        return len(self.states)

    @cached_property
    def _outgoing(self) -> Tuple[Tuple[Transition, ...], ...]:
        buckets: List[List[Transition]] = [[] for _ in self.states]
        for transition in self.transitions:
            buckets[transition.source].append(transition)
        return tuple(tuple(bucket) for bucket in buckets)

    def outgoing(self, state: int) -> Tuple[Transition, ...]:
        return self._outgoing[state]

    def actions(self) -> Set[str]:
        return {t.action for t in self.transitions}

    def labels(self) -> List[str]:
        return [render_term(state) for state in self.states]


def aggregate_transitions(records: Iterable[Transition]) -> Tuple[Transition, ...]:
    """
    Merge records sharing (source, action, target, passivity).

    Returns:
        Aggregated records in (source, action, target) order
    """
    grouped: Dict[Tuple[int, str, int, bool], List[Transition]] = {}
    for record in records:
        grouped.setdefault(record.sort_key(), []).append(record)
    merged = []
    for key in sorted(grouped):
        group = grouped[key]
        merged.append(Transition(
            source=key[0],
            action=key[1],
            rate=rate_sum(t.rate for t in group),
            multiplicity=sum(t.multiplicity for t in group),
            target=key[2],
        ))
    return tuple(merged)


class SemanticsEngine:
    """
    Memoising interpreter of the transition rules for one model.

    One-step derivatives and state labels are cached per term, so repeated
    queries during exploration stay cheap.
    """

    def __init__(self, env: ModelEnv):
        self.env = env
        self._steps: Dict[ProcessTerm, Tuple[Derivation, ...]] = {}
        self._labels: Dict[ProcessTerm, str] = {}

    def label(self, term: ProcessTerm) -> str:
        text = self._labels.get(term)
        if text is None:
            text = render_term(term)
            self._labels[term] = text
        return text

    def one_step(self, term: ProcessTerm) -> Tuple[Derivation, ...]:
        """The multiset of (activity, derivative) pairs enabled in term."""
        cached = self._steps.get(term)
        if cached is None:
            cached = tuple(self._derive(term))
            self._steps[term] = cached
        return cached

    def _derive(self, term: ProcessTerm) -> List[Derivation]:
        if isinstance(term, Prefix):
            return [(term.activity, term.continuation)]
        if isinstance(term, Choice):
            derivations = []
            for branch in choice_branches(term):
                derivations.extend(self.one_step(branch))
            return derivations
        if isinstance(term, Constant):
            return list(self.one_step(self.env.lookup(term.name)))
        if isinstance(term, Hiding):
            derivations = []
            for activity, target in self.one_step(term.inner):
                if activity.action in term.hide_set:
                    activity = Activity(TAU, activity.rate)
                derivations.append((activity, Hiding(target, term.hide_set)))
            return derivations
        if isinstance(term, Cooperation):
            return self._derive_cooperation(term)
        raise TypeError(f"not a process term: {term!r}")

    def _derive_cooperation(self, term: Cooperation) -> List[Derivation]:
        left_steps = self.one_step(term.left)
        right_steps = self.one_step(term.right)
        derivations = []
        for activity, target in left_steps:
            if activity.action not in term.coop_set:
                derivations.append((activity, Cooperation(target, term.coop_set, term.right)))
        for activity, target in right_steps:
            if activity.action not in term.coop_set:
                derivations.append((activity, Cooperation(term.left, term.coop_set, target)))

        for action in sorted(term.coop_set):
            left_shared = [(a, t) for a, t in left_steps if a.action == action]
            right_shared = [(a, t) for a, t in right_steps if a.action == action]
            if not left_shared or not right_shared:
                continue
            left_apparent = rate_sum(a.rate for a, _ in left_shared)
            right_apparent = rate_sum(a.rate for a, _ in right_shared)
            bound = min(left_apparent, right_apparent)
            for left_activity, left_target in left_shared:
                for right_activity, right_target in right_shared:
                    share = (left_activity.rate / left_apparent) * (right_activity.rate / right_apparent)
                    derivations.append((
                        Activity(action, bound.scale(share)),
                        Cooperation(left_target, term.coop_set, right_target),
                    ))
        return derivations

    def apparent_rate(self, term: ProcessTerm, action: str) -> Optional[Rate]:
        """
        Total rate at which term performs ``action``; None when not enabled.

        Computed over the term structure rather than from one_step.
        """
        if isinstance(term, Prefix):
            return term.activity.rate if term.activity.action == action else None
        if isinstance(term, Choice):
            return _optional_sum(*(self.apparent_rate(b, action) for b in choice_branches(term)))
        if isinstance(term, Constant):
            return self.apparent_rate(self.env.lookup(term.name), action)
        if isinstance(term, Hiding):
            if action in term.hide_set:
                return None
            if action == TAU:
                hidden = [self.apparent_rate(term.inner, a) for a in sorted(term.hide_set)]
                return _optional_sum(self.apparent_rate(term.inner, TAU), *hidden)
            return self.apparent_rate(term.inner, action)
        if isinstance(term, Cooperation):
            left = self.apparent_rate(term.left, action)
            right = self.apparent_rate(term.right, action)
            if action in term.coop_set:
                if left is None or right is None:
                    return None
                return min(left, right)
            return _optional_sum(left, right)
        raise TypeError(f"not a process term: {term!r}")

    def derive_graph(self, root: Optional[ProcessTerm] = None,
                     max_states: int = DEFAULT_MAX_STATES,
                     aggregate: bool = True) -> DerivationGraph:
        """
        Explore every derivative of root breadth-first.

        States are numbered in discovery order; the new targets of one
        state are discovered in the order of their canonical text.

        Args:
            root: Starting term, defaults to the model's system component
            max_states: Exploration limit
            aggregate: Merge parallel derivations into one record

        Returns:
            The derivation graph rooted at state 0

        Raises:
            StateSpaceExceeded: more than max_states derivatives exist
        """
        if max_states < 1:
            raise ValueError(f"max_states must be at least 1, got {max_states}")
        if root is None:
            root = self.env.system

        index: Dict[ProcessTerm, int] = {root: 0}
        states: List[ProcessTerm] = [root]
        records: List[Transition] = []
        frontier = deque([0])

        while frontier:
            source = frontier.popleft()
            derivations = sorted(
                self.one_step(states[source]),
                key=lambda d: (self.label(d[1]), d[0].action, d[0].rate.passive, d[0].rate.value),
            )
            for activity, target in derivations:
                target_id = index.get(target)
                if target_id is None:
                    if len(states) >= max_states:
                        logger.warning(f"State space exploration stopped at {max_states} states")
                        raise StateSpaceExceeded(max_states)
                    target_id = len(states)
                    index[target] = target_id
                    states.append(target)
                    frontier.append(target_id)
                records.append(Transition(source, activity.action, activity.rate, 1, target_id))

        if aggregate:
            transitions = aggregate_transitions(records)
        else:
            transitions = tuple(sorted(records, key=Transition.sort_key))
        logger.info(f"Derived {len(states)} states and {len(transitions)} transition records")
        return DerivationGraph(states=tuple(states), transitions=transitions)


def _optional_sum(*rates: Optional[Rate]) -> Optional[Rate]:
    return rate_sum(r for r in rates if r is not None)


def one_step(env: ModelEnv, term: ProcessTerm) -> List[Derivation]:
    """The multiset of (activity, derivative) pairs of term, as a list."""
    return list(SemanticsEngine(env).one_step(term))


def apparent_rate(env: ModelEnv, term: ProcessTerm, action: str) -> Optional[Rate]:
    return SemanticsEngine(env).apparent_rate(term, action)


def current_action_types(env: ModelEnv, term: ProcessTerm) -> Set[str]:
    return {activity.action for activity, _ in SemanticsEngine(env).one_step(term)}


def current_activities(env: ModelEnv, term: ProcessTerm) -> List[Activity]:
    return [activity for activity, _ in SemanticsEngine(env).one_step(term)]


def exit_rate(env: ModelEnv, term: ProcessTerm) -> Optional[Rate]:
    """
    Sum of every enabled activity rate; None for a term with no activity.

    Raises:
        MixedRateSum: both finite and passive activities are enabled
    """
    return rate_sum(activity.rate for activity in current_activities(env, term))


def derive_graph(env: ModelEnv, root: Optional[ProcessTerm] = None,
                 max_states: int = DEFAULT_MAX_STATES,
                 aggregate: bool = True) -> DerivationGraph:
    return SemanticsEngine(env).derive_graph(root, max_states, aggregate)
