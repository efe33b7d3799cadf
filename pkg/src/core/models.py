"""
Data models for PEPA components.

This module defines the core data structures used throughout the toolkit:
exact rates (finite or passive), activities, the abstract syntax of process
terms and the model environment holding constant definitions together with
the high/low partition of action types.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import total_ordering
from types import MappingProxyType
from typing import FrozenSet, Iterable, Iterator, Mapping, Optional, Set, Union

from core.exceptions import MixedRateSum, UndefinedConstant
from utils.constants import TAU, TOP_SYMBOL

RationalLike = Union[int, str, Fraction]


class ActionClass(Enum):
    """Security level of an action type."""
    TAU = "tau"
    HIGH = "high"
    LOW = "low"


@total_ordering
@dataclass(frozen=True)
class Rate:
    """
    Exponential rate of an activity.

    A finite rate is a positive rational. A passive rate stands for
    ``weight * T`` where T is the unspecified rate; every finite rate is
    smaller than every passive one.
    """
    value: Fraction
    passive: bool = False

    def __post_init__(self):
        value = Fraction(self.value)
        if value <= 0:
            kind = "passive weight" if self.passive else "rate"
            raise ValueError(f"{kind} must be strictly positive, got {value}")
        object.__setattr__(self, "value", value)

    @classmethod
    def finite(cls, value: RationalLike) -> "Rate":
        return cls(Fraction(value))

    @classmethod
    def top(cls, weight: RationalLike = 1) -> "Rate":
        return cls(Fraction(weight), passive=True)

    def __lt__(self, other: "Rate") -> bool:
        if not isinstance(other, Rate):
            return NotImplemented
        if self.passive != other.passive:
            return not self.passive
        return self.value < other.value

    def __add__(self, other: "Rate") -> "Rate":
        return rate_add(self, other)

    def __truediv__(self, other: "Rate") -> Fraction:
        """Dimensionless ratio of two rates of the same kind."""
        if self.passive != other.passive:
            raise MixedRateSum(self, other)
        return self.value / other.value

    def scale(self, factor: Fraction) -> "Rate":
        return Rate(self.value * factor, self.passive)

    def as_float(self) -> Optional[float]:
        """Float value of a finite rate; None for passive rates."""
        return None if self.passive else float(self.value)

    def __str__(self) -> str:
        if not self.passive:
            return str(self.value)
        if self.value == 1:
            return TOP_SYMBOL
        return f"{self.value}*{TOP_SYMBOL}"


def rate_add(r1: Rate, r2: Rate) -> Rate:
    """
    Add two rates of the same kind.

    Raises:
        MixedRateSum: one operand is finite and the other passive
    """
    if r1.passive != r2.passive:
        raise MixedRateSum(r1, r2)
    return Rate(r1.value + r2.value, r1.passive)


def rate_sum(rates: Iterable[Rate]) -> Optional[Rate]:
    """Sum of rates; None stands for the empty (zero) sum."""
    total: Optional[Rate] = None
    for rate in rates:
        total = rate if total is None else rate_add(total, rate)
    return total


@dataclass(frozen=True)
class Activity:
    """An action type paired with its rate."""
    action: str
    rate: Rate


def _action_set(actions: Iterable[str], operator: str) -> FrozenSet[str]:
    result = frozenset(actions)
    if TAU in result:
        raise ValueError(f"{TAU} may not appear in a {operator} set")
    return result


def _seal(term, *parts) -> None:
    """Store the hash of a term; children already carry theirs."""
    object.__setattr__(term, "_hash", hash((type(term).__name__,) + parts))


@dataclass(frozen=True)
class Prefix:
    activity: Activity
    continuation: "ProcessTerm"
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _seal(self, self.activity, self.continuation)

    def __hash__(self) -> int:
        return self._hash


@dataclass(frozen=True)
class Choice:
    left: "ProcessTerm"
    right: "ProcessTerm"
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _seal(self, self.left, self.right)

    def __hash__(self) -> int:
        return self._hash


@dataclass(frozen=True)
class Cooperation:
    left: "ProcessTerm"
    coop_set: FrozenSet[str]
    right: "ProcessTerm"
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coop_set", _action_set(self.coop_set, "cooperation"))
        _seal(self, self.left, self.coop_set, self.right)

    def __hash__(self) -> int:
        return self._hash


@dataclass(frozen=True)
class Hiding:
    inner: "ProcessTerm"
    hide_set: FrozenSet[str]
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "hide_set", _action_set(self.hide_set, "hiding"))
        _seal(self, self.inner, self.hide_set)

    def __hash__(self) -> int:
        return self._hash


@dataclass(frozen=True)
class Constant:
    name: str
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _seal(self, self.name)

    def __hash__(self) -> int:
        return self._hash


ProcessTerm = Union[Prefix, Choice, Cooperation, Hiding, Constant]


def choice_branches(term: ProcessTerm) -> Iterator[ProcessTerm]:
    """Left-to-right operands of a nest of choices; any other term is its own branch."""
    stack = [term]
    while stack:
        current = stack.pop()
        if isinstance(current, Choice):
            stack.append(current.right)
            stack.append(current.left)
        else:
            yield current


def subterms(term: ProcessTerm) -> Iterator[ProcessTerm]:
    """Pre-order walk over a term tree; constants are not unfolded."""
    stack = [term]
    while stack:
        current = stack.pop()
        yield current
        if isinstance(current, Prefix):
            stack.append(current.continuation)
        elif isinstance(current, (Choice, Cooperation)):
            stack.append(current.right)
            stack.append(current.left)
        elif isinstance(current, Hiding):
            stack.append(current.inner)


def referenced_constants(term: ProcessTerm) -> Set[str]:
    return {t.name for t in subterms(term) if isinstance(t, Constant)}


@dataclass(frozen=True)
class ModelEnv:
    """
    A complete model: constant definitions, the designated system component
    and the set of high-level action types.
    """
    defs: Mapping[str, ProcessTerm]
    system: ProcessTerm
    high: FrozenSet[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "defs", MappingProxyType(dict(self.defs)))
        object.__setattr__(self, "high", _action_set(self.high, "high"))

    def lookup(self, name: str) -> ProcessTerm:
        try:
            return self.defs[name]
        except KeyError:
            raise UndefinedConstant(name) from None

    def classify(self, action: str) -> ActionClass:
        return classify(self, action)

    def with_system(self, system: ProcessTerm) -> "ModelEnv":
        return ModelEnv(defs=self.defs, system=system, high=self.high)

    def with_high(self, high: Iterable[str]) -> "ModelEnv":
        return ModelEnv(defs=self.defs, system=self.system, high=frozenset(high))

    def with_defs(self, extra: Mapping[str, ProcessTerm]) -> "ModelEnv":
        merged = dict(self.defs)
        merged.update(extra)
        return ModelEnv(defs=merged, system=self.system, high=self.high)

    def action_types(self) -> Set[str]:
        """Every action type occurring in a prefix of the model."""
        actions = set()
        for body in list(self.defs.values()) + [self.system]:
            for t in subterms(body):
                if isinstance(t, Prefix):
                    actions.add(t.activity.action)
        return actions


def classify(env: ModelEnv, action: str) -> ActionClass:
    """Classify an action type as tau, high or low."""
    if action == TAU:
        return ActionClass.TAU
    if action in env.high:
        return ActionClass.HIGH
    return ActionClass.LOW
