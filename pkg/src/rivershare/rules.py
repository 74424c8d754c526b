"""Allocation rules for river-sharing problems.

Every rule maps a problem to a feasible, non-wasteful allocation.  The
workhorse is the geometric transfer scheme: walking the network from the
headwaters down, each agent keeps a fixed fraction of its disposable inflow
(own inflow plus whatever arrived from immediately upstream) and passes the
rest to its successor; the sink keeps everything that reaches it.  The other
families here are either special cases of that scheme (uniform retention,
serial division) or closed-form additive rules defined on lines only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

from .core import (
    Allocation,
    BadParameter,
    NotLinear,
    ParseError,
    Problem,
    QuantityLike,
    RiverNetwork,
    downstream_path,
    immediate_upstream,
    quantity,
    topological_order,
)

ONE = Fraction(1)
ZERO = Fraction(0)


def _unit_fraction(value: QuantityLike, *, allow_one: bool = True) -> Fraction:
    try:
        q = quantity(value)
    except ParseError as exc:
        raise BadParameter(f"bad retention fraction: {exc}") from exc
    if q > 1 or (q == 1 and not allow_one):
        top = "1" if allow_one else "1 (exclusive)"
        raise BadParameter(f"retention fraction {q} outside 0..{top}")
    return q


# ---------------------------------------------------------------------------
# Rule specifications
# ---------------------------------------------------------------------------

class RuleSpec:
    """Marker base class for the closed set of rule families below."""

    __slots__ = ()


@dataclass(frozen=True)
class NoTransfer(RuleSpec):
    """Each agent keeps exactly its own inflow (absolute sovereignty)."""


@dataclass(frozen=True)
class FullTransfer(RuleSpec):
    """Every drop is passed along; the sink receives the whole river."""


@dataclass(frozen=True)
class Geometric(RuleSpec):
    """Uniform retention: every non-sink agent keeps ``retain`` of its
    disposable inflow.  retain=1 is no-transfer, retain=0 is full-transfer."""

    retain: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "retain", _unit_fraction(self.retain))


@dataclass(frozen=True)
class MultiGeometric(RuleSpec):
    """Agent-specific retention fractions; the sink's entry must be 1."""

    retain: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        retain = tuple(_unit_fraction(r) for r in self.retain)
        if not retain or retain[-1] != 1:
            raise BadParameter("the most downstream retention must be exactly 1")
        object.__setattr__(self, "retain", retain)


@dataclass(frozen=True)
class Serial(RuleSpec):
    """Each inflow is split equally over its owner and all agents downstream."""


@dataclass(frozen=True)
class Beta(RuleSpec):
    """No-transfer upstream of a pivot agent, free retention at the pivot,
    serial-style retention below it."""

    pivot: int
    retain: Fraction

    def __post_init__(self) -> None:
        if not isinstance(self.pivot, int) or isinstance(self.pivot, bool) or self.pivot < 1:
            raise BadParameter(f"pivot must be a positive agent index, got {self.pivot!r}")
        object.__setattr__(
            self, "retain", _unit_fraction(self.retain, allow_one=False)
        )


@dataclass(frozen=True)
class AdditiveDelta(RuleSpec):
    """Additive rule on lines: agent i keeps retain_i of its own inflow and
    the unretained part of each upstream inflow is split equally among the
    agents strictly downstream of it."""

    retain: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        retain = tuple(_unit_fraction(r) for r in self.retain)
        if not retain or retain[-1] != 1:
            raise BadParameter("the most downstream retention must be exactly 1")
        object.__setattr__(self, "retain", retain)


@dataclass(frozen=True)
class Lambda(RuleSpec):
    """One-parameter additive rule on lines: keep ``retain`` of your own
    inflow, and receive equal splits of the unretained upstream inflows."""

    retain: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "retain", _unit_fraction(self.retain))


@dataclass(frozen=True)
class BlackBoxRule:
    """Opaque deterministic evaluator, used by the characterization tests."""

    fn: Callable[[Problem], Allocation]
    name: str = ""


Rule = Union[RuleSpec, BlackBoxRule, Callable[[Problem], Allocation]]


# ---------------------------------------------------------------------------
# Evaluators
# ---------------------------------------------------------------------------

def _retain_vector(problem: Problem, retain: Sequence[QuantityLike]) -> tuple[Fraction, ...]:
    net = problem.network
    if len(retain) != net.size:
        raise BadParameter(
            f"{len(retain)} retention fractions for {net.size} agents"
        )
    vec = tuple(_unit_fraction(r) for r in retain)
    if vec[net.sink - 1] != 1:
        raise BadParameter("the sink's retention fraction must be exactly 1")
    return vec


def geometric_recursive(problem: Problem, retain: Sequence[QuantityLike]) -> Allocation:
    """Run the downstream-transfer recursion with per-agent retentions.

    Agents are processed in topological order.  An agent's disposable inflow
    is its own inflow plus the residuals (disposable minus retained) of all
    immediately upstream agents; it keeps ``retain[i]`` times that, and the
    sink keeps its full disposable inflow.
    """
    net = problem.network
    vec = _retain_vector(problem, retain)
    disposable: dict[int, Fraction] = {}
    amounts: dict[int, Fraction] = {}
    for i in topological_order(net):
        d = problem.inflows[i - 1] + sum(
            (disposable[u] - amounts[u] for u in immediate_upstream(net, i)),
            ZERO,
        )
        disposable[i] = d
        amounts[i] = d if i == net.sink else vec[i - 1] * d
    return Allocation(tuple(amounts[i] for i in net.agents))


def geometric_closed_form(problem: Problem, gamma: QuantityLike) -> Allocation:
    """Direct power-series form of the uniform-retention rule (lines only)."""
    if not problem.network.is_linear:
        raise NotLinear("the closed form is stated for linear networks")
    g = _unit_fraction(gamma)
    n = problem.n
    e = problem.inflows
    amounts = []
    for i in range(1, n):
        acc = e[i - 1]
        for k in range(1, i):
            acc += (1 - g) ** (i - k) * e[k - 1]
        amounts.append(g * acc)
    sink = e[n - 1]
    for k in range(1, n):
        sink += (1 - g) ** (n - k) * e[k - 1]
    amounts.append(sink)
    return Allocation(tuple(amounts))


def serial(problem: Problem) -> Allocation:
    """Split each agent's inflow equally over its downstream path (inclusive)."""
    net = problem.network
    amounts = [ZERO] * net.size
    for j in net.agents:
        path = downstream_path(net, j)
        share = problem.inflows[j - 1] / len(path)
        for i in path:
            amounts[i - 1] += share
    return Allocation(tuple(amounts))


def serial_retentions(net: RiverNetwork) -> tuple[Fraction, ...]:
    """Retention vector under which the transfer recursion reproduces the
    serial rule: one over the downstream-path length, 1 at the sink."""
    vec = []
    for i in net.agents:
        if i == net.sink:
            vec.append(ONE)
        else:
            vec.append(Fraction(1, len(downstream_path(net, i))))
    return tuple(vec)


def beta_alpha_vector(n: int, pivot: int, retain: QuantityLike) -> tuple[Fraction, ...]:
    """Retention vector of a pivot rule: 1 above the pivot, ``retain`` at it,
    1/(n-i+1) strictly below it, and 1 at the sink."""
    if n < 3:
        raise BadParameter(f"need at least 3 agents, got {n}")
    if not 1 <= pivot <= n - 1:
        raise BadParameter(f"pivot {pivot} outside 1..{n - 1}")
    b = _unit_fraction(retain, allow_one=False)
    vec: list[Fraction] = []
    for i in range(1, n + 1):
        if i < pivot:
            vec.append(ONE)
        elif i == pivot:
            vec.append(b)
        elif i < n:
            vec.append(Fraction(1, n - i + 1))
        else:
            vec.append(ONE)
    return tuple(vec)


def beta_delta_vector(n: int, pivot: int, retain: QuantityLike) -> tuple[Fraction, ...]:
    """Additive-form parameters equivalent to :func:`beta_alpha_vector`.

    The two parameterizations happen to coincide entry by entry; having both
    constructors keeps the multiplicative and additive routes independent
    when testing their equivalence.
    """
    if n < 3:
        raise BadParameter(f"need at least 3 agents, got {n}")
    if not 1 <= pivot <= n - 1:
        raise BadParameter(f"pivot {pivot} outside 1..{n - 1}")
    b = _unit_fraction(retain, allow_one=False)
    vec = []
    for i in range(1, n + 1):
        if i < pivot:
            vec.append(ONE)
        elif i == pivot:
            vec.append(b)
        elif i < n:
            vec.append(Fraction(1, n - i + 1))
        else:
            vec.append(ONE)
    return tuple(vec)


def additive_delta(problem: Problem, retain: Sequence[QuantityLike]) -> Allocation:
    """Evaluate the additive rule on a line.

    Agent i gets ``retain[i] * e_i`` plus, for every k upstream, an equal
    1/(n-k) split of the unretained part of ``e_k``.
    """
    if not problem.network.is_linear:
        raise NotLinear("additive rules are defined on linear networks only")
    n = problem.n
    if len(retain) != n:
        raise BadParameter(f"{len(retain)} retention fractions for {n} agents")
    vec = tuple(_unit_fraction(r) for r in retain)
    if vec[-1] != 1:
        raise BadParameter("the sink's retention fraction must be exactly 1")
    e = problem.inflows
    amounts = []
    for i in range(1, n + 1):
        x = vec[i - 1] * e[i - 1]
        for k in range(1, i):
            x += (1 - vec[k - 1]) * e[k - 1] / (n - k)
        amounts.append(x)
    return Allocation(tuple(amounts))


def lambda_rule(problem: Problem, lam: QuantityLike) -> Allocation:
    """Evaluate the one-parameter additive rule on a line."""
    if not problem.network.is_linear:
        raise NotLinear("additive rules are defined on linear networks only")
    weight = _unit_fraction(lam)
    n = problem.n
    e = problem.inflows
    amounts = []
    for i in range(1, n):
        x = weight * e[i - 1]
        for j in range(1, i):
            x += (1 - weight) * e[j - 1] / (n - j)
        amounts.append(x)
    sink = e[n - 1]
    for j in range(1, n):
        sink += (1 - weight) * e[j - 1] / (n - j)
    amounts.append(sink)
    return Allocation(tuple(amounts))


def evaluate(spec: RuleSpec, problem: Problem) -> Allocation:
    """Evaluate a rule family on a problem."""
    net = problem.network
    if isinstance(spec, NoTransfer):
        return Allocation(problem.inflows)
    if isinstance(spec, FullTransfer):
        amounts = [ZERO] * net.size
        amounts[net.sink - 1] = problem.total_inflow
        return Allocation(tuple(amounts))
    if isinstance(spec, Geometric):
        vec = tuple(
            ONE if i == net.sink else spec.retain for i in net.agents
        )
        return geometric_recursive(problem, vec)
    if isinstance(spec, MultiGeometric):
        return geometric_recursive(problem, spec.retain)
    if isinstance(spec, Serial):
        return serial(problem)
    if isinstance(spec, Beta):
        vec = beta_alpha_vector(net.size, spec.pivot, spec.retain)
        return geometric_recursive(problem, vec)
    if isinstance(spec, AdditiveDelta):
        return additive_delta(problem, spec.retain)
    if isinstance(spec, Lambda):
        return lambda_rule(problem, spec.retain)
    raise BadParameter(f"unknown rule spec {spec!r}")


def allocate(rule: Rule, problem: Problem) -> Allocation:
    """Evaluate a RuleSpec, BlackBoxRule, or bare callable."""
    if isinstance(rule, RuleSpec):
        return evaluate(rule, problem)
    if isinstance(rule, BlackBoxRule):
        return rule.fn(problem)
    if callable(rule):
        return rule(problem)
    raise BadParameter(f"not a rule: {rule!r}")


def rule_name(rule: Rule) -> str:
    """Short display name for reports."""
    if isinstance(rule, NoTransfer):
        return "no-transfer"
    if isinstance(rule, FullTransfer):
        return "full-transfer"
    if isinstance(rule, Geometric):
        return f"geometric:{rule.retain}"
    if isinstance(rule, MultiGeometric):
        return "multi:" + ",".join(str(r) for r in rule.retain)
    if isinstance(rule, Serial):
        return "serial"
    if isinstance(rule, Beta):
        return f"beta:{rule.pivot}:{rule.retain}"
    if isinstance(rule, AdditiveDelta):
        return "delta:" + ",".join(str(r) for r in rule.retain)
    if isinstance(rule, Lambda):
        return f"lambda:{rule.retain}"
    if isinstance(rule, BlackBoxRule):
        return rule.name or "black-box"
    return getattr(rule, "__name__", repr(rule))


def recover_alpha(rule: Rule, n: int) -> tuple[Fraction, ...]:
    """Read candidate retention fractions off unit-inflow problems.

    On the linear problem whose only inflow is one unit at agent i, a
    geometric-style rule awards agent i exactly its retention fraction, so
    evaluating the rule on each unit profile recovers the whole vector (the
    sink's entry is 1 by definition).
    """
    if n < 3:
        raise BadParameter(f"need at least 3 agents, got {n}")
    net = RiverNetwork.line(n)
    alphas = []
    for i in range(1, n):
        e = [ZERO] * n
        e[i - 1] = ONE
        value = allocate(rule, Problem(net, tuple(e))).amount(i)
        if not 0 <= value <= 1:
            raise BadParameter(
                f"rule awards {value} on the unit profile at agent {i}; "
                "not a retention fraction"
            )
        alphas.append(value)
    alphas.append(ONE)
    return tuple(alphas)
