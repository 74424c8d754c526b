"""Domain model for river-sharing problems.

Agents sit on a river network (a line, or more generally an in-tree draining
to a single sink).  Each agent has a nonnegative inflow, and an allocation
assigns each agent a nonnegative amount of water.  All arithmetic is exact
rational arithmetic: the allocation axioms checked elsewhere in this package
are equalities, and floating point would silently mask violations.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

#: Exact nonnegative rational amount of water (km3/year in the Nile data).
Quantity = Fraction

QuantityLike = Union[Fraction, int, str]


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class RiverShareError(Exception):
    """Base class for all domain errors raised by this package."""


class TooFewAgents(RiverShareError):
    """Networks need at least three agents."""


class MultipleSinks(RiverShareError):
    """More than one agent has no successor."""


class Cycle(RiverShareError):
    """The successor relation contains a cycle."""


class Disconnected(RiverShareError):
    """Some agent cannot reach the sink."""


class UnknownAgent(RiverShareError):
    """Agent index outside 1..n."""


class NotLinear(RiverShareError):
    """Operation is defined only on linear networks."""


class BadParameter(RiverShareError):
    """Rule or check parameter outside its admissible range."""


class FeasibilityViolation(RiverShareError):
    """An upstream closure is allocated more water than flows into it."""

    def __init__(self, agent: int, allocated: Fraction, available: Fraction):
        self.agent = agent
        self.allocated = allocated
        self.available = available
        super().__init__(
            f"allocation over upstream closure of agent {agent} is "
            f"{allocated}, exceeding available inflow {available}"
        )


class WastefulnessViolation(RiverShareError):
    """Total allocation differs from total inflow."""

    def __init__(self, total_allocated: Fraction, total_inflow: Fraction):
        self.total_allocated = total_allocated
        self.total_inflow = total_inflow
        super().__init__(
            f"total allocation {total_allocated} != total inflow {total_inflow}"
        )


class InfeasibleObservation(RiverShareError):
    """Observed allocation fails feasibility or non-wastefulness."""


class NotRationalizable(RiverShareError):
    """Observed allocation cannot be produced by any retention vector."""


class ZeroTotal(RiverShareError):
    """Scaling requires a strictly positive total."""


class ParseError(RiverShareError, ValueError):
    """Malformed document or numeric literal."""


class MixedNetworks(RiverShareError):
    """Table rows do not all live on the same network."""


# ---------------------------------------------------------------------------
# Quantities
# ---------------------------------------------------------------------------

def quantity(value: QuantityLike) -> Fraction:
    """Coerce ``value`` to an exact nonnegative rational.

    Accepts Fraction, int, and strings in either decimal ("16.8") or
    fraction ("84/5") form.  Floats are rejected: binary floats do not carry
    the exact decimal the caller meant, so they must be spelled as strings.
    """
    if isinstance(value, bool):
        raise ParseError(f"not a quantity: {value!r}")
    if isinstance(value, float):
        raise ParseError(
            f"refusing float {value!r}: pass a string such as '{value!r}' "
            "to keep arithmetic exact"
        )
    if isinstance(value, Fraction):
        q = value
    elif isinstance(value, int):
        q = Fraction(value)
    elif isinstance(value, str):
        try:
            q = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational number: {value!r}") from exc
    else:
        raise ParseError(f"not a quantity: {value!r}")
    if q < 0:
        raise ParseError(f"quantities must be nonnegative, got {q}")
    return q


def _quantities(values: Iterable[QuantityLike]) -> tuple[Fraction, ...]:
    return tuple(quantity(v) for v in values)


# ---------------------------------------------------------------------------
# Networks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiverNetwork:
    """Agents 1..n whose successor relation forms an in-tree to one sink.

    ``successors[i-1]`` is the agent immediately downstream of agent ``i``,
    or ``None`` for the sink.  On linear networks lower index means further
    upstream.  Construction does not validate; call :func:`validate_network`
    (``Problem`` does so automatically).
    """

    successors: tuple[Optional[int], ...]
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "successors", tuple(self.successors))
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(self.successors):
                raise ParseError(
                    f"{len(labels)} labels for {len(self.successors)} agents"
                )
            object.__setattr__(self, "labels", labels)

    @classmethod
    def line(cls, n: int, labels: Optional[Sequence[str]] = None) -> "RiverNetwork":
        """Linear network 1 -> 2 -> ... -> n."""
        succ: tuple[Optional[int], ...] = tuple(
            i + 1 if i < n else None for i in range(1, n + 1)
        )
        return cls(succ, tuple(labels) if labels is not None else None)

    @classmethod
    def from_successor_map(
        cls,
        n: int,
        successor: Mapping[int, int],
        labels: Optional[Sequence[str]] = None,
    ) -> "RiverNetwork":
        """Build from a partial map; agents absent from the map are sinks."""
        succ = tuple(successor.get(i) for i in range(1, n + 1))
        return cls(succ, tuple(labels) if labels is not None else None)

    @property
    def size(self) -> int:
        return len(self.successors)

    @property
    def agents(self) -> range:
        return range(1, self.size + 1)

    @property
    def sink(self) -> int:
        sinks = [i for i in self.agents if self.successors[i - 1] is None]
        if not sinks:
            raise Cycle("every agent has a successor, so the network cycles")
        if len(sinks) > 1:
            raise MultipleSinks(f"agents {sinks} all lack a successor")
        return sinks[0]

    @property
    def is_linear(self) -> bool:
        n = self.size
        return self.successors == tuple(
            i + 1 if i < n else None for i in range(1, n + 1)
        )

    def successor_of(self, agent: int) -> Optional[int]:
        self.check_agent(agent)
        return self.successors[agent - 1]

    def check_agent(self, agent: int) -> None:
        if not isinstance(agent, int) or isinstance(agent, bool):
            raise UnknownAgent(f"agent index must be an int, got {agent!r}")
        if not 1 <= agent <= self.size:
            raise UnknownAgent(f"agent {agent} outside 1..{self.size}")

    def label_of(self, agent: int) -> str:
        self.check_agent(agent)
        if self.labels is not None:
            return self.labels[agent - 1]
        return str(agent)


def validate_network(net: RiverNetwork) -> str:
    """Check the in-tree invariants; return ``"linear"`` or ``"tree"``.

    Raises TooFewAgents, MultipleSinks, Cycle, or Disconnected.
    """
    n = net.size
    if n < 3:
        raise TooFewAgents(f"need at least 3 agents, got {n}")
    for i in net.agents:
        succ = net.successors[i - 1]
        if succ is None:
            continue
        if not isinstance(succ, int) or not 1 <= succ <= n:
            raise Disconnected(f"successor of agent {i} is unknown agent {succ!r}")
        if succ == i:
            raise Cycle(f"agent {i} is its own successor")
    sink = net.sink  # raises Cycle (no sink) or MultipleSinks
    # Every agent must reach the sink without revisiting a node.
    reaches: set[int] = {sink}
    for i in net.agents:
        trail = []
        j: Optional[int] = i
        seen = set()
        while j is not None and j not in reaches:
            if j in seen:
                raise Cycle(f"agents {sorted(seen)} form a cycle")
            seen.add(j)
            trail.append(j)
            j = net.successors[j - 1]
        if j is None and trail and trail[-1] != sink:
            raise MultipleSinks(f"agent {trail[-1]} is a second sink")
        reaches.update(trail)
    return "linear" if net.is_linear else "tree"


def upstream_closure(net: RiverNetwork, agent: int) -> frozenset[int]:
    """All agents whose path to the sink passes through ``agent``, inclusive."""
    net.check_agent(agent)
    preds: dict[int, list[int]] = {i: [] for i in net.agents}
    for j in net.agents:
        succ = net.successors[j - 1]
        if succ is not None:
            preds[succ].append(j)
    closure = {agent}
    frontier = [agent]
    while frontier:
        k = frontier.pop()
        for j in preds[k]:
            if j not in closure:
                closure.add(j)
                frontier.append(j)
    return frozenset(closure)


def downstream_path(net: RiverNetwork, agent: int) -> tuple[int, ...]:
    """The successor chain from ``agent`` to the sink, inclusive of both."""
    net.check_agent(agent)
    path = [agent]
    j = net.successors[agent - 1]
    while j is not None:
        path.append(j)
        if len(path) > net.size:
            raise Cycle("successor chain does not terminate")
        j = net.successors[j - 1]
    return tuple(path)


def immediate_upstream(net: RiverNetwork, agent: int) -> tuple[int, ...]:
    """Agents whose successor is ``agent``, in index order."""
    net.check_agent(agent)
    return tuple(j for j in net.agents if net.successors[j - 1] == agent)


def topological_order(net: RiverNetwork) -> tuple[int, ...]:
    """Upstream-before-downstream order, smallest index first among ready agents."""
    indegree = {i: 0 for i in net.agents}
    for j in net.agents:
        succ = net.successors[j - 1]
        if succ is not None:
            indegree[succ] += 1
    ready = [i for i in net.agents if indegree[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        i = heapq.heappop(ready)
        order.append(i)
        succ = net.successors[i - 1]
        if succ is not None:
            indegree[succ] -= 1
            if indegree[succ] == 0:
                heapq.heappush(ready, succ)
    if len(order) != net.size:
        raise Cycle("successor relation is not acyclic")
    return tuple(order)


# ---------------------------------------------------------------------------
# Problems and allocations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    """A river network together with one exact inflow per agent."""

    network: RiverNetwork
    inflows: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        validate_network(self.network)
        inflows = _quantities(self.inflows)
        if len(inflows) != self.network.size:
            raise ParseError(
                f"{len(inflows)} inflows for {self.network.size} agents"
            )
        object.__setattr__(self, "inflows", inflows)

    @property
    def n(self) -> int:
        return self.network.size

    @property
    def total_inflow(self) -> Fraction:
        return sum(self.inflows, Fraction(0))

    def inflow(self, agent: int) -> Fraction:
        self.network.check_agent(agent)
        return self.inflows[agent - 1]

    def with_inflow(self, agent: int, value: QuantityLike) -> "Problem":
        """A copy of this problem with one inflow replaced."""
        self.network.check_agent(agent)
        new = list(self.inflows)
        new[agent - 1] = quantity(value)
        return Problem(self.network, tuple(new))

    def scaled(self, factor: QuantityLike) -> "Problem":
        f = quantity(factor)
        return Problem(self.network, tuple(e * f for e in self.inflows))


def line_problem(inflows: Sequence[QuantityLike]) -> Problem:
    """Convenience constructor for a linear problem."""
    return Problem(RiverNetwork.line(len(inflows)), _quantities(inflows))


@dataclass(frozen=True)
class Allocation:
    """Per-agent water rights; validate against a problem before trusting."""

    amounts: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "amounts", _quantities(self.amounts))

    @property
    def total(self) -> Fraction:
        return sum(self.amounts, Fraction(0))

    def amount(self, agent: int) -> Fraction:
        if not 1 <= agent <= len(self.amounts):
            raise UnknownAgent(f"agent {agent} outside 1..{len(self.amounts)}")
        return self.amounts[agent - 1]


def validate_allocation(problem: Problem, allocation: Allocation) -> None:
    """Raise unless ``allocation`` is feasible and non-wasteful for ``problem``.

    Feasibility is checked at every upstream closure in agent index order, so
    the reported violation is the minimal violating closure.  On a linear
    network the closures are the prefixes 1..k.
    """
    net = problem.network
    if len(allocation.amounts) != net.size:
        raise BadParameter(
            f"allocation has {len(allocation.amounts)} entries for "
            f"{net.size} agents"
        )
    for i in net.agents:
        closure = upstream_closure(net, i)
        allocated = sum((allocation.amounts[k - 1] for k in closure), Fraction(0))
        available = sum((problem.inflows[k - 1] for k in closure), Fraction(0))
        if allocated > available:
            raise FeasibilityViolation(i, allocated, available)
    if allocation.total != problem.total_inflow:
        raise WastefulnessViolation(allocation.total, problem.total_inflow)


def is_valid_allocation(problem: Problem, allocation: Allocation) -> bool:
    try:
        validate_allocation(problem, allocation)
    except RiverShareError:
        return False
    return True


def source_of(problem: Problem) -> Optional[int]:
    """Most upstream agent in 1..n-1 with positive inflow; None if all zero.

    Defined only on linear networks; raises NotLinear otherwise.
    """
    if not problem.network.is_linear:
        raise NotLinear("the source of a river is defined on linear networks only")
    for k in range(1, problem.n):
        if problem.inflows[k - 1] > 0:
            return k
    return None
