"""Recovering retention parameters from observed allocations.

Given a problem and an observed feasible, non-wasteful allocation, the
sequential recursion that defines the geometric rules can be inverted one
agent at a time: walk the network downstream, maintain each agent's
disposable inflow, and divide the observed award by it.  That recovery is
exact.  Fitting a single uniform retention to an observation that no single
parameter explains is a numerical side quest and is done in floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .core import (
    Allocation,
    InfeasibleObservation,
    NotRationalizable,
    Problem,
    QuantityLike,
    RiverShareError,
    ZeroTotal,
    immediate_upstream,
    quantity,
    topological_order,
    validate_allocation,
)

ZERO = Fraction(0)

FLAG_EXACT = "exact"
FLAG_INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class RationalizationResult:
    """Retention vector that reproduces an observed allocation exactly.

    Agents whose disposable inflow is zero are marked ``indeterminate``: no
    water reaches them, any retention reproduces their (necessarily zero)
    award, and the recovered entry is fixed at 0 by convention.
    ``disposable`` traces the per-agent disposable inflow of the recursion.
    """

    alpha: tuple[Fraction, ...]
    flags: tuple[str, ...]
    disposable: tuple[Fraction, ...]

    @property
    def fully_determined(self) -> bool:
        return all(flag == FLAG_EXACT for flag in self.flags)


@dataclass(frozen=True)
class FitResult:
    """Best uniform retention in least squares; approximate by design."""

    gamma: float
    loss: float
    iterations: int


def _validated(problem: Problem, observed: Allocation) -> None:
    try:
        validate_allocation(problem, observed)
    except RiverShareError as exc:
        raise InfeasibleObservation(str(exc)) from exc


def rationalize_alpha(problem: Problem, observed: Allocation) -> RationalizationResult:
    """Recover the retention vector under which the transfer recursion
    reproduces ``observed`` exactly.

    Every feasible, non-wasteful allocation is rationalizable; the two
    ``NotRationalizable`` branches guard the arithmetic and are unreachable
    once validation has passed.
    """
    _validated(problem, observed)
    net = problem.network
    n = net.size
    alpha: dict[int, Fraction] = {}
    flags: dict[int, str] = {}
    disposable: dict[int, Fraction] = {}
    for i in topological_order(net):
        d = problem.inflows[i - 1] + sum(
            (disposable[u] - observed.amounts[u - 1] for u in immediate_upstream(net, i)),
            ZERO,
        )
        disposable[i] = d
        z = observed.amounts[i - 1]
        if i == net.sink:
            if z != d:
                raise NotRationalizable(
                    f"the sink would have to absorb {d}, but the observation "
                    f"gives it {z}"
                )
            alpha[i] = Fraction(1)
            flags[i] = FLAG_EXACT
        elif d == 0:
            alpha[i] = ZERO
            flags[i] = FLAG_INDETERMINATE
        else:
            if z > d:
                raise NotRationalizable(
                    f"agent {i} is observed taking {z} out of a disposable "
                    f"inflow of {d}"
                )
            alpha[i] = z / d
            flags[i] = FLAG_EXACT
    agents = range(1, n + 1)
    return RationalizationResult(
        tuple(alpha[i] for i in agents),
        tuple(flags[i] for i in agents),
        tuple(disposable[i] for i in agents),
    )


def scale_withdrawals(
    raw: Sequence[QuantityLike], target_total: QuantityLike
) -> tuple[Fraction, ...]:
    """Rescale a withdrawal vector so it sums exactly to ``target_total``,
    preserving all pairwise proportions."""
    values = tuple(quantity(v) for v in raw)
    total = sum(values, ZERO)
    if total == 0:
        raise ZeroTotal("cannot scale a vector whose total is zero")
    factor = quantity(target_total) / total
    return tuple(v * factor for v in values)


# ---------------------------------------------------------------------------
# Uniform-retention least squares fit (floats)
# ---------------------------------------------------------------------------

GRID_POINTS = 65
REFINE_WIDTH = 1e-9
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _uniform_retention_loss(problem: Problem, observed: Allocation) -> Callable[[float], float]:
    net = problem.network
    order = topological_order(net)
    upstream = {i: immediate_upstream(net, i) for i in order}
    sink = net.sink
    inflows = [float(e) for e in problem.inflows]
    target = [float(z) for z in observed.amounts]

    def loss(gamma: float) -> float:
        disposable: dict[int, float] = {}
        awarded: dict[int, float] = {}
        for i in order:
            d = inflows[i - 1] + sum(
                disposable[u] - awarded[u] for u in upstream[i]
            )
            disposable[i] = d
            awarded[i] = d if i == sink else gamma * d
        return sum((awarded[i] - target[i - 1]) ** 2 for i in net.agents)

    return loss


def fit_gamma(problem: Problem, observed: Allocation) -> FitResult:
    """Least-squares fit of a single uniform retention in [0, 1].

    Seeds with a 65-point uniform grid, then refines the bracketing interval
    around the best grid point by golden-section search down to a width of
    1e-9.  The returned loss is never worse than the best grid point's.
    """
    _validated(problem, observed)
    loss = _uniform_retention_loss(problem, observed)
    evaluations = 0

    def measured(g: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return loss(g)

    grid = [j / (GRID_POINTS - 1) for j in range(GRID_POINTS)]
    losses = [measured(g) for g in grid]
    best = min(range(GRID_POINTS), key=lambda j: (losses[j], j))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, GRID_POINTS - 1)]

    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = measured(c)
    fd = measured(d)
    while b - a > REFINE_WIDTH:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = measured(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = measured(d)
    gamma = min(max((a + b) / 2.0, 0.0), 1.0)
    final = measured(gamma)
    if final > losses[best]:
        gamma, final = grid[best], losses[best]
    return FitResult(gamma=gamma, loss=final, iterations=evaluations)
