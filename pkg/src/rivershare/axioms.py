"""Axiom checks, counterexample search, and empirical characterization.

Each check either passes, returns a :class:`Witness` (a concrete instance on
which the axiom's equality fails, with the unequal values), or reports that
the instance did not meet the axiom's hypotheses (``skipped``).  All
comparisons are exact; there are no tolerances anywhere in this module.

Randomized instances come from :class:`ProblemSampler`, a seeded stream of
small-denominator rational inflow profiles.  Identical seeds give identical
streams, so every search and suite is reproducible from its seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

from .core import (
    BadParameter,
    NotLinear,
    Problem,
    QuantityLike,
    RiverNetwork,
    downstream_path,
    quantity,
    source_of,
    upstream_closure,
)
from .rules import MultiGeometric, Rule, allocate, recover_alpha

ZERO = Fraction(0)


class AxiomId(Enum):
    """The closed set of checkable allocation axioms."""

    SCALE_INVARIANCE = "scale-invariance"
    UPSTREAM_INVARIANCE = "upstream-invariance"
    EQUAL_SOURCES = "equal-sources"
    NEUTRALITY = "neutrality"
    PARTIAL_IMPLEMENTATION_INVARIANCE = "partial-implementation-invariance"
    DOWNSTREAM_IMPARTIALITY = "downstream-impartiality"

    @classmethod
    def from_string(cls, text: str) -> "AxiomId":
        for member in cls:
            if member.value == text:
                return member
        raise BadParameter(
            f"unknown axiom {text!r}; choose from "
            + ", ".join(m.value for m in cls)
        )


#: Axioms whose statements only make sense on linear networks.
LINE_ONLY_AXIOMS = frozenset(
    {AxiomId.EQUAL_SOURCES, AxiomId.NEUTRALITY, AxiomId.DOWNSTREAM_IMPARTIALITY}
)


@dataclass(frozen=True)
class Witness:
    """A concrete axiom violation.

    ``problems`` holds the instance(s) the check was run on (original first,
    perturbed/residual/second instance after it, where applicable), so that
    re-running the same check on the stored data reproduces ``lhs != rhs``
    exactly.  ``params`` carries the axiom-specific inputs (scale factor,
    perturbed agent, increment, ...) as key/value pairs.
    """

    axiom: AxiomId
    problems: tuple[Problem, ...]
    agents: tuple[int, ...]
    lhs: Fraction
    rhs: Fraction
    params: tuple[tuple[str, object], ...] = ()

    @property
    def context(self) -> dict:
        return dict(self.params)


class CheckStatus(Enum):
    PASSED = "pass"
    FAILED = "witness"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one axiom check on one instance."""

    status: CheckStatus
    witness: Optional[Witness] = None

    @property
    def passed(self) -> bool:
        return self.status is CheckStatus.PASSED

    @property
    def failed(self) -> bool:
        return self.status is CheckStatus.FAILED

    @property
    def skipped(self) -> bool:
        return self.status is CheckStatus.SKIPPED


_PASS = CheckReport(CheckStatus.PASSED)
_SKIP = CheckReport(CheckStatus.SKIPPED)


def _fail(witness: Witness) -> CheckReport:
    return CheckReport(CheckStatus.FAILED, witness)


# ---------------------------------------------------------------------------
# Individual axiom checks
# ---------------------------------------------------------------------------

def check_scale_invariance(rule: Rule, problem: Problem, rho: QuantityLike) -> CheckReport:
    """Multiplying every inflow by ``rho`` must multiply every award by ``rho``."""
    factor = quantity(rho)
    scaled = problem.scaled(factor)
    base = allocate(rule, problem)
    image = allocate(rule, scaled)
    bad = [
        i
        for i in problem.network.agents
        if image.amount(i) != factor * base.amount(i)
    ]
    if not bad:
        return _PASS
    first = bad[0]
    return _fail(
        Witness(
            AxiomId.SCALE_INVARIANCE,
            (problem, scaled),
            tuple(bad),
            image.amount(first),
            factor * base.amount(first),
            (("rho", factor),),
        )
    )


def check_upstream_invariance(
    rule: Rule, problem: Problem, agent: int, new_value: QuantityLike
) -> CheckReport:
    """Changing agent ``agent``'s inflow must not move any award strictly
    upstream of it.  Vacuously passes when nothing lies upstream."""
    value = quantity(new_value)
    perturbed = problem.with_inflow(agent, value)
    strictly_upstream = sorted(upstream_closure(problem.network, agent) - {agent})
    if not strictly_upstream:
        return _PASS
    base = allocate(rule, problem)
    moved = allocate(rule, perturbed)
    bad = [k for k in strictly_upstream if base.amount(k) != moved.amount(k)]
    if not bad:
        return _PASS
    first = bad[0]
    return _fail(
        Witness(
            AxiomId.UPSTREAM_INVARIANCE,
            (problem, perturbed),
            tuple(bad),
            base.amount(first),
            moved.amount(first),
            (("agent", agent), ("new_value", value)),
        )
    )


def check_equal_sources(rule: Rule, problem: Problem, other: Problem) -> CheckReport:
    """Two rivers whose sources carry the same inflow must award those
    sources the same amount.  Skipped when either source is undefined or the
    source inflows differ (the axiom's hypothesis fails)."""
    if problem.n != other.n:
        raise BadParameter("equal-sources compares problems of the same size")
    s1 = source_of(problem)
    s2 = source_of(other)
    if s1 is None or s2 is None:
        return _SKIP
    if problem.inflow(s1) != other.inflow(s2):
        return _SKIP
    lhs = allocate(rule, problem).amount(s1)
    rhs = allocate(rule, other).amount(s2)
    if lhs == rhs:
        return _PASS
    return _fail(
        Witness(
            AxiomId.EQUAL_SOURCES,
            (problem, other),
            (s1, s2),
            lhs,
            rhs,
            (("source_inflow", problem.inflow(s1)),),
        )
    )


def check_neutrality(rule: Rule, n: int, agent: int, amount: QuantityLike) -> CheckReport:
    """On the profile whose only inflow sits at ``agent``, that agent must
    get exactly the average of the downstream awards."""
    if n < 3:
        raise BadParameter(f"need at least 3 agents, got {n}")
    if not 1 <= agent <= n - 1:
        raise BadParameter(f"supported agent {agent} outside 1..{n - 1}")
    value = quantity(amount)
    if value <= 0:
        raise BadParameter("neutrality needs a strictly positive inflow")
    inflows = [ZERO] * n
    inflows[agent - 1] = value
    problem = Problem(RiverNetwork.line(n), tuple(inflows))
    award = allocate(rule, problem)
    lhs = award.amount(agent)
    rhs = sum((award.amount(k) for k in range(agent + 1, n + 1)), ZERO) / (n - agent)
    if lhs == rhs:
        return _PASS
    return _fail(
        Witness(
            AxiomId.NEUTRALITY,
            (problem,),
            (agent,),
            lhs,
            rhs,
            (("agent", agent), ("amount", value)),
        )
    )


def residual_problem(problem: Problem, agent: int, award) -> Problem:
    """The instance left after paying off everyone upstream of ``agent``.

    Upstream inflows are zeroed and ``agent`` is endowed with its own inflow
    plus everything upstream that the award did not hand out up there.
    """
    net = problem.network
    upstream = upstream_closure(net, agent) - {agent}
    carried = sum(
        (problem.inflow(k) - award.amount(k) for k in upstream), ZERO
    )
    inflows = list(problem.inflows)
    for k in upstream:
        inflows[k - 1] = ZERO
    inflows[agent - 1] = problem.inflow(agent) + carried
    return Problem(net, tuple(inflows))


def check_pii(rule: Rule, problem: Problem, agent: int) -> CheckReport:
    """Partial-implementation invariance: settling everyone upstream of
    ``agent`` and bundling the leftover flow into ``agent``'s inflow must not
    change any award from ``agent`` down to the sink."""
    base = allocate(rule, problem)
    residual = residual_problem(problem, agent, base)
    moved = allocate(rule, residual)
    path = downstream_path(problem.network, agent)
    bad = [j for j in path if base.amount(j) != moved.amount(j)]
    if not bad:
        return _PASS
    first = bad[0]
    return _fail(
        Witness(
            AxiomId.PARTIAL_IMPLEMENTATION_INVARIANCE,
            (problem, residual),
            tuple(bad),
            base.amount(first),
            moved.amount(first),
            (("agent", agent),),
        )
    )


def check_downstream_impartiality(
    rule: Rule, problem: Problem, agent: int, delta: QuantityLike
) -> CheckReport:
    """Raising agent ``agent``'s inflow must move every pair of equally
    endowed downstream agents by the same amount.  Skipped when no such tied
    pair exists."""
    if not problem.network.is_linear:
        raise NotLinear("downstream impartiality is stated on linear networks")
    bump = quantity(delta)
    if bump <= 0:
        raise BadParameter("the inflow increase must be strictly positive")
    problem.network.check_agent(agent)
    n = problem.n
    pairs = [
        (k, m)
        for k in range(agent + 1, n + 1)
        for m in range(k + 1, n + 1)
        if problem.inflow(k) == problem.inflow(m)
    ]
    if not pairs:
        return _SKIP
    raised = problem.with_inflow(agent, problem.inflow(agent) + bump)
    base = allocate(rule, problem)
    moved = allocate(rule, raised)
    for k, m in pairs:
        gain_k = moved.amount(k) - base.amount(k)
        gain_m = moved.amount(m) - base.amount(m)
        if gain_k != gain_m:
            return _fail(
                Witness(
                    AxiomId.DOWNSTREAM_IMPARTIALITY,
                    (problem, raised),
                    (k, m),
                    gain_k,
                    gain_m,
                    (("agent", agent), ("delta", bump)),
                )
            )
    return _PASS


def recheck(rule: Rule, witness: Witness) -> CheckReport:
    """Re-run the original check on the data stored in a witness."""
    ctx = witness.context
    p = witness.problems[0]
    axiom = witness.axiom
    if axiom is AxiomId.SCALE_INVARIANCE:
        return check_scale_invariance(rule, p, ctx["rho"])
    if axiom is AxiomId.UPSTREAM_INVARIANCE:
        return check_upstream_invariance(rule, p, ctx["agent"], ctx["new_value"])
    if axiom is AxiomId.EQUAL_SOURCES:
        return check_equal_sources(rule, p, witness.problems[1])
    if axiom is AxiomId.NEUTRALITY:
        return check_neutrality(rule, p.n, ctx["agent"], ctx["amount"])
    if axiom is AxiomId.PARTIAL_IMPLEMENTATION_INVARIANCE:
        return check_pii(rule, p, ctx["agent"])
    if axiom is AxiomId.DOWNSTREAM_IMPARTIALITY:
        return check_downstream_impartiality(rule, p, ctx["agent"], ctx["delta"])
    raise BadParameter(f"unknown axiom {axiom!r}")


# ---------------------------------------------------------------------------
# Seeded instance sampling
# ---------------------------------------------------------------------------

@dataclass
class ProblemSampler:
    """Deterministic stream of linear problems and perturbation parameters.

    Inflows are small rationals (denominators up to ``denominator_bound``)
    and are exactly zero with probability ``zero_probability``; zero inflows
    matter because several axioms only bite on sparse profiles.
    """

    seed: int
    n_range: tuple[int, int] = (3, 8)
    denominator_bound: int = 12
    zero_probability: Fraction = Fraction(1, 4)
    _rng: random.Random = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n_range[0] < 3 or self.n_range[0] > self.n_range[1]:
            raise BadParameter(f"bad agent-count range {self.n_range}")
        if self.denominator_bound < 1:
            raise BadParameter("denominator bound must be at least 1")
        zp = quantity(self.zero_probability)
        if zp > 1:
            raise BadParameter("zero probability must lie in [0, 1]")
        self.zero_probability = zp
        self._rng = random.Random(self.seed)

    def agent_count(self) -> int:
        return self._rng.randint(*self.n_range)

    def index(self, lo: int, hi: int) -> int:
        return self._rng.randint(lo, hi)

    def positive_quantity(self) -> Fraction:
        den = self._rng.randint(1, self.denominator_bound)
        num = self._rng.randint(1, 3 * self.denominator_bound)
        return Fraction(num, den)

    def quantity(self) -> Fraction:
        zp = self.zero_probability
        if self._rng.randrange(zp.denominator) < zp.numerator:
            return ZERO
        return self.positive_quantity()

    def unit_fraction(self, *, allow_one: bool = True) -> Fraction:
        """A rational in [0, 1] (or [0, 1) with ``allow_one=False``)."""
        den = self._rng.randint(1, self.denominator_bound)
        num = self._rng.randint(0, den if allow_one else den - 1)
        return Fraction(num, den)

    def problem(self, n: Optional[int] = None, *, positive: bool = False) -> Problem:
        """A linear problem; ``positive=True`` forces every inflow > 0."""
        size = n if n is not None else self.agent_count()
        draw = self.positive_quantity if positive else self.quantity
        return Problem(RiverNetwork.line(size), tuple(draw() for _ in range(size)))

    def retention_vector(self, n: int) -> tuple[Fraction, ...]:
        """Per-agent retentions in [0, 1] with the sink's entry pinned to 1."""
        return tuple(self.unit_fraction() for _ in range(n - 1)) + (Fraction(1),)


# ---------------------------------------------------------------------------
# Search and suites
# ---------------------------------------------------------------------------

def check_axiom_once(
    rule: Rule,
    axiom: AxiomId,
    sampler: ProblemSampler,
    problem: Optional[Problem] = None,
) -> CheckReport:
    """Run one axiom check, drawing the instance and/or the perturbation
    parameters from the sampler's stream.

    With an explicit ``problem`` the instance is fixed and only the
    axiom-specific parameters are drawn (equal-sources still samples its
    second problem; its source inflow is pinned to the first problem's so the
    axiom's hypothesis holds by construction, and likewise a downstream tie
    is planted when sampling instances for downstream impartiality).
    """
    if axiom is AxiomId.NEUTRALITY:
        if problem is not None:
            if not problem.network.is_linear:
                raise NotLinear("neutrality is stated on linear networks")
            n = problem.n
        else:
            n = sampler.agent_count()
        agent = sampler.index(1, n - 1)
        return check_neutrality(rule, n, agent, sampler.positive_quantity())

    if axiom is AxiomId.EQUAL_SOURCES:
        p = problem if problem is not None else sampler.problem()
        q = sampler.problem(p.n)
        sp, sq = source_of(p), source_of(q)
        if sp is not None and sq is not None:
            q = q.with_inflow(sq, p.inflow(sp))
        return check_equal_sources(rule, p, q)

    if axiom is AxiomId.DOWNSTREAM_IMPARTIALITY:
        if problem is not None:
            p = problem
            agent = sampler.index(1, max(1, p.n - 2))
        else:
            p = sampler.problem()
            agent = sampler.index(1, p.n - 2)
            k = sampler.index(agent + 1, p.n)
            m = sampler.index(agent + 1, p.n - 1)
            if m >= k:
                m += 1
            p = p.with_inflow(m, p.inflow(k))
        return check_downstream_impartiality(rule, p, agent, sampler.positive_quantity())

    p = problem if problem is not None else sampler.problem()
    if axiom is AxiomId.SCALE_INVARIANCE:
        return check_scale_invariance(rule, p, sampler.quantity())
    if axiom is AxiomId.UPSTREAM_INVARIANCE:
        agent = sampler.index(1, p.n)
        return check_upstream_invariance(rule, p, agent, sampler.quantity())
    if axiom is AxiomId.PARTIAL_IMPLEMENTATION_INVARIANCE:
        agent = sampler.index(1, p.n)
        return check_pii(rule, p, agent)
    raise BadParameter(f"unknown axiom {axiom!r}")


def search_counterexamples(
    rule: Rule,
    axiom: AxiomId,
    sampler: ProblemSampler,
    budget: int,
) -> Optional[Witness]:
    """Draw up to ``budget`` instances and return the first witness found."""
    if budget <= 0:
        raise BadParameter("search budget must be positive")
    for _ in range(budget):
        report = check_axiom_once(rule, axiom, sampler)
        if report.failed:
            return report.witness
    return None


@dataclass(frozen=True)
class SuiteReport:
    """Tally of an axiom over many seeded instances."""

    axiom: AxiomId
    tested: int
    skipped: int
    witness: Optional[Witness] = None

    @property
    def passed(self) -> bool:
        return self.witness is None


def run_axiom_suite(
    rule: Rule,
    axiom: AxiomId,
    sampler: ProblemSampler,
    instances: int,
    problem: Optional[Problem] = None,
) -> SuiteReport:
    """Check an axiom on ``instances`` non-skipped draws (stops at the first
    witness).  Caps total draws at 20x the requested count so hypotheses that
    almost never hold cannot stall the suite."""
    tested = 0
    skipped = 0
    draws = 0
    limit = 20 * instances
    while tested < instances and draws < limit:
        draws += 1
        report = check_axiom_once(rule, axiom, sampler, problem=problem)
        if report.skipped:
            skipped += 1
            continue
        tested += 1
        if report.failed:
            return SuiteReport(axiom, tested, skipped, report.witness)
    return SuiteReport(axiom, tested, skipped, None)


# ---------------------------------------------------------------------------
# Characterization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CharacterizationResult:
    """Outcome of testing whether a rule behaves as a geometric-transfer
    rule with some retention vector."""

    member: bool
    alpha: tuple[Fraction, ...]
    counterexample: Optional[Problem] = None
    agent: Optional[int] = None
    expected: Optional[Fraction] = None
    actual: Optional[Fraction] = None


def characterize_geometric(
    rule: Rule,
    n: int,
    sampler: ProblemSampler,
    budget: int,
) -> CharacterizationResult:
    """Recover candidate retentions from unit profiles, then compare the rule
    against the geometric rule they define on ``budget`` sampled problems."""
    if budget <= 0:
        raise BadParameter("characterization budget must be positive")
    alpha = recover_alpha(rule, n)
    candidate = MultiGeometric(alpha)
    for _ in range(budget):
        p = sampler.problem(n)
        actual = allocate(rule, p)
        expected = allocate(candidate, p)
        for i in p.network.agents:
            if actual.amount(i) != expected.amount(i):
                return CharacterizationResult(
                    False, alpha, p, i, expected.amount(i), actual.amount(i)
                )
    return CharacterizationResult(True, alpha)
