"""Acceptance suite.

One test per acceptance criterion; each prints a single PASS/FAIL line (run
pytest with ``-s`` or ``-rA`` to see them all).  Every tolerance is written
out at its final value here: rule and axiom comparisons are exact rational
equality, table reproduction is checked at two printed decimals, and only
the floating-point retention fit carries numeric tolerances (1e-6 on the
parameter, 1e-12 on the loss, 100 ms per fit).
"""

import time
from contextlib import contextmanager
from fractions import Fraction

from rivershare import (
    AdditiveDelta,
    Allocation,
    AxiomId,
    Beta,
    FullTransfer,
    Geometric,
    Lambda,
    MultiGeometric,
    NoTransfer,
    ProblemSampler,
    Serial,
    allocate,
    characterize_geometric,
    check_downstream_impartiality,
    check_equal_sources,
    check_neutrality,
    check_pii,
    check_scale_invariance,
    check_upstream_invariance,
    evaluate,
    fit_gamma,
    geometric_closed_form,
    geometric_recursive,
    line_problem,
    nile_dataset,
    rationalize_alpha,
    scale_withdrawals,
    search_counterexamples,
    source_of,
)
from rivershare.data import round_half_up
from rivershare.reproduction import build_nile_report
from rivershare.rules import beta_delta_vector

F = Fraction


@contextmanager
def criterion(num, description):
    try:
        yield
    except BaseException:
        print(f"criterion {num} FAIL  {description}")
        raise
    print(f"criterion {num} PASS  {description}")


# ---------------------------------------------------------------------------
# 1. Worked-example reproduction
# ---------------------------------------------------------------------------

def test_criterion_1_worked_example():
    with criterion(1, "worked example matches exactly except the flagged sink cell"):
        e1 = line_problem(("0", "36", "0", "0"))
        e2 = line_problem(("12", "4", "0", "10"))
        published = {
            ("1/2", e1): (F(0), F(18), F(9), F(9)),
            ("1/2", e2): (F(6), F(5), F(5, 2), F(25, 2)),
            ("2/3", e1): (F(0), F(24), F(8), F(2)),
            ("2/3", e2): (F(8), F(16, 3), F(16, 9), F(98, 9)),
        }
        mismatches = []
        for (retention, problem), printed in published.items():
            derived = evaluate(Geometric(F(retention)), problem)
            for agent in problem.network.agents:
                if derived.amount(agent) != printed[agent - 1]:
                    mismatches.append(
                        (retention, problem, agent, derived.amount(agent), printed[agent - 1])
                    )
        assert mismatches == [("2/3", e1, 4, F(4), F(2))]
        # The printed cell breaks non-wastefulness: the column sums to 34.
        assert sum(published[("2/3", e1)], F(0)) == F(34) != e1.total_inflow


# ---------------------------------------------------------------------------
# 2. Published Nile table reproduction at two decimals
# ---------------------------------------------------------------------------

def test_criterion_2_nile_table():
    with criterion(2, "published Nile table reproduced, two typos flagged"):
        report = build_nile_report()
        mismatches = {(c.column, c.agent) for c in report.discrepancies}
        assert mismatches == {
            ("serial", "Ethiopia"),
            ("z", "Sudan"),
            ("recovered", "Sudan"),
        }
        for column in (
            "e",
            "full-transfer",
            "geometric:1/4",
            "geometric:1/2",
            "geometric:3/4",
            "no-transfer",
        ):
            assert all(c.match for c in report.cells if c.column == column), column
        flagged = {(c.column, c.agent): c for c in report.discrepancies}
        serial_cell = flagged[("serial", "Ethiopia")]
        assert serial_cell.derived == F("52.6") / 3
        assert round_half_up(serial_cell.derived, 2) == F("17.53")
        assert serial_cell.printed == F("11.53")
        z_cell = flagged[("z", "Sudan")]
        assert round_half_up(z_cell.derived, 2) == F(23)
        assert z_cell.printed == F(22)


# ---------------------------------------------------------------------------
# 3. Retention-vector rationalization of the actual allocation
# ---------------------------------------------------------------------------

def test_criterion_3_recovered_vector():
    with criterion(3, "recovered retentions round to (0.26,0.02,0.01,0.17,0.26) and round-trip"):
        nile = nile_dataset()
        problem = nile.problem()
        scaled = scale_withdrawals(nile.raw_withdrawals, problem.total_inflow)
        result = rationalize_alpha(problem, Allocation(scaled))
        rounded = [round_half_up(a, 2) for a in result.alpha[:5]]
        assert rounded == [F("0.26"), F("0.02"), F("0.01"), F("0.17"), F("0.26")]
        assert evaluate(MultiGeometric(result.alpha), problem).amounts == scaled


# ---------------------------------------------------------------------------
# 4. Forward-direction axiom suites (exact, 500 seeded instances each)
# ---------------------------------------------------------------------------

def _forward_suite(axiom, rule_for, seed, count=500):
    """Run ``count`` non-skipped checks of one axiom, drawing the problem,
    the rule's parameters, and the perturbation from one seeded stream; the
    rule is rebuilt per instance so the whole family is exercised."""
    s = ProblemSampler(seed=seed)
    tested = 0
    attempts = 0
    while tested < count:
        attempts += 1
        assert attempts < 40 * count, "hypotheses almost never satisfiable"
        if axiom is AxiomId.NEUTRALITY:
            n = s.agent_count()
            report = check_neutrality(
                rule_for(s, n), n, s.index(1, n - 1), s.positive_quantity()
            )
        elif axiom is AxiomId.EQUAL_SOURCES:
            p = s.problem()
            q = s.problem(p.n)
            sp, sq = source_of(p), source_of(q)
            if sp is None or sq is None:
                continue
            q = q.with_inflow(sq, p.inflow(sp))
            report = check_equal_sources(rule_for(s, p.n), p, q)
        elif axiom is AxiomId.DOWNSTREAM_IMPARTIALITY:
            p = s.problem()
            i = s.index(1, p.n - 2)
            k = s.index(i + 1, p.n)
            m = s.index(i + 1, p.n - 1)
            if m >= k:
                m += 1
            p = p.with_inflow(m, p.inflow(k))
            report = check_downstream_impartiality(
                rule_for(s, p.n), p, i, s.positive_quantity()
            )
        elif axiom is AxiomId.SCALE_INVARIANCE:
            p = s.problem()
            report = check_scale_invariance(rule_for(s, p.n), p, s.quantity())
        elif axiom is AxiomId.UPSTREAM_INVARIANCE:
            p = s.problem()
            report = check_upstream_invariance(
                rule_for(s, p.n), p, s.index(1, p.n), s.quantity()
            )
        elif axiom is AxiomId.PARTIAL_IMPLEMENTATION_INVARIANCE:
            p = s.problem()
            report = check_pii(rule_for(s, p.n), p, s.index(1, p.n))
        else:
            raise AssertionError(axiom)
        if report.skipped:
            continue
        assert report.witness is None, report.witness
        tested += 1


SI = AxiomId.SCALE_INVARIANCE
UI = AxiomId.UPSTREAM_INVARIANCE
PII = AxiomId.PARTIAL_IMPLEMENTATION_INVARIANCE
ES = AxiomId.EQUAL_SOURCES
NE = AxiomId.NEUTRALITY
DI = AxiomId.DOWNSTREAM_IMPARTIALITY


def _multi(s, n):
    return MultiGeometric(s.retention_vector(n))


def _geometric(s, n):
    return Geometric(s.unit_fraction())


def _serial(s, n):
    return Serial()


def _beta(s, n):
    return Beta(s.index(1, n - 1), s.unit_fraction(allow_one=False))


def _delta(s, n):
    return AdditiveDelta(s.retention_vector(n))


def test_criterion_4_forward_suites():
    with criterion(4, "forward axiom suites: 18 family/axiom pairs, 500 exact checks each"):
        plan = [
            (_multi, (SI, UI, PII)),
            (_geometric, (SI, UI, PII, ES)),
            (_serial, (SI, UI, PII, NE)),
            (_beta, (SI, UI, PII, DI)),
            (_delta, (SI, UI, DI)),
        ]
        seed = 4000
        for rule_for, axioms in plan:
            for axiom in axioms:
                seed += 1
                _forward_suite(axiom, rule_for, seed)


# ---------------------------------------------------------------------------
# 5. Converse evidence: seeded search finds the expected witnesses
# ---------------------------------------------------------------------------

def test_criterion_5_converse_witnesses():
    with criterion(5, "counterexample search finds all four expected witnesses"):
        assert (
            search_counterexamples(Serial(), ES, ProblemSampler(seed=1), 1000)
            is not None
        )
        assert (
            search_counterexamples(NoTransfer(), NE, ProblemSampler(seed=1), 1000)
            is not None
        )
        half_delta = AdditiveDelta((F(1, 2), F(1, 2), F(1, 2), F(1)))
        assert (
            search_counterexamples(
                half_delta, PII, ProblemSampler(seed=1, n_range=(4, 4)), 1000
            )
            is not None
        )
        generic_multi = MultiGeometric((F(1), F(1, 2), F(1, 4), F(1)))
        assert (
            search_counterexamples(
                generic_multi, DI, ProblemSampler(seed=1, n_range=(4, 4)), 1000
            )
            is not None
        )
        # The hand-derived witness: paying off agent 1 changes agents 3 and 4
        # from 1/6 each to 1/8 each under the half-retention additive rule.
        p = line_problem(("1", "0", "0", "0"))
        report = check_pii(half_delta, p, 2)
        assert report.failed
        original, residual = report.witness.problems
        assert residual.inflows == (F(0), F(1, 2), F(0), F(0))
        before = allocate(half_delta, original)
        after = allocate(half_delta, residual)
        assert (before.amount(3), before.amount(4)) == (F(1, 6), F(1, 6))
        assert (after.amount(3), after.amount(4)) == (F(1, 8), F(1, 8))


# ---------------------------------------------------------------------------
# 6. Equivalence oracles (exact, 500 seeded instances each)
# ---------------------------------------------------------------------------

def test_criterion_6_equivalence_oracles():
    with criterion(6, "four rule equivalences hold exactly on 500 instances each"):
        s = ProblemSampler(seed=6001)
        for _ in range(500):
            p = s.problem()
            gamma = s.unit_fraction()
            vec = tuple(gamma for _ in range(p.n - 1)) + (F(1),)
            assert geometric_recursive(p, vec).amounts == geometric_closed_form(
                p, gamma
            ).amounts

        s = ProblemSampler(seed=6002)
        for _ in range(500):
            p = s.problem()
            vec = tuple(F(1, p.n - i + 1) for i in range(1, p.n)) + (F(1),)
            assert evaluate(Serial(), p).amounts == evaluate(
                MultiGeometric(vec), p
            ).amounts

        s = ProblemSampler(seed=6003)
        checked = 0
        while checked < 500:  # every (n, pivot) pair in range, sampled profiles
            for n in range(3, 9):
                for pivot in range(1, n):
                    p = s.problem(n)
                    b = s.unit_fraction(allow_one=False)
                    assert evaluate(Beta(pivot, b), p).amounts == evaluate(
                        AdditiveDelta(beta_delta_vector(n, pivot, b)), p
                    ).amounts
                    checked += 1

        s = ProblemSampler(seed=6004)
        for _ in range(500):
            p = s.problem()
            lam = s.unit_fraction()
            vec = tuple(lam for _ in range(p.n - 1)) + (F(1),)
            assert evaluate(Lambda(lam), p).amounts == evaluate(
                AdditiveDelta(vec), p
            ).amounts


# ---------------------------------------------------------------------------
# 7. Characterization decisions
# ---------------------------------------------------------------------------

def test_criterion_7_characterization():
    with criterion(7, "characterization accepts geometric-transfer rules, rejects additive ones"):
        result = characterize_geometric(Serial(), 5, ProblemSampler(seed=71), 200)
        assert result.member
        assert result.alpha == (F(1, 5), F(1, 4), F(1, 3), F(1, 2), F(1))

        result = characterize_geometric(NoTransfer(), 4, ProblemSampler(seed=72), 200)
        assert result.member and result.alpha == (F(1), F(1), F(1), F(1))

        result = characterize_geometric(FullTransfer(), 4, ProblemSampler(seed=73), 200)
        assert result.member and result.alpha == (F(0), F(0), F(0), F(1))

        params = ProblemSampler(seed=74)
        for _ in range(20):
            n = params.agent_count()
            alpha = params.retention_vector(n)
            result = characterize_geometric(
                MultiGeometric(alpha), n, ProblemSampler(seed=75), 100
            )
            assert result.member and result.alpha == alpha

        result = characterize_geometric(Lambda(F(1, 2)), 4, ProblemSampler(seed=76), 500)
        assert not result.member

        generic_delta = AdditiveDelta((F(1, 2), F(1, 3), F(3, 4), F(1)))
        result = characterize_geometric(generic_delta, 4, ProblemSampler(seed=77), 500)
        assert not result.member


# ---------------------------------------------------------------------------
# 8. Rationalization round-trip
# ---------------------------------------------------------------------------

def test_criterion_8_round_trip():
    with criterion(8, "retention recovery is exact on 200 positive-inflow round trips"):
        s = ProblemSampler(seed=8001)
        for _ in range(200):
            p = s.problem(positive=True)
            alpha = s.retention_vector(p.n)
            z = evaluate(MultiGeometric(alpha), p)
            result = rationalize_alpha(p, z)
            assert result.alpha == alpha
            assert result.fully_determined


# ---------------------------------------------------------------------------
# 9. Uniform-retention fit
# ---------------------------------------------------------------------------

def test_criterion_9_fit():
    with criterion(9, "fit recovers the retention to 1e-6 (loss <= 1e-12, < 100 ms each)"):
        s = ProblemSampler(seed=9001)
        for _ in range(50):
            p = s.problem(positive=True)
            gamma = s.unit_fraction()
            z = evaluate(Geometric(gamma), p)
            start = time.perf_counter()
            fit = fit_gamma(p, z)
            elapsed = time.perf_counter() - start
            assert abs(fit.gamma - float(gamma)) <= 1e-6
            assert fit.loss <= 1e-12
            assert elapsed < 0.1
