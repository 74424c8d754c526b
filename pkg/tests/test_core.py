from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rivershare import (
    Allocation,
    Problem,
    RiverNetwork,
    downstream_path,
    line_problem,
    quantity,
    source_of,
    upstream_closure,
    validate_allocation,
    validate_network,
)
from rivershare.core import (
    Cycle,
    Disconnected,
    FeasibilityViolation,
    MultipleSinks,
    NotLinear,
    ParseError,
    TooFewAgents,
    UnknownAgent,
    WastefulnessViolation,
    immediate_upstream,
    topological_order,
)


class TestQuantity:
    def test_decimal_string_is_exact(self):
        assert quantity("16.8") == Fraction(84, 5)

    def test_fraction_string(self):
        assert quantity("5/3") == Fraction(5, 3)

    def test_int(self):
        assert quantity(7) == Fraction(7)

    def test_negative_rejected(self):
        with pytest.raises(ParseError):
            quantity("-1/2")

    def test_float_rejected(self):
        with pytest.raises(ParseError):
            quantity(16.8)

    def test_garbage_rejected(self):
        with pytest.raises(ParseError):
            quantity("16.8km3")


class TestValidateNetwork:
    def test_minimal_line(self):
        net = RiverNetwork.from_successor_map(3, {1: 2, 2: 3})
        assert validate_network(net) == "linear"

    def test_nile_is_a_tree(self, nile):
        assert validate_network(nile.network) == "tree"
        assert not nile.network.is_linear

    def test_cycle(self):
        net = RiverNetwork.from_successor_map(3, {1: 2, 2: 1})
        with pytest.raises(Cycle):
            validate_network(net)

    def test_self_loop(self):
        net = RiverNetwork.from_successor_map(3, {1: 1, 2: 3})
        with pytest.raises(Cycle):
            validate_network(net)

    def test_no_sink_is_a_cycle(self):
        net = RiverNetwork.from_successor_map(3, {1: 2, 2: 3, 3: 1})
        with pytest.raises(Cycle):
            validate_network(net)

    def test_multiple_sinks(self):
        net = RiverNetwork.from_successor_map(4, {1: 2, 3: 4})
        with pytest.raises(MultipleSinks):
            validate_network(net)

    def test_too_few_agents(self):
        with pytest.raises(TooFewAgents):
            validate_network(RiverNetwork.line(2))

    def test_unknown_successor_is_disconnected(self):
        net = RiverNetwork.from_successor_map(3, {1: 2, 2: 9})
        with pytest.raises(Disconnected):
            validate_network(net)


class TestClosuresAndPaths:
    def test_line_prefix(self):
        net = RiverNetwork.line(4)
        assert upstream_closure(net, 2) == frozenset({1, 2})

    def test_nile_upstream_of_sudan(self, nile):
        # Sudan is agent 5; everything but Egypt drains through it.
        assert upstream_closure(nile.network, 5) == frozenset({1, 2, 3, 4, 5})

    def test_leaf_is_its_own_closure(self, nile):
        assert upstream_closure(nile.network, 4) == frozenset({4})

    def test_line_path(self):
        assert downstream_path(RiverNetwork.line(4), 2) == (2, 3, 4)

    def test_nile_path_from_ethiopia(self, nile):
        assert downstream_path(nile.network, 4) == (4, 5, 6)

    def test_sink_path_is_itself(self, nile):
        assert downstream_path(nile.network, 6) == (6,)

    def test_unknown_agent(self, nile):
        with pytest.raises(UnknownAgent):
            upstream_closure(nile.network, 7)
        with pytest.raises(UnknownAgent):
            downstream_path(nile.network, 0)

    @given(n=st.integers(3, 8), i=st.integers(1, 8))
    def test_line_partition(self, n, i):
        i = min(i, n)
        net = RiverNetwork.line(n)
        up = upstream_closure(net, i)
        down = set(downstream_path(net, i))
        assert up == set(range(1, i + 1))
        assert down == set(range(i, n + 1))
        assert up | down == set(range(1, n + 1))
        assert up & down == {i}

    def test_immediate_upstream_nile(self, nile):
        assert immediate_upstream(nile.network, 5) == (3, 4)
        assert immediate_upstream(nile.network, 1) == ()

    def test_topological_order_respects_edges(self, nile, confluence_problem):
        for net in (nile.network, confluence_problem.network):
            order = topological_order(net)
            position = {agent: k for k, agent in enumerate(order)}
            for agent in net.agents:
                succ = net.successors[agent - 1]
                if succ is not None:
                    assert position[agent] < position[succ]


class TestValidateAllocation:
    def test_worked_example_allocation_ok(self):
        p = line_problem(("12", "4", "0", "10"))
        validate_allocation(p, Allocation(("6", "5", "5/2", "25/2")))

    def test_no_transfer_always_ok(self, nile_problem):
        validate_allocation(nile_problem, Allocation(nile_problem.inflows))

    def test_prefix_violation_is_reported_at_first_agent(self):
        p = line_problem(("0", "36", "0", "0"))
        with pytest.raises(FeasibilityViolation) as exc:
            validate_allocation(p, Allocation(("1", "35", "0", "0")))
        assert exc.value.agent == 1
        assert exc.value.allocated == 1
        assert exc.value.available == 0

    def test_minimal_violating_closure(self):
        # Both prefixes 2 and 3 are over-allocated; agent 2 must be named.
        p = line_problem(("1", "1", "1", "5"))
        with pytest.raises(FeasibilityViolation) as exc:
            validate_allocation(p, Allocation(("1", "3", "1", "3")))
        assert exc.value.agent == 2

    def test_wastefulness(self):
        p = line_problem(("1", "1", "1", "1"))
        with pytest.raises(WastefulnessViolation):
            validate_allocation(p, Allocation(("1", "1", "1", "0")))

    def test_tree_closure_violation(self, nile_problem):
        # Move water from Tanzania to Ethiopia, a leaf on another branch:
        # totals still match but Ethiopia's closure is over-allocated.
        amounts = list(nile_problem.inflows)
        amounts[0] -= 1
        amounts[3] += 1
        with pytest.raises(FeasibilityViolation) as exc:
            validate_allocation(nile_problem, Allocation(tuple(amounts)))
        assert exc.value.agent == 4


class TestSourceOf:
    def test_interior_source(self):
        assert source_of(line_problem(("0", "36", "0", "0"))) == 2

    def test_head_source(self):
        assert source_of(line_problem(("12", "4", "0", "10"))) == 1

    def test_only_sink_inflow_means_undefined(self):
        assert source_of(line_problem(("0", "0", "0", "7"))) is None

    def test_tree_rejected(self, nile_problem):
        with pytest.raises(NotLinear):
            source_of(nile_problem)


class TestProblem:
    def test_length_mismatch(self):
        with pytest.raises(ParseError):
            Problem(RiverNetwork.line(4), ("1", "2", "3"))

    def test_negative_inflow(self):
        with pytest.raises(ParseError):
            Problem(RiverNetwork.line(3), ("1", "-2", "3"))

    def test_invalid_network_rejected_at_construction(self):
        net = RiverNetwork.from_successor_map(3, {1: 2, 2: 1})
        with pytest.raises(Cycle):
            Problem(net, ("1", "1", "1"))

    def test_with_inflow(self):
        p = line_problem(("1", "2", "3"))
        q = p.with_inflow(2, "7/2")
        assert q.inflows == (Fraction(1), Fraction(7, 2), Fraction(3))
        assert p.inflows[1] == 2
