import numpy as np
import pytest

from smwsim import (
    build_network,
    neighborhood,
    symmetrize_demand,
    validate_network,
)
from smwsim.network import NetworkError, SubsetCapError
from smwsim.instances import example1, example1_crp_violated, random_crp


def test_example1_validation():
    rep = validate_network(example1())
    assert rep.crp_holds
    assert rep.hall_gap == pytest.approx(1 / 8, abs=1e-12)
    assert rep.lambda_min == pytest.approx(3 / 8, abs=1e-12)
    assert rep.nontrivial
    assert rep.epsilon_floor_drop == 0.0


def test_crp_violated_variant():
    rep = validate_network(example1_crp_violated())
    assert not rep.crp_holds
    assert ((0,), pytest.approx(-1 / 8)) in [
        (j, pytest.approx(s)) for (j, s) in rep.violating_subsets]
    assert rep.epsilon_floor_drop == pytest.approx(1 / 8)


def test_full_bipartite_is_trivial():
    net = build_network(2, 2, [(i, j) for i in range(2) for j in range(2)],
                        [[0.3, 0.2], [0.1, 0.4]])
    assert not validate_network(net).nontrivial


def test_neighborhoods():
    net = example1()
    assert neighborhood(net, {0}) == frozenset({0})
    assert neighborhood(net, {1}) == frozenset({0, 1})
    assert neighborhood(net, set()) == frozenset()


def test_normalization_idempotent():
    phi = np.array([[3.0, 1.0], [2.0, 2.0]])
    net1 = build_network(2, 2, [(0, 0), (0, 1), (1, 1)], phi)
    net2 = build_network(2, 2, [(0, 0), (0, 1), (1, 1)], net1.phi)
    assert np.array_equal(net1.phi, net2.phi)
    assert net1.phi.sum() == pytest.approx(1.0, abs=1e-15)


def test_zero_rate_demand_node_dropped():
    phi = [[0.5, 0.0], [0.0, 0.0], [0.25, 0.25]]
    with pytest.warns(UserWarning, match="zero arrival rate"):
        net = build_network(2, 3, [(0, 0), (1, 1), (0, 2), (1, 2)], phi)
    assert net.n_demand == 2
    # node 2 compacted to index 1, keeping its edges
    assert net.supply_neighbors(1) == (0, 1)


def test_rejects_isolated_demand_node():
    with pytest.raises(NetworkError, match="no compatible supply"):
        build_network(2, 2, [(0, 0)], [[0.5, 0.0], [0.25, 0.25]])


def test_rejects_edgeless_supply_node():
    # such a node is an absorbing sink in the closed network
    with pytest.raises(NetworkError, match="no compatible demand"):
        build_network(2, 2, [(0, 0), (0, 1)], [[0.5, 0.0], [0.25, 0.25]])


def test_rejects_out_of_range_edge():
    with pytest.raises(NetworkError):
        build_network(2, 2, [(0, 0), (2, 1)], [[0.5, 0.0], [0.25, 0.25]])


def test_subset_cap():
    n = 22
    phi = np.full((n, n), 1.0)
    edges = [(i, j) for i in range(n) for j in range(n)]
    net = build_network(n, n, edges, phi)
    with pytest.raises(SubsetCapError):
        validate_network(net)


def test_symmetrize_demand():
    phi = np.array([[0.0, 1.0], [0.0, 0.0]])
    out = symmetrize_demand(phi, 0.5)
    assert np.allclose(out, [[0.0, 0.75], [0.25, 0.0]])
    assert np.array_equal(symmetrize_demand(phi, 1.0), phi)
    sym = symmetrize_demand(phi, 0.0)
    assert np.allclose(sym, sym.T)
    assert np.allclose(sym.sum(axis=0), sym.sum(axis=1))
    with pytest.raises(NetworkError):
        symmetrize_demand(np.ones((2, 3)), 0.5)


def test_hall_gap_matches_bruteforce_on_random_instances():
    # independent bitmask enumeration, no shared code with the validator
    for seed in range(5):
        net = random_crp(4, seed=seed)
        row = net.phi.sum(axis=1)
        col = net.phi.sum(axis=0)
        m = net.n_demand
        gaps = []
        for mask in range(1, (1 << m) - 1):
            J = [j for j in range(m) if mask >> j & 1]
            nbrs = {i for (i, j) in net.edges if j in J}
            gaps.append(sum(col[i] for i in nbrs) - sum(row[j] for j in J))
        rep = validate_network(net)
        assert rep.hall_gap == pytest.approx(min(gaps), abs=1e-12)
        assert rep.crp_holds == (min(gaps) > 0)


def test_drift_constant_inequality():
    # supply-side cut bound: inflow-to-S minus demand-confined-to-S
    # is at least min(hall gap, lambda_min), exhaustively over cuts
    for net in [example1()] + [random_crp(4, seed=s) for s in range(3)]:
        rep = validate_network(net)
        bound = min(rep.hall_gap, rep.lambda_min)
        n = net.n_supply
        for mask in range(1, (1 << n) - 1):
            S = {i for i in range(n) if mask >> i & 1}
            inflow = sum(net.phi[j, k] for j in range(net.n_demand)
                         for k in S)
            confined = sum(net.phi[j].sum() for j in range(net.n_demand)
                           if set(net.supply_neighbors(j)) <= S)
            assert inflow - confined >= bound - 1e-12
