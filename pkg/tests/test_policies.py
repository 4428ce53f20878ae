import numpy as np
import pytest

from smwsim import (
    DROP,
    FluidPolicy,
    PriorityPolicy,
    SmwPickupPolicy,
    SmwPolicy,
    policy_from_spec,
    solve_transportation,
    vanilla_policy,
)
from smwsim.policies import NO_COMPATIBLE_SUPPLY, POLICY_DECLINED, SERVED
from smwsim.instances import example1


@pytest.fixture
def net():
    return example1()


def test_smw_basic(net):
    pol = SmwPolicy(net, [0.5, 0.5])
    assert pol.dispatch([3, 5], 1).source == 1
    assert pol.dispatch([4, 4], 1).source == 1     # tie -> highest index
    dec = pol.dispatch([0, 7], 0)
    assert dec.source == DROP and dec.reason == NO_COMPATIBLE_SUPPLY


def test_vanilla(net):
    pol = vanilla_policy(net)
    assert pol.dispatch([2, 1], 1).source == 0
    assert pol.dispatch([1, 1], 1).source == 1
    assert pol.dispatch([0, 0], 1).source == DROP


def test_smw_scaling_invariance(net):
    rng = np.random.default_rng(0)
    a = np.array([0.3, 0.7])
    for c in (0.5, 2.0, 13.0):
        scaled = c * a / (c * a).sum()
        p1, p2 = SmwPolicy(net, a), SmwPolicy(net, scaled)
        for _ in range(200):
            q = rng.integers(0, 10, 2)
            for j in range(2):
                assert p1.dispatch(q, j) == p2.dispatch(q, j)


def test_smw_ignores_destination(net):
    # dispatch takes no destination argument at all; decisions depend
    # only on (state, origin)
    pol = SmwPolicy(net, [0.5, 0.5])
    rng = np.random.default_rng(1)
    for _ in range(50):
        q = rng.integers(0, 6, 2)
        assert pol.dispatch(q, 1) == pol.dispatch(q.copy(), 1)


def test_priority(net):
    pol = PriorityPolicy(net, [[0], [1, 0]])
    assert pol.dispatch([5, 1], 1).source == 1
    assert pol.dispatch([5, 0], 1).source == 0
    assert pol.dispatch([0, 0], 1).source == DROP


def test_priority_rejects_bad_list(net):
    with pytest.raises(ValueError, match="permutation"):
        PriorityPolicy(net, [[0], [1]])


def fluid_for(net):
    flow = solve_transportation(net.col_rates(), net.row_rates(),
                                np.zeros((2, 2)), support=list(net.edges))
    return FluidPolicy(net, flow)


def test_fluid_degenerate_table(net):
    mu = net.row_rates()
    flow = np.array([[mu[0], mu[1]], [0.0, 0.0]])   # all mass to node 0
    pol = FluidPolicy(net, flow)
    rng = np.random.default_rng(2)
    assert pol.dispatch([3, 1], 0, rng).source == 0
    # sampled node empty: drop even though node 1 has supply
    assert pol.dispatch([0, 5], 1, rng).source == DROP


def test_fluid_empirical_frequencies(net):
    pol = fluid_for(net)
    mu = net.row_rates()
    rng = np.random.default_rng(3)
    counts = np.zeros(2)
    n_draws = 100_000
    for _ in range(n_draws):
        dec = pol.dispatch([5, 5], 1, rng)
        if dec.source != DROP:
            counts[dec.source] += 1
    target = pol.flow[:, 1] / mu[1]
    se = np.sqrt(target * (1 - target) / n_draws)
    assert np.all(np.abs(counts / n_draws - target) <= 3 * se + 1e-12)


def test_fluid_distribution_matches_sampler(net):
    pol = fluid_for(net)
    dist = pol.dispatch_distribution([5, 0], 1)
    total = sum(p for _, p in dist)
    assert total == pytest.approx(1.0, abs=1e-12)
    for dec, p in dist:
        if dec.source == DROP:
            assert dec.reason in (POLICY_DECLINED, NO_COMPATIBLE_SUPPLY)


def test_fluid_rejects_bad_flow_table(net):
    with pytest.raises(ValueError, match="column sums"):
        FluidPolicy(net, np.ones((2, 2)))


def test_pickup_beta_zero_matches_smw():
    net = example1(with_times=True)
    a = np.array([0.6, 0.4])
    base, pick = SmwPolicy(net, a), SmwPickupPolicy(net, a, 0.0)
    rng = np.random.default_rng(4)
    for _ in range(10_000):
        q = rng.integers(0, 8, 2)
        j = int(rng.integers(0, 2))
        assert base.dispatch(q, j) == pick.dispatch(q, j)


def make_pickup_net(pickup):
    base = example1(with_times=True)
    from smwsim import build_network
    return build_network(2, 2, list(base.edges), base.phi,
                         base.travel_time, pickup)


def test_pickup_prefers_near_node():
    # equal scaled queues; pickup times to origin 1 are (10, 2)
    net = make_pickup_net([[3.0, 10.0], [3.0, 2.0]])
    pol = SmwPickupPolicy(net, [0.5, 0.5], beta=0.1)
    assert pol.dispatch([4, 4], 1).source == 1
    far = make_pickup_net([[3.0, 2.0], [3.0, 10.0]])
    pol2 = SmwPickupPolicy(far, [0.5, 0.5], beta=0.1)
    assert pol2.dispatch([4, 4], 1).source == 0
    assert pol.dispatch([0, 0], 1).source == DROP


def test_pickup_requires_matrix(net):
    with pytest.raises(ValueError, match="pickup time"):
        SmwPickupPolicy(net, [0.5, 0.5], 0.1)


def test_policy_from_spec(net):
    assert isinstance(policy_from_spec(net, {"kind": "vanilla_mw"}), SmwPolicy)
    pol = policy_from_spec(net, {"kind": "smw", "alpha": [0.9, 0.1]})
    assert np.allclose(pol.alpha, [0.9, 0.1])
    with pytest.raises(ValueError, match="unknown policy"):
        policy_from_spec(net, {"kind": "nope"})
