import math

import numpy as np
import pytest

from smwsim import (
    PriorityPolicy,
    SmwPolicy,
    build_chain,
    build_network,
    exact_exponent_curve,
    run_jump_chain,
    stationary_drop_probability,
    vanilla_policy,
)
from smwsim.chain import StateCapError, StateSpace
from smwsim.instances import example1, example1_crp_violated, random_crp


def test_state_space_counts():
    for n, K in [(2, 5), (3, 4), (4, 6)]:
        sp = StateSpace.enumerate(n, K)
        assert sp.states.shape[0] == math.comb(K + n - 1, n - 1)
        assert len(sp.index) == sp.states.shape[0]
        assert np.all(sp.states.sum(axis=1) == K)


def test_state_cap():
    with pytest.raises(StateCapError):
        StateSpace.enumerate(10, 100, cap=1000)


def test_example1_k1_transitions():
    net = example1()
    P, drop, sp = build_chain(net, SmwPolicy(net, [0.5, 0.5]), 1)
    Pd = P.toarray()
    i10, i01 = sp.index[(1, 0)], sp.index[(0, 1)]
    assert Pd[i10, i10] == pytest.approx(5 / 8)
    assert Pd[i10, i01] == pytest.approx(3 / 8)
    assert Pd[i01, i01] == pytest.approx(3 / 4)
    assert Pd[i01, i10] == pytest.approx(1 / 4)
    assert drop[i10] == 0.0
    assert drop[i01] == pytest.approx(1 / 2)


def test_rows_stochastic_on_fuzzed_instances():
    for seed in range(3):
        net = random_crp(3, seed=seed)
        P, _, _ = build_chain(net, vanilla_policy(net), 4)
        assert np.allclose(P.sum(axis=1), 1.0, atol=1e-12)


def test_k0_absorbing():
    net = example1()
    P, drop, _ = build_chain(net, vanilla_policy(net), 0)
    assert P.shape == (1, 1)
    assert P[0, 0] == pytest.approx(1.0)
    assert drop[0] == pytest.approx(1.0)
    assert stationary_drop_probability(net, vanilla_policy(net), 0) \
        .drop_probability == pytest.approx(1.0)


def test_example1_k1_exact_drop():
    net = example1()
    sol = stationary_drop_probability(net, SmwPolicy(net, [0.5, 0.5]), 1)
    assert sol.drop_probability == pytest.approx(3 / 10, abs=1e-12)
    assert sol.residual <= 1e-10
    pi = dict(zip([tuple(sol.space.states[i]) for i in sol.class_states],
                  sol.stationary))
    assert pi[(1, 0)] == pytest.approx(2 / 5, abs=1e-12)
    assert pi[(0, 1)] == pytest.approx(3 / 5, abs=1e-12)


def test_priority_vs_smw_at_k1():
    net = example1()
    smw = stationary_drop_probability(net, SmwPolicy(net, [0.5, 0.5]), 1)
    pri = stationary_drop_probability(
        net, PriorityPolicy(net, [[0], [1, 0]]), 1)
    assert pri.drop_probability <= smw.drop_probability + 1e-12


def test_full_flexibility_never_drops():
    net = build_network(2, 2, [(i, j) for i in range(2) for j in range(2)],
                        [[0.3, 0.2], [0.1, 0.4]])
    for K in (1, 3):
        sol = stationary_drop_probability(net, vanilla_policy(net), K)
        assert sol.drop_probability == pytest.approx(0.0, abs=1e-15)


def test_curve_monotone_and_matches_simulation():
    net = example1()
    pol = SmwPolicy(net, [0.5, 0.5])
    curve = exact_exponent_curve(net, pol, [10, 20, 30])
    neglog = [-math.log(p) for _, p in curve]
    assert neglog == sorted(neglog)

    K = 10
    exact = dict(curve)[K]
    steps, warmup = 400_000, 40_000
    rep = run_jump_chain(net, pol, K, steps, warmup=warmup, seed=21)
    n = steps - warmup
    se = math.sqrt(exact * (1 - exact) / n)
    # allow extra slack for autocorrelation in the chain
    assert abs(rep.drop_fraction - exact) <= 6 * se


def test_alpha_ordering_at_finite_k():
    net = example1()
    p_heavy = stationary_drop_probability(
        net, SmwPolicy(net, [0.9, 0.1]), 40).drop_probability
    p_uniform = stationary_drop_probability(
        net, SmwPolicy(net, [0.5, 0.5]), 40).drop_probability
    assert p_heavy < p_uniform


def test_crp_violating_floor():
    net = example1_crp_violated()
    for K in (1, 5, 10, 20):
        sol = stationary_drop_probability(net, vanilla_policy(net), K)
        assert sol.drop_probability >= 1 / 8 - 1e-12
