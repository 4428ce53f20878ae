"""Exact jump-chain oracle for small fleets.

Enumerates the full state space (compositions of K over the supply
nodes), builds the one-step transition matrix under a given policy, and
computes stationary drop probabilities exactly.  Anchors every Monte
Carlo estimate and exponent claim in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .network import Network
from .policies import DROP, Policy
from .sim import proportional_init

DEFAULT_STATE_CAP = 2_000_000
DENSE_SOLVE_LIMIT = 2000
POWER_TOL = 1e-12
POWER_MAX_ITER = 1_000_000


class StateCapError(ValueError):
    """State space would exceed the configured cap."""


@dataclass
class StateSpace:
    states: np.ndarray          # count x n integer matrix
    index: dict                 # tuple(state) -> row

    @classmethod
    def enumerate(cls, n: int, K: int, cap: int = DEFAULT_STATE_CAP):
        count = comb(K + n - 1, n - 1)
        if count > cap:
            raise StateCapError(
                f"{count} states exceed the cap ({cap}) for n={n}, K={K}")
        states = []

        def rec(prefix, remaining, slots):
            if slots == 1:
                states.append(prefix + [remaining])
                return
            for v in range(remaining + 1):
                rec(prefix + [v], remaining - v, slots - 1)

        rec([], K, n)
        arr = np.array(states, dtype=np.int64)
        assert arr.shape[0] == count
        return cls(arr, {tuple(s): r for r, s in enumerate(states)})


@dataclass
class ChainSolution:
    stationary: np.ndarray          # over the selected recurrent class states
    class_states: np.ndarray        # global state indices of that class
    drop_probability: float
    recurrent_class_count: int
    residual: float
    space: StateSpace


def build_chain(net: Network, policy: Policy, K: int,
                cap: int = DEFAULT_STATE_CAP):
    """Row-stochastic transition matrix plus per-state drop mass.

    Each state row mixes over all (origin, destination) demand types;
    randomized policies expand into their exact decision distributions.
    Drop events are self-loops whose probability is recorded separately.
    """
    space = StateSpace.enumerate(net.n_supply, K, cap)
    nstates = space.states.shape[0]
    rows, cols, vals = [], [], []
    drop_mass = np.zeros(nstates)
    phi = net.phi
    for r in range(nstates):
        q = space.states[r]
        for j in range(net.n_demand):
            for k in range(net.n_supply):
                p = phi[j, k]
                if p == 0.0:
                    continue
                for dec, w in policy.dispatch_distribution(q, j):
                    pw = p * w
                    if pw == 0.0:
                        continue
                    if dec.source == DROP:
                        drop_mass[r] += pw
                        tgt = r
                    elif dec.source == k:
                        tgt = r
                    else:
                        nxt = q.copy()
                        nxt[dec.source] -= 1
                        nxt[k] += 1
                        tgt = space.index[tuple(nxt)]
                    rows.append(r)
                    cols.append(tgt)
                    vals.append(pw)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(nstates, nstates))
    P.sum_duplicates()
    return P, drop_mass, space


def _closed_classes(P: sp.csr_matrix):
    """Indices of states grouped by closed (recurrent) communicating class."""
    ncomp, labels = connected_components(P, directed=True, connection="strong")
    closed = []
    for c in range(ncomp):
        members = np.flatnonzero(labels == c)
        sub = P[members].tocoo()
        if np.all(labels[sub.col[sub.data > 0]] == c):
            closed.append(members)
    return closed, labels


def _reachable(P: sp.csr_matrix, start: int) -> np.ndarray:
    seen = np.zeros(P.shape[0], dtype=bool)
    stack = [start]
    seen[start] = True
    indptr, indices = P.indptr, P.indices
    while stack:
        r = stack.pop()
        for c in indices[indptr[r]:indptr[r + 1]]:
            if not seen[c]:
                seen[c] = True
                stack.append(c)
    return seen


def _stationary_on(P: sp.csr_matrix, members: np.ndarray) -> np.ndarray:
    sub = P[members][:, members].toarray() if len(members) <= DENSE_SOLVE_LIMIT \
        else None
    if sub is not None:
        # solve pi (P - I) = 0 with a normalization row appended
        A = np.vstack([sub.T - np.eye(len(members)), np.ones(len(members))])
        b = np.zeros(len(members) + 1)
        b[-1] = 1.0
        pi, *_ = np.linalg.lstsq(A, b, rcond=None)
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
        return pi
    # lazy power iteration (aperiodic by construction, same fixed point)
    sub = P[members][:, members].tocsr()
    pi = np.full(len(members), 1.0 / len(members))
    for _ in range(POWER_MAX_ITER):
        nxt = 0.5 * pi + 0.5 * (pi @ sub)
        if np.abs(nxt - pi).sum() < POWER_TOL:
            pi = nxt
            break
        pi = nxt
    else:
        raise RuntimeError(
            f"power iteration failed to reach residual {POWER_TOL}")
    return pi / pi.sum()


def stationary_drop_probability(net: Network, policy: Policy, K: int,
                                cap: int = DEFAULT_STATE_CAP) -> ChainSolution:
    """Exact long-run demand-drop probability under the policy.

    The stationary distribution is computed on the recurrent class
    reachable from the resting-point-proportional initial state; the
    number of recurrent classes is reported rather than averaged over.
    """
    P, drop_mass, space = build_chain(net, policy, K, cap)
    closed, labels = _closed_classes(P)
    start = space.index[tuple(proportional_init(
        policy.rest_weights(net.n_supply), K))]
    seen = _reachable(P, start)
    reachable_closed = [m for m in closed if seen[m[0]]]
    if not reachable_closed:
        raise RuntimeError("no recurrent class reachable from the initial state")
    members = reachable_closed[0]
    pi = _stationary_on(P, members)
    residual = float(np.abs(pi @ P[members][:, members] - pi).sum())
    drop = float(pi @ drop_mass[members])
    return ChainSolution(pi, members, drop, len(closed), residual, space)


def exact_exponent_curve(net: Network, policy: Policy, K_list,
                         cap: int = DEFAULT_STATE_CAP):
    """Exact drop probability per fleet size; feeds the exponent fit."""
    return [(int(K), stationary_drop_probability(net, policy, K, cap)
             .drop_probability) for K in K_list]
