"""Dispatch decision rules: scaled MaxWeight and the benchmark policies.

Every policy maps (queue vector, demand origin) to a supply node or a
drop.  Ties in score-based policies are broken toward the highest node
index.  Randomized policies draw from an injected generator so replays
are exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exponent import check_alpha, uniform_alpha
from .network import Network

DROP = -1

SERVED = "served"
NO_COMPATIBLE_SUPPLY = "no_compatible_supply"
POLICY_DECLINED = "policy_declined"


@dataclass(frozen=True)
class DispatchDecision:
    source: int        # supply index, or DROP
    reason: str

    def __post_init__(self):
        assert (self.source == DROP) == (self.reason != SERVED)


_DECISION_CACHE = {}


def _decision(source, reason):
    key = (source, reason)
    d = _DECISION_CACHE.get(key)
    if d is None:
        d = _DECISION_CACHE[key] = DispatchDecision(source, reason)
    return d


class Policy:
    """Base: subclasses implement dispatch(queues, origin[, rng])."""

    name = "base"
    state_dependent = True

    def dispatch(self, queues, origin, rng=None) -> DispatchDecision:
        raise NotImplementedError

    def dispatch_distribution(self, queues, origin):
        """Exact decision distribution as [(source_or_DROP, prob)] pairs.

        Deterministic policies return a single atom; the chain oracle
        uses this to expand randomized policies into mixture transitions.
        """
        return [(self.dispatch(queues, origin), 1.0)]

    def rest_weights(self, n: int) -> np.ndarray:
        """Weights used for the default initial supply placement."""
        return uniform_alpha(n)


class SmwPolicy(Policy):
    """Dispatch from the compatible node with the largest scaled queue.

    Score is queues[i] / alpha[i]; drop only when every compatible queue
    is empty; ties go to the highest index.
    """

    name = "smw"

    def __init__(self, net: Network, alpha):
        self.net = net
        self.alpha = check_alpha(alpha, net.n_supply)
        self._inv = 1.0 / self.alpha
        self._nbrs = [net.supply_neighbors(j) for j in range(net.n_demand)]

    def dispatch(self, queues, origin, rng=None):
        best, src = 0.0, DROP
        for i in self._nbrs[origin]:
            q = queues[i]
            if q > 0:
                score = q * self._inv[i]
                if score >= best:   # >= prefers the higher index on ties
                    best, src = score, i
        if src == DROP:
            return _decision(DROP, NO_COMPATIBLE_SUPPLY)
        return _decision(src, SERVED)

    def rest_weights(self, n):
        return self.alpha


def vanilla_policy(net: Network) -> SmwPolicy:
    """Unscaled MaxWeight: SMW with uniform scaling."""
    p = SmwPolicy(net, uniform_alpha(net.n_supply))
    p.name = "vanilla"
    return p


class PriorityPolicy(Policy):
    """Serve each demand node from a fixed ordered list of supply nodes."""

    name = "priority"

    def __init__(self, net: Network, priority_lists):
        self.net = net
        self.lists = []
        for j in range(net.n_demand):
            lst = [int(i) for i in priority_lists[j]]
            if sorted(lst) != sorted(net.supply_neighbors(j)):
                raise ValueError(
                    f"priority list for demand node {j} is not a permutation "
                    f"of its compatible supply nodes")
            self.lists.append(lst)

    def dispatch(self, queues, origin, rng=None):
        for i in self.lists[origin]:
            if queues[i] > 0:
                return _decision(i, SERVED)
        return _decision(DROP, NO_COMPATIBLE_SUPPLY)


class FluidPolicy(Policy):
    """State-independent randomized dispatch from a fluid flow table.

    Supply node i is drawn with probability flow[i, origin] / demand rate
    of the origin; residual mass is an explicit decline.  If the sampled
    node is empty the demand is dropped -- no fallback, by definition of
    state-independent policies.
    """

    name = "fluid"
    state_dependent = False

    def __init__(self, net: Network, flow_table):
        self.net = net
        flow = np.array(flow_table, dtype=float)
        if flow.shape != (net.n_supply, net.n_demand):
            raise ValueError("flow table must be n_supply x n_demand")
        mu = net.row_rates()
        if np.any(np.abs(flow.sum(axis=0) - mu) > 1e-9):
            raise ValueError("flow column sums must equal the demand rates")
        self.flow = flow
        # per-origin sampling tables: sources plus an explicit decline atom
        self._sources, self._probs = [], []
        for j in range(net.n_demand):
            probs = flow[:, j] / mu[j]
            src = [i for i in range(net.n_supply) if probs[i] > 0]
            p = [probs[i] for i in src]
            resid = 1.0 - sum(p)
            if resid > 1e-12:
                src.append(DROP)
                p.append(resid)
            self._sources.append(np.array(src))
            self._probs.append(np.array(p) / np.sum(p))

    def dispatch(self, queues, origin, rng=None):
        if rng is None:
            raise ValueError("fluid dispatch needs a random generator")
        src = int(rng.choice(self._sources[origin], p=self._probs[origin]))
        if src == DROP:
            return _decision(DROP, POLICY_DECLINED)
        if queues[src] <= 0:
            return _decision(DROP, NO_COMPATIBLE_SUPPLY)
        return _decision(src, SERVED)

    def dispatch_distribution(self, queues, origin):
        out = []
        for src, p in zip(self._sources[origin], self._probs[origin]):
            src = int(src)
            if src == DROP:
                out.append((_decision(DROP, POLICY_DECLINED), float(p)))
            elif queues[src] <= 0:
                out.append((_decision(DROP, NO_COMPATIBLE_SUPPLY), float(p)))
            else:
                out.append((_decision(src, SERVED), float(p)))
        return out


class SmwPickupPolicy(Policy):
    """SMW score penalized by pickup time: queues[i]/alpha[i] - beta * D[i, origin]."""

    name = "smw-pickup"

    def __init__(self, net: Network, alpha, beta):
        if net.pickup_time is None:
            raise ValueError("pickup-aware policy requires a pickup time matrix")
        if beta < 0:
            raise ValueError("beta must be nonnegative")
        self.net = net
        self.alpha = check_alpha(alpha, net.n_supply)
        self.beta = float(beta)
        self._inv = 1.0 / self.alpha
        self._nbrs = [net.supply_neighbors(j) for j in range(net.n_demand)]

    def dispatch(self, queues, origin, rng=None):
        best, src = None, DROP
        for i in self._nbrs[origin]:
            if queues[i] > 0:
                score = queues[i] * self._inv[i] \
                    - self.beta * self.net.pickup_time[i, origin]
                if best is None or score >= best:
                    best, src = score, i
        if src == DROP:
            return _decision(DROP, NO_COMPATIBLE_SUPPLY)
        return _decision(src, SERVED)

    def rest_weights(self, n):
        return self.alpha


def policy_from_spec(net: Network, spec: dict) -> Policy:
    """Build a policy from its JSON payload: {"kind": ..., ...}."""
    kind = spec["kind"]
    if kind == "smw":
        return SmwPolicy(net, np.array(spec["alpha"], dtype=float))
    if kind == "vanilla_mw":
        return vanilla_policy(net)
    if kind == "static_priority":
        return PriorityPolicy(net, spec["priority_lists"])
    if kind == "fluid_random":
        return FluidPolicy(net, np.array(spec["flow_table"], dtype=float))
    if kind == "smw_pickup":
        return SmwPickupPolicy(net, np.array(spec["alpha"], dtype=float),
                               spec.get("beta", 0.0))
    raise ValueError(f"unknown policy kind: {kind!r}")
