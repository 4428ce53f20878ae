"""Network instance: bipartite compatibility graph plus normalized demand matrix.

Supply nodes are indexed 0..n-1 and demand nodes 0..m-1.  The demand matrix
``phi`` has one row per demand (origin) node and one column per destination
(supply) node; after normalization its entries sum to one.  Optional travel
and pickup time matrices (minutes) enable the timed simulator.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

NORMALIZATION_TOL = 1e-12
DEFAULT_SUBSET_CAP = 20


class NetworkError(ValueError):
    """Raised for structurally invalid network instances."""


class SubsetCapError(NetworkError):
    """Raised when exact subset enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class Network:
    n_supply: int
    n_demand: int
    edges: frozenset  # of (supply index, demand index) pairs
    phi: np.ndarray  # m x n, normalized to total mass 1
    travel_time: np.ndarray | None = None  # n x n minutes
    pickup_time: np.ndarray | None = None  # n x n minutes

    def __post_init__(self):
        self.phi.setflags(write=False)
        for t in (self.travel_time, self.pickup_time):
            if t is not None:
                t.setflags(write=False)

    # --- structural helpers -------------------------------------------------

    def supply_neighbors(self, demand_node: int) -> tuple:
        """Compatible supply nodes of one demand node, ascending."""
        return tuple(sorted(i for (i, j) in self.edges if j == demand_node))

    def demand_neighbors(self, supply_node: int) -> tuple:
        """Compatible demand nodes of one supply node, ascending."""
        return tuple(sorted(j for (i, j) in self.edges if i == supply_node))

    def row_rates(self) -> np.ndarray:
        """Total arrival rate per demand (origin) node."""
        return self.phi.sum(axis=1)

    def col_rates(self) -> np.ndarray:
        """Total supply inflow rate per supply (destination) node."""
        return self.phi.sum(axis=0)

    def to_json(self) -> dict:
        d = {
            "n_supply": self.n_supply,
            "n_demand": self.n_demand,
            "edges": sorted([list(e) for e in self.edges]),
            "phi": self.phi.tolist(),
        }
        if self.travel_time is not None:
            d["travel_time"] = self.travel_time.tolist()
        if self.pickup_time is not None:
            d["pickup_time"] = self.pickup_time.tolist()
        return d


@dataclass
class ValidationReport:
    normalized: bool
    original_mass: float
    nontrivial: bool
    crp_holds: bool
    hall_gap: float
    lambda_min: float
    violating_subsets: list  # of (demand subset tuple, slack)
    epsilon_floor_drop: float

    def to_json(self) -> dict:
        d = asdict(self)
        d["violating_subsets"] = [
            {"subset": list(j), "slack": s} for (j, s) in self.violating_subsets
        ]
        return d


def build_network(n_supply, n_demand, edges, phi, travel_time=None,
                  pickup_time=None) -> Network:
    """Construct a validated, normalized Network.

    Demand nodes whose row of ``phi`` is all zero are dropped (with a
    warning) and indices are compacted.  ``phi`` is normalized to total
    mass one; an isolated demand node or out-of-range edge raises
    NetworkError.
    """
    n, m = int(n_supply), int(n_demand)
    if n <= 0 or m <= 0:
        raise NetworkError("network must have at least one supply and one demand node")
    phi = np.array(phi, dtype=float)
    if phi.shape != (m, n):
        raise NetworkError(f"phi must be {m}x{n}, got {phi.shape}")
    if np.any(phi < 0) or not np.all(np.isfinite(phi)):
        raise NetworkError("phi entries must be finite and nonnegative")

    edges = {(int(i), int(j)) for (i, j) in edges}
    for (i, j) in edges:
        if not (0 <= i < n and 0 <= j < m):
            raise NetworkError(f"edge ({i},{j}) out of range")

    # drop zero-rate demand nodes, compact indices
    keep = [j for j in range(m) if phi[j].sum() > 0.0]
    if len(keep) < m:
        warnings.warn(
            f"dropping {m - len(keep)} demand node(s) with zero arrival rate",
            stacklevel=2,
        )
        remap = {old: new for new, old in enumerate(keep)}
        phi = phi[keep]
        edges = {(i, remap[j]) for (i, j) in edges if j in remap}
        m = len(keep)
        if m == 0:
            raise NetworkError("all demand nodes have zero arrival rate")

    for j in range(m):
        if not any(e[1] == j for e in edges):
            raise NetworkError(f"demand node {j} has no compatible supply node")
    for i in range(n):
        # an edgeless supply node is an absorbing sink in the closed
        # network: units that land there never serve anyone again
        if not any(e[0] == i for e in edges):
            raise NetworkError(f"supply node {i} has no compatible demand node")

    mass = phi.sum()
    phi = phi / mass

    def _times(t, name):
        if t is None:
            return None
        t = np.array(t, dtype=float)
        if t.shape != (n, n):
            raise NetworkError(f"{name} must be {n}x{n}")
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise NetworkError(f"{name} entries must be finite and nonnegative")
        return t

    return Network(n, m, frozenset(edges), phi,
                   _times(travel_time, "travel_time"),
                   _times(pickup_time, "pickup_time"))


def load_network(path) -> Network:
    """Load a Network from its JSON file schema."""
    with open(path) as fh:
        d = json.load(fh)
    return build_network(
        d["n_supply"], d["n_demand"], d["edges"], d["phi"],
        d.get("travel_time"), d.get("pickup_time"),
    )


def save_network(net: Network, path) -> None:
    with open(path, "w") as fh:
        json.dump(net.to_json(), fh, indent=2)
        fh.write("\n")


def neighborhood(net: Network, demand_subset) -> frozenset:
    """Union of compatible supply nodes over a set of demand nodes."""
    sub = set(demand_subset)
    return frozenset(i for (i, j) in net.edges if j in sub)


def demand_neighborhood(net: Network, supply_subset) -> frozenset:
    """Symmetric variant: compatible demand nodes of a set of supply nodes."""
    sub = set(supply_subset)
    return frozenset(j for (i, j) in net.edges if i in sub)


def iter_demand_subsets(net: Network, cap: int = DEFAULT_SUBSET_CAP):
    """Yield every nonempty strict subset of demand nodes as a sorted tuple.

    Exhaustive (2^m - 2 subsets); guarded by a hard cap on m.
    """
    m = net.n_demand
    if m > cap:
        raise SubsetCapError(
            f"{m} demand nodes exceed the subset enumeration cap ({cap})")
    for size in range(1, m):
        yield from itertools.combinations(range(m), size)


def validate_network(net: Network, cap: int = DEFAULT_SUBSET_CAP,
                     original_mass: float = 1.0) -> ValidationReport:
    """Check the two model assumptions and compute structural constants.

    The Hall gap is the minimum, over nonempty strict demand subsets J, of
    the supply inflow to the neighborhood of J minus the demand rate of J.
    Pooling holds iff the gap is strictly positive.  When some subset's
    inequality is strictly reversed, its deficit is an unavoidable drop
    fraction, reported as ``epsilon_floor_drop``.
    """
    row = net.row_rates()
    col = net.col_rates()

    nontrivial = False
    for j in range(net.n_demand):
        nbrs = set(net.supply_neighbors(j))
        for k in range(net.n_supply):
            if k not in nbrs and net.phi[j, k] > 0:
                nontrivial = True
                break
        if nontrivial:
            break

    hall_gap = np.inf
    violating = []
    eps_floor = 0.0
    if net.n_demand == 1:
        hall_gap = np.inf  # no strict subsets exist; vacuously pooled
    for J in iter_demand_subsets(net, cap):
        boundary = neighborhood(net, J)
        slack = sum(col[i] for i in boundary) - sum(row[j] for j in J)
        if slack < hall_gap:
            hall_gap = slack
        if slack <= 0:
            violating.append((J, float(slack)))
        if -slack > eps_floor:
            eps_floor = float(-slack)

    hall_gap = float(hall_gap) if np.isfinite(hall_gap) else float("inf")
    return ValidationReport(
        normalized=abs(original_mass - 1.0) > NORMALIZATION_TOL,
        original_mass=float(original_mass),
        nontrivial=nontrivial,
        crp_holds=hall_gap > 0,
        hall_gap=hall_gap,
        lambda_min=float(col.min()),
        violating_subsets=violating,
        epsilon_floor_drop=eps_floor,
    )


def symmetrize_demand(phi_raw, eta: float) -> np.ndarray:
    """Blend a square demand matrix with its transpose-symmetrized version.

    Returns eta * phi + (1 - eta) * (phi + phi^T) / 2.  The caller
    normalizes the result; eta=1 is the identity, eta=0 is fully symmetric.
    """
    phi_raw = np.array(phi_raw, dtype=float)
    if phi_raw.ndim != 2 or phi_raw.shape[0] != phi_raw.shape[1]:
        raise NetworkError("symmetrization requires a square matrix")
    if not 0.0 <= eta <= 1.0:
        raise NetworkError("eta must lie in [0, 1]")
    return eta * phi_raw + (1.0 - eta) * 0.5 * (phi_raw + phi_raw.T)
