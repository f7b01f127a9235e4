"""Agents with limited concerns and the co-affiliation network built from them.

Every NK locus spawns two agents whose concern is the locus plus its ``k``
neighbours. Rewiring then resamples individual concern slots, which lowers the
overlap between duplicate agents and raises the mean degree of the network.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .landscape import NkModel


@dataclass(frozen=True)
class Agent:
    id: int
    home_locus: int
    concern: frozenset


@dataclass(frozen=True, eq=False)
class AgentPopulation:
    """Concern sets of all agents.

    ``slots[a, 0]`` is the home locus of agent ``a``; the remaining columns are
    the other concern loci in their current (unsorted) slot order.
    """

    n_loci: int
    slots: np.ndarray

    def __post_init__(self):
        slots = np.ascontiguousarray(self.slots, dtype=np.int64)
        if slots.ndim != 2 or slots.shape[1] < 1:
            raise ValueError("slots must be a 2-d array with at least one column")
        srt = np.sort(slots, axis=1)
        if ((srt[:, 1:] == srt[:, :-1]).any()) or slots.min() < 0 or slots.max() >= self.n_loci:
            raise ValueError("each concern must hold distinct, in-range loci")
        slots.setflags(write=False)
        object.__setattr__(self, "slots", slots)

    def __len__(self):
        return self.slots.shape[0]

    def __eq__(self, other):
        if not isinstance(other, AgentPopulation):
            return NotImplemented
        return self.n_loci == other.n_loci and np.array_equal(self.slots, other.slots)

    __hash__ = object.__hash__

    @property
    def home(self) -> np.ndarray:
        return self.slots[:, 0]

    @cached_property
    def concerns(self) -> np.ndarray:
        """Concern loci per agent, sorted ascending."""
        return np.sort(self.slots, axis=1)

    @cached_property
    def member(self) -> np.ndarray:
        m = np.zeros((len(self), self.n_loci), dtype=np.bool_)
        np.put_along_axis(m, self.slots, True, axis=1)
        return m

    def agent(self, a: int) -> Agent:
        return Agent(id=a, home_locus=int(self.slots[a, 0]), concern=frozenset(self.slots[a].tolist()))

    def __iter__(self):
        return (self.agent(a) for a in range(len(self)))


def build_concerns(model: NkModel) -> AgentPopulation:
    """Two agents per locus (ids ``2i`` and ``2i+1``), each concerned with locus ``i`` and its neighbours."""
    slots = np.repeat(model.loci, 2, axis=0)
    return AgentPopulation(n_loci=model.n, slots=slots)


def rewire(agents: AgentPopulation, p: float, rng: np.random.Generator, rewire_home: bool = False) -> AgentPopulation:
    """Resample each concern slot independently with probability ``p``.

    A resampled slot receives a locus drawn uniformly from those not currently in
    the agent's concern, so concern size never changes. The home slot is left
    alone unless ``rewire_home`` is set. The decision matrix is drawn first, then
    replacements in agent-major, slot-minor order.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"rewiring probability must lie in [0, 1], got {p}")
    slots = agents.slots.copy()
    n_agents, width = slots.shape
    first = 0 if rewire_home else 1
    decide = rng.random((n_agents, width - first)) < p
    free = agents.n_loci - width
    if free <= 0 or not decide.any():
        return AgentPopulation(n_loci=agents.n_loci, slots=slots)
    for a, col in zip(*np.nonzero(decide)):
        current = np.sort(slots[a])
        x = int(rng.integers(0, free))
        for v in current:
            if x >= v:
                x += 1
            else:
                break
        slots[a, col + first] = x
    return AgentPopulation(n_loci=agents.n_loci, slots=slots)


@dataclass(frozen=True, eq=False)
class ConcernNetwork:
    """Undirected co-affiliation graph in CSR form plus the locus-to-agent index."""

    agents: AgentPopulation
    adj_ptr: np.ndarray
    adj_idx: np.ndarray
    locus_ptr: np.ndarray
    locus_agents: np.ndarray
    rewire_p: float | None = None

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.adj_ptr)

    @property
    def mean_degree(self) -> float:
        return float(self.degree.mean())

    @property
    def n_edges(self) -> int:
        return int(self.adj_idx.shape[0] // 2)

    def neighbors(self, a: int) -> np.ndarray:
        return self.adj_idx[self.adj_ptr[a]:self.adj_ptr[a + 1]]

    def has_edge(self, a: int, b: int) -> bool:
        nb = self.neighbors(a)
        i = np.searchsorted(nb, b)
        return bool(i < nb.shape[0] and nb[i] == b)

    def agents_concerned_with(self, locus: int) -> np.ndarray:
        return self.locus_agents[self.locus_ptr[locus]:self.locus_ptr[locus + 1]]

    @property
    def locus_counts(self) -> np.ndarray:
        return np.diff(self.locus_ptr)

    def directed_edges(self) -> np.ndarray:
        """``(2E, 2)`` array with each undirected edge in both directions."""
        src = np.repeat(np.arange(self.n_agents, dtype=np.int64), self.degree)
        return np.column_stack([src, self.adj_idx])


def build_graph(agents: AgentPopulation, rewire_p: float | None = None) -> ConcernNetwork:
    member = agents.member.astype(np.float32)
    shared = member @ member.T
    np.fill_diagonal(shared, 0.0)
    rows, cols = np.nonzero(shared > 0.5)
    adj_ptr = np.zeros(len(agents) + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=len(agents)), out=adj_ptr[1:])

    flat_loci = agents.slots.ravel()
    owners = np.repeat(np.arange(len(agents), dtype=np.int64), agents.slots.shape[1])
    order = np.lexsort((owners, flat_loci))
    locus_ptr = np.zeros(agents.n_loci + 1, dtype=np.int64)
    np.cumsum(np.bincount(flat_loci, minlength=agents.n_loci), out=locus_ptr[1:])
    return ConcernNetwork(
        agents=agents,
        adj_ptr=adj_ptr,
        adj_idx=cols.astype(np.int64),
        locus_ptr=locus_ptr,
        locus_agents=owners[order],
        rewire_p=rewire_p,
    )


def concern_network(model: NkModel, p: float, rng: np.random.Generator, rewire_home: bool = False) -> ConcernNetwork:
    """Build, rewire and connect the agent population for ``model``."""
    agents = rewire(build_concerns(model), p, rng, rewire_home=rewire_home)
    return build_graph(agents, rewire_p=p)


def write_edge_list(net: ConcernNetwork, path) -> None:
    edges = net.directed_edges()
    with open(path, "w") as fh:
        for a, b in edges:
            fh.write(f"{a} {b}\n")


def dump_agents(net: ConcernNetwork, path) -> None:
    payload = {
        "n_loci": net.agents.n_loci,
        "rewire_p": net.rewire_p,
        "agents": [
            {"id": a, "home_locus": int(row[0]), "concern": sorted(row.tolist())}
            for a, row in enumerate(net.agents.slots)
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=1))
