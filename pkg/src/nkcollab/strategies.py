"""Individual hill climbing and the five social learning strategies.

Strategy names: ``Best+I``, ``Conf+I``, ``Best+LI``, ``Conf+LI``, ``LMaj+LI``.
The prefix names the social stage (best neighbour, conformity, local
majority); the suffix names the individual stage (global or local hill
climbing). Every stage is synchronous: all agents read the state left by the
previous stage and write a fresh copy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .concern_network import ConcernNetwork
from .landscape import NkModel, as_solution, fitness_many

STRATEGIES = ("Best+I", "Conf+I", "Best+LI", "Conf+LI", "LMaj+LI")

_SOCIAL = {"Best+I": "best", "Conf+I": "conformity", "Best+LI": "best", "Conf+LI": "conformity", "LMaj+LI": "majority"}


@dataclass(frozen=True)
class StrategyConfig:
    kind: str
    neighbor_sample_size: int = 3
    tie_break: str = "incumbent"
    local_objective: str = "concern"

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.kind!r}; expected one of {', '.join(STRATEGIES)}")
        if self.neighbor_sample_size < 1:
            raise ValueError("neighbor_sample_size must be >= 1")
        if self.tie_break not in ("incumbent", "coin"):
            raise ValueError("tie_break must be 'incumbent' or 'coin'")
        if self.local_objective not in ("concern", "global"):
            raise ValueError("local_objective must be 'concern' or 'global'")

    @property
    def social(self) -> str:
        return _SOCIAL[self.kind]

    @property
    def local(self) -> bool:
        return self.kind.endswith("+LI")


def _deps(model: NkModel):
    ptr, locus, mask = model.dependents
    return model.payoff_tables, model.loci, ptr, locus, mask


def _apply_flips(sols: np.ndarray, flips: np.ndarray) -> np.ndarray:
    out = sols.copy()
    rows = np.nonzero(flips >= 0)[0]
    out[rows, flips[rows]] ^= 1
    return out


def global_flips(model: NkModel, sols: np.ndarray) -> np.ndarray:
    return kernels.global_best_flips(*_deps(model), sols)


def local_flips(model: NkModel, sols: np.ndarray, concerns: np.ndarray, member: np.ndarray) -> np.ndarray:
    return kernels.local_best_flips(*_deps(model), sols, concerns, member)


def individual_step_global(model: NkModel, s) -> np.ndarray:
    """Apply the single bit flip that most improves fitness, if any strictly does."""
    s = as_solution(s, model.n)
    return _apply_flips(s[None, :], global_flips(model, s[None, :]))[0]


def _concern_arrays(model: NkModel, concern):
    loci = np.unique(np.asarray(list(concern), dtype=np.int64))
    if loci.size == 0:
        raise ValueError("concern must be non-empty")
    if loci[0] < 0 or loci[-1] >= model.n:
        raise IndexError("concern locus out of range")
    member = np.zeros((1, model.n), dtype=np.bool_)
    member[0, loci] = True
    return loci[None, :], member


def individual_step_local(model: NkModel, s, concern) -> np.ndarray:
    """Hill-climb step restricted to ``concern`` and scored by the mean value of the concern loci."""
    s = as_solution(s, model.n)
    concerns, member = _concern_arrays(model, concern)
    return _apply_flips(s[None, :], local_flips(model, s[None, :], concerns, member))[0]


def _single_row_adjacency(network: ConcernNetwork, agent: int):
    nb = network.neighbors(agent)
    return np.array([0, nb.shape[0]], dtype=np.int64), np.ascontiguousarray(nb)


def social_step_best_neighbor(
    model: NkModel, agent: int, solutions: np.ndarray, network: ConcernNetwork, rng: np.random.Generator, sample_size: int = 3
) -> np.ndarray:
    """Adopt the fittest of ``min(sample_size, degree)`` sampled neighbours if strictly better."""
    ptr, idx = _single_row_adjacency(network, agent)
    fit = fitness_many(model, solutions)
    u = rng.random((1, sample_size + 1))
    src = kernels.best_neighbor_sources(ptr, idx, fit, fit[agent:agent + 1], u, sample_size)[0]
    return solutions[agent].copy() if src < 0 else solutions[src].copy()


def social_step_conformity(
    agent: int, solutions: np.ndarray, network: ConcernNetwork, rng: np.random.Generator, sample_size: int = 3
) -> np.ndarray:
    """Adopt the most common solution among sampled neighbours; never looks at fitness."""
    ptr, idx = _single_row_adjacency(network, agent)
    u = rng.random((1, sample_size + 1))
    src = kernels.conformity_sources(ptr, idx, np.ascontiguousarray(solutions, dtype=np.uint8), u, sample_size)[0]
    return solutions[agent].copy() if src < 0 else solutions[src].copy()


def majority_tally(shared: np.ndarray, flips: np.ndarray, locus_counts: np.ndarray, tie_break: str = "incumbent", rng=None):
    """Integrate per-agent preferred flips into a new shared string.

    Every agent concerned with a locus votes; an agent votes for the flipped bit
    only at the locus it chose to flip. Returns ``(new_shared, n_ties)``.
    """
    n = shared.shape[0]
    chosen = flips[flips >= 0]
    flip_votes = np.bincount(chosen, minlength=n)
    stay_votes = locus_counts - flip_votes
    flip = flip_votes > stay_votes
    tie = (flip_votes == stay_votes) & (flip_votes > 0)
    n_ties = int(tie.sum())
    if tie_break == "coin" and n_ties:
        if rng is None:
            raise ValueError("coin tie-break needs an rng")
        flip[np.nonzero(tie)[0]] = rng.random(n_ties) < 0.5
    new = shared.copy()
    new[flip] ^= 1
    return new, n_ties


def _scoring_mask(agents, local_objective: str) -> np.ndarray:
    """Loci that count toward an agent's score: its concern, or every locus."""
    if local_objective == "global":
        return np.ones_like(agents.member)
    return agents.member


def majority_preferences(model: NkModel, shared: np.ndarray, network: ConcernNetwork, local_objective: str = "concern") -> np.ndarray:
    """Locus each agent would flip on the shared string (``-1`` for none)."""
    agents = network.agents
    return kernels.shared_local_flips(*_deps(model), shared, agents.concerns, _scoring_mask(agents, local_objective))


def local_majority_round(
    model: NkModel, shared, network: ConcernNetwork, tie_break: str = "incumbent", rng=None
) -> np.ndarray:
    """One local-majority iteration: local preference formation, then a per-locus vote."""
    shared = as_solution(shared, model.n)
    flips = majority_preferences(model, shared, network)
    new, _ = majority_tally(shared, flips, network.locus_counts, tie_break, rng)
    return new


class Population:
    """Mutable state of one trial; :meth:`step` advances one iteration.

    ``solutions`` is ``(agents, n)`` for best-neighbour and conformity
    strategies and ``(1, n)`` (the single shared string) for local majority.
    """

    def __init__(self, model: NkModel, network: ConcernNetwork, config: StrategyConfig, rng: np.random.Generator):
        self.model = model
        self.network = network
        self.config = config
        self.rng = rng
        n_agents = 1 if config.social == "majority" else network.n_agents
        self.solutions = rng.integers(0, 2, size=(n_agents, model.n), dtype=np.uint8)
        self.fitness = fitness_many(model, self.solutions)
        self.fixed = False
        self._score_mask = _scoring_mask(network.agents, config.local_objective)

    @property
    def mean_value(self) -> float:
        return float(self.fitness.mean())

    def step(self) -> float:
        if self.fixed:
            return self.mean_value
        if self.config.social == "majority":
            self._majority_step()
        else:
            self._social_individual_step()
        return self.mean_value

    def _majority_step(self):
        shared = self.solutions[0]
        flips = majority_preferences(self.model, shared, self.network, self.config.local_objective)
        new, ties = majority_tally(shared, flips, self.network.locus_counts, self.config.tie_break, self.rng)
        if np.array_equal(new, shared) and (ties == 0 or self.config.tie_break == "incumbent"):
            self.fixed = True
            return
        self.solutions = new[None, :]
        self.fitness = fitness_many(self.model, self.solutions)

    def _social_individual_step(self):
        net = self.network
        size = self.config.neighbor_sample_size
        u = self.rng.random((net.n_agents, size + 1))
        if self.config.social == "best":
            src = kernels.best_neighbor_sources(net.adj_ptr, net.adj_idx, self.fitness, self.fitness, u, size)
        else:
            src = kernels.conformity_sources(net.adj_ptr, net.adj_idx, self.solutions, u, size)
        adopt = np.nonzero(src >= 0)[0]
        social = self.solutions.copy()
        social[adopt] = self.solutions[src[adopt]]
        if self.config.local:
            flips = local_flips(self.model, social, net.agents.concerns, self._score_mask)
        else:
            flips = global_flips(self.model, social)
        new = _apply_flips(social, flips)
        if (flips < 0).all() and np.array_equal(new, self.solutions) and self._stable(new):
            self.fixed = True
            return
        # copies inherit the source's value exactly; only flipped rows are re-evaluated
        fit = self.fitness.copy()
        fit[adopt] = self.fitness[src[adopt]]
        changed = np.nonzero(flips >= 0)[0]
        if changed.size:
            fit[changed] = fitness_many(self.model, new[changed])
        self.solutions = new
        self.fitness = fit

    def _stable(self, sols) -> bool:
        """No sample of neighbours could change any agent's solution."""
        net = self.network
        src = np.repeat(np.arange(net.n_agents), net.degree)
        if self.config.social == "best":
            return bool((self.fitness[net.adj_idx] <= self.fitness[src]).all())
        packed = np.packbits(sols, axis=1)
        return bool((packed[net.adj_idx] == packed[src]).all())
