"""NK rugged landscapes: generation, evaluation and serialization.

Each locus ``i`` owns a payoff table with ``2**(k+1)`` entries. The table index
is the integer whose bits, most significant first, are ``S[i]`` followed by
``S[neighbors[i][0]], ..., S[neighbors[i][k-1]]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import kernels


@dataclass(frozen=True, eq=False)
class NkModel:
    n: int
    k: int
    neighbors: np.ndarray
    payoff_tables: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        nb = np.ascontiguousarray(self.neighbors, dtype=np.int64).reshape(self.n, self.k)
        tables = np.ascontiguousarray(self.payoff_tables, dtype=np.float64)
        if tables.shape != (self.n, 2 ** (self.k + 1)):
            raise ValueError(f"payoff tables must have shape {(self.n, 2 ** (self.k + 1))}, got {tables.shape}")
        if tables.size and (tables.min() < 0.0 or tables.max() > 1.0):
            raise ValueError("payoff values must lie in [0, 1]")
        for i in range(self.n):
            row = nb[i]
            if len(set(row.tolist())) != self.k or (row == i).any() or ((row < 0) | (row >= self.n)).any():
                raise ValueError(f"locus {i}: neighbors must be {self.k} distinct loci other than {i}")
        nb.setflags(write=False)
        tables.setflags(write=False)
        object.__setattr__(self, "neighbors", nb)
        object.__setattr__(self, "payoff_tables", tables)

    def __eq__(self, other):
        if not isinstance(other, NkModel):
            return NotImplemented
        return (
            self.n == other.n
            and self.k == other.k
            and self.seed == other.seed
            and np.array_equal(self.neighbors, other.neighbors)
            and np.array_equal(self.payoff_tables, other.payoff_tables)
        )

    __hash__ = object.__hash__

    @cached_property
    def loci(self) -> np.ndarray:
        """``(n, k+1)`` array: each locus followed by its neighbors, in index-bit order."""
        out = np.empty((self.n, self.k + 1), dtype=np.int64)
        out[:, 0] = np.arange(self.n)
        out[:, 1:] = self.neighbors
        return out

    @cached_property
    def dependents(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR map from a bit to the loci whose value reads it.

        Returns ``(ptr, locus, mask)``: flipping bit ``j`` toggles ``mask[q]`` in
        the table index of ``locus[q]`` for ``q`` in ``ptr[j]:ptr[j+1]``.
        """
        width = self.k + 1
        bit = self.loci.ravel()
        owner = np.repeat(np.arange(self.n, dtype=np.int64), width)
        mask = np.tile(np.left_shift(1, np.arange(width - 1, -1, -1, dtype=np.int64)), self.n)
        order = np.lexsort((owner, bit))
        ptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(bit, minlength=self.n), out=ptr[1:])
        return ptr, owner[order].copy(), mask[order].copy()


def generate_model(n: int, k: int, seed: int | np.random.Generator | None = None) -> NkModel:
    """Draw a random NK model.

    Neighbors of each locus are sampled uniformly without replacement from the
    other ``n - 1`` loci; every payoff entry is an independent U[0, 1) draw.
    Passing an integer seed makes the model reproducible and records the seed.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if k < 0 or k >= n:
        raise ValueError(f"k must satisfy 0 <= k < n, got k={k}, n={n}")
    if isinstance(seed, np.random.Generator):
        rng, stored = seed, None
    else:
        rng, stored = np.random.default_rng(seed), (None if seed is None else int(seed))
    neighbors = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        pick = rng.choice(n - 1, size=k, replace=False)
        neighbors[i] = pick + (pick >= i)
    tables = rng.random((n, 2 ** (k + 1)))
    return NkModel(n=n, k=k, neighbors=neighbors, payoff_tables=tables, seed=stored)


def as_solution(bits, n: int) -> np.ndarray:
    s = np.asarray(bits)
    if s.ndim != 1 or s.shape[0] != n:
        raise ValueError(f"solution must be a length-{n} bit vector, got shape {s.shape}")
    if s.size and not np.isin(s, (0, 1)).all():
        raise ValueError("solution entries must be 0 or 1")
    return np.ascontiguousarray(s, dtype=np.uint8)


def random_solutions(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=(count, n), dtype=np.uint8)


def locus_value(model: NkModel, s, i: int) -> float:
    s = as_solution(s, model.n)
    if not 0 <= i < model.n:
        raise IndexError(f"locus {i} out of range for n={model.n}")
    idx = 0
    for bit in s[model.loci[i]]:
        idx = (idx << 1) | int(bit)
    return float(model.payoff_tables[i, idx])


def locus_values(model: NkModel, s) -> np.ndarray:
    """All ``n`` locus values of one solution."""
    s = as_solution(s, model.n)
    idx = kernels.locus_indices(model.payoff_tables, model.loci, s[None, :])[0]
    return model.payoff_tables[np.arange(model.n), idx]


def fitness(model: NkModel, s) -> float:
    s = as_solution(s, model.n)
    return float(kernels.fitness_batch(model.payoff_tables, model.loci, s[None, :])[0])


def fitness_many(model: NkModel, sols: np.ndarray) -> np.ndarray:
    sols = np.ascontiguousarray(sols, dtype=np.uint8)
    if sols.ndim != 2 or sols.shape[1] != model.n:
        raise ValueError(f"expected an (m, {model.n}) array of solutions, got {sols.shape}")
    return kernels.fitness_batch(model.payoff_tables, model.loci, sols)


def local_score(model: NkModel, s, loci) -> float:
    """Mean locus value over a subset of loci."""
    loci = np.unique(np.asarray(list(loci), dtype=np.int64))
    if loci.size == 0:
        raise ValueError("loci must be non-empty")
    if loci[0] < 0 or loci[-1] >= model.n:
        raise IndexError("locus index out of range")
    return float(np.mean(locus_values(model, s)[loci]))


def flip_delta(model: NkModel, s, j: int) -> float:
    """Change in ``n * fitness`` caused by flipping bit ``j``, touching only affected loci."""
    s = as_solution(s, model.n)
    ptr, locus, mask = model.dependents
    delta = 0.0
    for q in range(ptr[j], ptr[j + 1]):
        l = locus[q]
        idx = 0
        for bit in s[model.loci[l]]:
            idx = (idx << 1) | int(bit)
        delta += model.payoff_tables[l, idx ^ mask[q]] - model.payoff_tables[l, idx]
    return float(delta)


def to_dict(model: NkModel) -> dict:
    return {
        "n": model.n,
        "k": model.k,
        "seed": model.seed,
        "neighbors": model.neighbors.tolist(),
        "payoff_tables": model.payoff_tables.tolist(),
    }


def from_dict(data: dict) -> NkModel:
    n, k = int(data["n"]), int(data["k"])
    return NkModel(
        n=n,
        k=k,
        neighbors=np.asarray(data["neighbors"], dtype=np.int64).reshape(n, k),
        payoff_tables=np.asarray(data["payoff_tables"], dtype=np.float64),
        seed=data.get("seed"),
    )


def save_model(model: NkModel, path) -> None:
    Path(path).write_text(json.dumps(to_dict(model)))


def load_model(path) -> NkModel:
    return from_dict(json.loads(Path(path).read_text()))
