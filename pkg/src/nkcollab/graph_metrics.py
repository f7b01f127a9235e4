"""Structural measures of directed graphs with unit edge weights.

Mean degree, degree skewness, characteristic path length with connected
fraction, and mean minimum st-cut. Path length and min-cut support stratified
sampling: nodes are ranked by total degree (ties by node id), cut into equal
count strata, and the same number of nodes is drawn from every stratum.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import kernels


class UndefinedMetricError(ValueError):
    """The statistic does not exist for this graph (no connected pairs, zero variance, ...)."""


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """CSR out-adjacency; ``labels[i]`` is the external id of node ``i``."""

    out_ptr: np.ndarray
    out_idx: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        ptr = np.ascontiguousarray(self.out_ptr, dtype=np.int64)
        idx = np.ascontiguousarray(self.out_idx, dtype=np.int64)
        object.__setattr__(self, "out_ptr", ptr)
        object.__setattr__(self, "out_idx", idx)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(ptr.shape[0] - 1)))

    @property
    def n_nodes(self) -> int:
        return self.out_ptr.shape[0] - 1

    @property
    def n_edges(self) -> int:
        return self.out_idx.shape[0]

    @property
    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    @property
    def in_degree(self) -> np.ndarray:
        return np.bincount(self.out_idx, minlength=self.n_nodes)

    def edges(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n_nodes, dtype=np.int64), self.out_degree)
        return np.column_stack([src, self.out_idx])

    @classmethod
    def from_edges(cls, n_nodes: int, edges, labels=()) -> "DirectedGraph":
        """Build from integer ``(src, dst)`` pairs; self-loops and duplicates are dropped."""
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n_nodes):
            raise ValueError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        if e.size:
            e = np.unique(e, axis=0)
        ptr = np.zeros(n_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(e[:, 0], minlength=n_nodes), out=ptr[1:])
        return cls(ptr, e[:, 1].copy(), tuple(labels))

    @classmethod
    def from_csr(cls, ptr, idx) -> "DirectedGraph":
        return cls(ptr, idx)

    @cached_property
    def arcs(self):
        """Paired residual arcs for max-flow: arc ``2e`` is edge ``e`` (capacity 1), ``2e+1`` its reverse."""
        e = self.edges()
        m = e.shape[0]
        to = np.empty(2 * m, dtype=np.int64)
        to[0::2] = e[:, 1]
        to[1::2] = e[:, 0]
        tail = np.empty(2 * m, dtype=np.int64)
        tail[0::2] = e[:, 0]
        tail[1::2] = e[:, 1]
        cap = np.zeros(2 * m, dtype=np.int64)
        cap[0::2] = 1
        order = np.argsort(tail, kind="stable")
        nxt = np.full(2 * m, -1, dtype=np.int64)
        same = tail[order[1:]] == tail[order[:-1]]
        nxt[order[:-1][same]] = order[1:][same]
        head = np.full(self.n_nodes, -1, dtype=np.int64)
        first = np.ones(2 * m, dtype=bool)
        first[1:] = ~same
        head[tail[order[first]]] = order[first]
        return head, nxt, to, cap


_SPLIT = re.compile(r"[,\s]+")


def read_edge_list(path) -> DirectedGraph:
    """Parse ``src dst`` lines (whitespace or comma separated, ``#`` comments).

    Node ids may be integers or arbitrary strings; nodes are numbered in order
    of first appearance and the original ids are kept in ``labels``.
    """
    index: dict[str, int] = {}
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p for p in _SPLIT.split(line) if p]
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected 'src dst', got {line!r}")
            ids = []
            for tok in parts[:2]:
                if tok not in index:
                    index[tok] = len(index)
                ids.append(index[tok])
            pairs.append(ids)
    labels = []
    for tok in index:
        labels.append(int(tok) if re.fullmatch(r"-?\d+", tok) else tok)
    return DirectedGraph.from_edges(len(index), pairs, labels)


def write_edge_list(g: DirectedGraph, path) -> None:
    with open(path, "w") as fh:
        for s, t in g.edges():
            fh.write(f"{g.labels[s]} {g.labels[t]}\n")


def mean_degree(g: DirectedGraph) -> float:
    if g.n_nodes == 0:
        raise UndefinedMetricError("mean degree of an empty graph")
    return g.n_edges / g.n_nodes


def degree_skewness(g: DirectedGraph, direction: str = "out") -> float:
    """Adjusted Fisher-Pearson sample skewness G1 of the in- or out-degree distribution."""
    if direction not in ("in", "out"):
        raise ValueError("direction must be 'in' or 'out'")
    x = (g.in_degree if direction == "in" else g.out_degree).astype(np.float64)
    n = x.shape[0]
    if n < 3:
        raise UndefinedMetricError("skewness needs at least 3 nodes")
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 == 0.0:
        raise UndefinedMetricError("degree distribution has zero variance")
    g1 = np.mean(d ** 3) / m2 ** 1.5
    return float(math.sqrt(n * (n - 1)) / (n - 2) * g1)


@dataclass(frozen=True)
class SamplingPlan:
    per_stratum: int
    strata: int = 12
    seed: int = 0

    def __post_init__(self):
        if self.strata < 1 or self.per_stratum < 1:
            raise ValueError("strata and per_stratum must be >= 1")


def degree_strata(g: DirectedGraph, strata: int = 12) -> list[np.ndarray]:
    """Equal-count node groups by ascending total degree, ties broken by node id."""
    total = g.in_degree + g.out_degree
    order = np.lexsort((np.arange(g.n_nodes), total))
    k = min(strata, g.n_nodes)
    return [part for part in np.array_split(order, k) if part.size]


def stratified_nodes(g: DirectedGraph, plan: SamplingPlan, rng: np.random.Generator, repeats: bool = False):
    """Draw ``plan.per_stratum`` nodes inside each stratum.

    Without ``repeats`` the draw is without replacement and capped at the
    stratum size. With ``repeats`` a larger request is met by whole shuffled
    passes over the stratum plus one partial pass, so every node appears
    ``floor`` or ``ceil`` of the average number of times.

    Returns ``(nodes, weights, stratum_of)`` where ``weights`` are inverse
    inclusion rates (stratum size over stratum sample size).
    """
    nodes, weights, which = [], [], []
    for h, part in enumerate(degree_strata(g, plan.strata)):
        take = plan.per_stratum if repeats else min(plan.per_stratum, part.size)
        full, rest = divmod(take, part.size)
        draw = [rng.permutation(part) for _ in range(full)]
        draw.append(rng.choice(part, size=rest, replace=False))
        nodes.append(np.concatenate(draw))
        weights.append(np.full(take, part.size / take))
        which.append(np.full(take, h))
    return np.concatenate(nodes), np.concatenate(weights), np.concatenate(which)


@dataclass(frozen=True)
class PathStats:
    mean_path: float
    connected_fraction: float
    n_sources: int
    exact: bool


def path_length(g: DirectedGraph, plan: SamplingPlan | None = None) -> PathStats:
    """Characteristic path length over connected ordered pairs, and the connected fraction.

    With ``plan=None`` every node is a BFS source; otherwise sources are drawn
    by :func:`stratified_nodes` and totals are weighted by inverse inclusion
    probability. Raises :class:`UndefinedMetricError` when no ordered pair is
    connected (the connected fraction is then 0 and is carried on the error).
    """
    n = g.n_nodes
    if n == 0:
        raise UndefinedMetricError("empty graph")
    if plan is None:
        sources = np.arange(n, dtype=np.int64)
        weights = np.ones(n)
    else:
        sources, weights, _ = stratified_nodes(g, plan, np.random.default_rng(plan.seed))
    sums, reach = kernels.bfs_distance_sums(g.out_ptr, g.out_idx, sources)
    pairs = float(np.dot(weights, reach))
    frac = pairs / (n * (n - 1)) if n > 1 else 0.0
    if pairs == 0.0:
        err = UndefinedMetricError("no connected ordered pairs")
        err.connected_fraction = 0.0
        raise err
    return PathStats(float(np.dot(weights, sums)) / pairs, frac, int(sources.shape[0]), plan is None)


def max_flow(g: DirectedGraph, s: int, t: int) -> tuple[int, np.ndarray]:
    """Unit-capacity max-flow value from ``s`` to ``t`` and the residual arc capacities."""
    if s == t:
        raise ValueError("source and sink must differ")
    head, nxt, to, cap = g.arcs
    flow, residual = kernels.unit_max_flow(g.n_nodes, head, nxt, to, cap, s, t)
    return int(flow), residual


def min_cut(g: DirectedGraph, s: int, t: int) -> tuple[int, np.ndarray]:
    """Minimum st-cut: ``(size, source_side)`` with ``source_side`` a boolean node mask.

    The cut is read off the final residual graph, so ``size`` is counted
    independently of the flow value (they agree by max-flow/min-cut duality).
    """
    _, residual = max_flow(g, s, t)
    head, nxt, to, _ = g.arcs
    side = np.zeros(g.n_nodes, dtype=bool)
    side[s] = True
    stack = [s]
    while stack:
        u = stack.pop()
        e = head[u]
        while e >= 0:
            v = to[e]
            if residual[e] > 0 and not side[v]:
                side[v] = True
                stack.append(v)
            e = nxt[e]
    edges = g.edges()
    size = int(np.count_nonzero(side[edges[:, 0]] & ~side[edges[:, 1]]))
    return size, side


@dataclass(frozen=True)
class MinCutStats:
    mean_min_cut: float
    n_pairs: int
    resampled: int
    dropped: int
    exact: bool


def reachable(g: DirectedGraph, s: int) -> np.ndarray:
    """Boolean mask of nodes reachable from ``s`` by a directed path (``s`` included)."""
    seen = np.zeros(g.n_nodes, dtype=bool)
    seen[s] = True
    frontier = np.array([s], dtype=np.int64)
    ptr, idx = g.out_ptr, g.out_idx
    while frontier.size:
        lo, hi = ptr[frontier], ptr[frontier + 1]
        cnt = hi - lo
        offs = np.repeat(lo - np.concatenate(([0], np.cumsum(cnt)[:-1])), cnt)
        nb = idx[np.arange(cnt.sum()) + offs]
        nb = np.unique(nb[~seen[nb]])
        seen[nb] = True
        frontier = nb
    return seen


def mean_min_cut(g: DirectedGraph, plan: SamplingPlan | None = None) -> MinCutStats:
    """Mean minimum st-cut over ordered pairs joined by a directed path.

    Exact mode runs max-flow on every ordered pair ``s -> t`` with ``t``
    reachable from ``s``. Sampled mode draws ``per_stratum`` sources and as
    many sinks from every stratum (repeats allowed, so the pair count is not
    capped by the graph size) and pairs them at random. When the drawn sink is
    ``s`` itself or unreachable from ``s`` it is redrawn among the reachable
    nodes of the same stratum, and the pair is weighted by the reachable share
    of that stratum so the ratio estimator still targets the all-pairs mean.
    A pair whose sink stratum holds no reachable node is dropped.
    """
    n = g.n_nodes
    if n < 2:
        raise UndefinedMetricError("need at least two nodes")
    head, nxt, to, cap = g.arcs
    total = 0.0
    wsum = 0.0
    count = resampled = dropped = 0
    if plan is None:
        for s in range(n):
            r = reachable(g, s)
            r[s] = False
            for t in np.nonzero(r)[0].tolist():
                f, _ = kernels.unit_max_flow(n, head, nxt, to, cap, s, t)
                total += f
                wsum += 1.0
                count += 1
    else:
        rng = np.random.default_rng(plan.seed)
        strata = degree_strata(g, plan.strata)
        src, w_src, _ = stratified_nodes(g, plan, rng, repeats=True)
        dst, w_dst, h_dst = stratified_nodes(g, plan, rng, repeats=True)
        perm = rng.permutation(dst.shape[0])
        dst, w_dst, h_dst = dst[perm], w_dst[perm], h_dst[perm]
        reach_cache: dict = {}
        for s, t, w, h in zip(src.tolist(), dst.tolist(), (w_src * w_dst).tolist(), h_dst.tolist()):
            if s not in reach_cache:
                r = reachable(g, s)
                r[s] = False
                reach_cache[s] = r
            ok = reach_cache[s][strata[h]]
            share = ok.mean()
            if share == 0.0:
                dropped += 1
                continue
            if not reach_cache[s][t]:
                resampled += 1
                t = int(rng.choice(strata[h][ok]))
            f, _ = kernels.unit_max_flow(n, head, nxt, to, cap, s, t)
            total += w * share * f
            wsum += w * share
            count += 1
    if count == 0:
        raise UndefinedMetricError("no connected pairs")
    return MinCutStats(total / wsum, count, resampled, dropped, plan is None)


def calibrate_sample_size(
    g: DirectedGraph,
    metric: str = "path",
    sizes=(1, 2, 4, 8, 16),
    repeats: int = 20,
    seed: int = 0,
    target: float = 0.10,
) -> dict:
    """Relative error of the sampled estimator against the exact value, per sample size.

    Returns the error curve and the smallest per-stratum size whose mean relative
    error falls below ``target`` (``None`` if no size qualifies).
    """
    if metric == "path":
        exact = path_length(g).mean_path
        estimate = lambda plan: path_length(g, plan).mean_path  # noqa: E731
    elif metric == "mincut":
        exact = mean_min_cut(g).mean_min_cut
        estimate = lambda plan: mean_min_cut(g, plan).mean_min_cut  # noqa: E731
    else:
        raise ValueError("metric must be 'path' or 'mincut'")
    seeds = np.random.SeedSequence(seed).generate_state(repeats)
    curve = []
    for size in sizes:
        errs = [abs(estimate(SamplingPlan(per_stratum=size, seed=int(sd))) - exact) / exact for sd in seeds]
        curve.append({"per_stratum": size, "mean_relative_error": float(np.mean(errs)), "max_relative_error": float(np.max(errs))})
    ok = [c["per_stratum"] for c in curve if c["mean_relative_error"] < target]
    return {"metric": metric, "exact": exact, "curve": curve, "recommended": ok[0] if ok else None}


REPORT_COLUMNS = (
    "nodes",
    "edges",
    "mean_degree",
    "in_degree_skewness",
    "out_degree_skewness",
    "path_length",
    "connected_fraction",
    "mean_min_cut",
)


def metrics_report(
    g: DirectedGraph, path_plan: SamplingPlan | None = None, cut_plan: SamplingPlan | None = None, with_min_cut: bool = True
) -> dict:
    """All measures for one graph; undefined values are ``None``."""

    def attempt(fn):
        try:
            return fn()
        except UndefinedMetricError:
            return None

    report = {"nodes": g.n_nodes, "edges": g.n_edges, "mean_degree": attempt(lambda: mean_degree(g))}
    report["in_degree_skewness"] = attempt(lambda: degree_skewness(g, "in"))
    report["out_degree_skewness"] = attempt(lambda: degree_skewness(g, "out"))
    try:
        ps = path_length(g, path_plan)
        report["path_length"], report["connected_fraction"] = ps.mean_path, ps.connected_fraction
    except UndefinedMetricError as err:
        report["path_length"], report["connected_fraction"] = None, getattr(err, "connected_fraction", None)
    report["mean_min_cut"] = attempt(lambda: mean_min_cut(g, cut_plan).mean_min_cut) if with_min_cut else None
    return report


def write_report_csv(report: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        w.writerow(["" if report.get(c) is None else report[c] for c in REPORT_COLUMNS])


def write_report_json(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2))
