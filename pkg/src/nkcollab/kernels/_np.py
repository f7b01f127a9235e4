"""Pure-numpy kernels, selected with ``NKCOLLAB_BACKEND=numpy``.

Floating-point reductions use ``cumsum(...)[..., -1]`` so that additions happen
left to right in the same order as the scalar loops in :mod:`._nb`; the two
backends therefore produce identical values, not merely close ones.
"""

from collections import deque

import numpy as np


def _seq_sum(x, axis=-1):
    if x.shape[axis] == 0:
        return np.zeros(np.delete(x.shape, axis), dtype=np.float64)
    return np.cumsum(x, axis=axis).take(-1, axis=axis)


def _powers(width):
    return np.left_shift(1, np.arange(width - 1, -1, -1, dtype=np.int64))


def locus_indices(tables, loci, sols):
    return sols[:, loci].astype(np.int64) @ _powers(loci.shape[1])


def fitness_batch(tables, loci, sols):
    n = sols.shape[1]
    idx = locus_indices(tables, loci, sols)
    return _seq_sum(tables[np.arange(n), idx], axis=1) / n


def _padded_deps(dep_ptr, dep_locus, dep_mask):
    counts = np.diff(dep_ptr)
    width = max(int(counts.max()) if counts.size else 0, 1)
    n = counts.shape[0]
    cols = np.arange(width)
    valid = cols[None, :] < counts[:, None]
    flat = np.minimum(dep_ptr[:-1, None] + cols[None, :], max(dep_locus.shape[0] - 1, 0))
    loc = np.where(valid, dep_locus[flat], 0)
    mask = np.where(valid, dep_mask[flat], 0)
    return loc.reshape(n, width), mask.reshape(n, width), valid


def _pick_flip(delta, candidates=None):
    arg = np.argmax(delta, axis=1)
    best = delta[np.arange(delta.shape[0]), arg]
    if candidates is not None:
        arg = candidates[np.arange(delta.shape[0]), arg]
    return np.where(best > 0.0, arg, -1).astype(np.int64)


def global_best_flips(tables, loci, dep_ptr, dep_locus, dep_mask, sols):
    idx = locus_indices(tables, loci, sols)
    loc, mask, valid = _padded_deps(dep_ptr, dep_locus, dep_mask)
    cur = idx[:, loc]
    contrib = tables[loc, cur ^ mask] - tables[loc, cur]
    contrib = np.where(valid, contrib, 0.0)
    return _pick_flip(_seq_sum(contrib, axis=2))


def _local_flips(tables, idx, dep_ptr, dep_locus, dep_mask, concerns, member):
    loc, mask, valid = _padded_deps(dep_ptr, dep_locus, dep_mask)
    rows = np.arange(concerns.shape[0])[:, None, None]
    L = loc[concerns]
    ok = valid[concerns] & member[rows, L]
    cur = idx[rows, L] if idx.ndim == 2 else idx[L]
    contrib = tables[L, cur ^ mask[concerns]] - tables[L, cur]
    contrib = np.where(ok, contrib, 0.0)
    return _pick_flip(_seq_sum(contrib, axis=2), concerns)


def local_best_flips(tables, loci, dep_ptr, dep_locus, dep_mask, sols, concerns, member):
    idx = locus_indices(tables, loci, sols)
    return _local_flips(tables, idx, dep_ptr, dep_locus, dep_mask, concerns, member)


def shared_local_flips(tables, loci, dep_ptr, dep_locus, dep_mask, shared, concerns, member):
    idx = locus_indices(tables, loci, shared[None, :])[0]
    return _local_flips(tables, idx, dep_ptr, dep_locus, dep_mask, concerns, member)


def _sample_positions(degree, uniforms, size):
    """Sorted sampled positions per row, ``-1`` padded past ``min(size, degree)``."""
    n_rows = degree.shape[0]
    big = np.iinfo(np.int64).max
    chosen = np.full((n_rows, size), big, dtype=np.int64)
    for r in range(size):
        active = degree > r
        span = np.maximum(degree - r, 1)
        x = np.minimum((uniforms[:, r] * span).astype(np.int64), span - 1)
        for s in range(r):
            x = x + (x >= chosen[:, s])
        chosen[:, r] = np.where(active, x, big)
        chosen = np.sort(chosen, axis=1)
    return np.where(chosen == big, -1, chosen)


def _sampled_neighbors(adj_ptr, adj_idx, uniforms, sample_size):
    degree = np.diff(adj_ptr)
    pos = _sample_positions(degree, uniforms, sample_size)
    valid = pos >= 0
    flat = np.where(valid, adj_ptr[:-1, None] + pos, 0)
    nb = np.where(valid, adj_idx[np.minimum(flat, max(adj_idx.shape[0] - 1, 0))], -1)
    return nb, valid


def _nth_true(mask, n):
    """Column of the ``n``-th (0-based) True per row."""
    return np.argmax(np.cumsum(mask, axis=1) == (n + 1)[:, None], axis=1)


def best_neighbor_sources(adj_ptr, adj_idx, fitness, own, uniforms, sample_size):
    nb, valid = _sampled_neighbors(adj_ptr, adj_idx, uniforms, sample_size)
    rows = np.arange(nb.shape[0])
    f = np.where(valid, fitness[np.maximum(nb, 0)], -1.0)
    best = f.max(axis=1) if nb.shape[1] else np.full(nb.shape[0], -1.0)
    tied = valid & (f == best[:, None])
    n_tied = tied.sum(axis=1)
    pick = np.minimum((uniforms[:, sample_size] * n_tied).astype(np.int64), np.maximum(n_tied - 1, 0))
    chosen = nb[rows, _nth_true(tied, pick)]
    adopt = valid.any(axis=1) & (best > own)
    return np.where(adopt, chosen, -1).astype(np.int64)


def conformity_sources(adj_ptr, adj_idx, sols, uniforms, sample_size):
    nb, valid = _sampled_neighbors(adj_ptr, adj_idx, uniforms, sample_size)
    n_rows, size = nb.shape
    rows = np.arange(n_rows)
    picked = sols[np.maximum(nb, 0)]
    same = (picked[:, :, None, :] == picked[:, None, :, :]).all(axis=3)
    same &= valid[:, :, None] & valid[:, None, :]
    first = np.argmax(same, axis=2)
    counts = np.zeros((n_rows, size), dtype=np.int64)
    for r in range(size):
        np.add.at(counts, (rows[valid[:, r]], first[valid[:, r], r]), 1)
    top = counts.max(axis=1) if size else np.zeros(n_rows, dtype=np.int64)
    tied = (counts == top[:, None]) & (top[:, None] > 0)
    n_tied = tied.sum(axis=1)
    pick = np.minimum((uniforms[:, sample_size] * n_tied).astype(np.int64), np.maximum(n_tied - 1, 0))
    chosen = nb[rows, _nth_true(tied, pick)]
    return np.where(valid.any(axis=1), chosen, -1).astype(np.int64)


def bfs_distance_sums(adj_ptr, adj_idx, sources):
    n = adj_ptr.shape[0] - 1
    sums = np.zeros(sources.shape[0], dtype=np.int64)
    reach = np.zeros(sources.shape[0], dtype=np.int64)
    degree = np.diff(adj_ptr)
    for r, s in enumerate(sources):
        seen = np.zeros(n, dtype=bool)
        seen[s] = True
        frontier = np.array([s], dtype=np.int64)
        depth = 0
        while frontier.size:
            depth += 1
            lens = degree[frontier]
            total = int(lens.sum())
            if total == 0:
                break
            offsets = np.repeat(adj_ptr[frontier] - np.cumsum(lens) + lens, lens)
            nbrs = adj_idx[offsets + np.arange(total)]
            nbrs = np.unique(nbrs[~seen[nbrs]])
            seen[nbrs] = True
            sums[r] += depth * nbrs.size
            reach[r] += nbrs.size
            frontier = nbrs
    return sums, reach


def unit_max_flow(n, head, nxt, to, cap0, s, t):
    """Dinic on the same paired-arc layout as the numba kernel, in plain Python."""
    head = head.tolist()
    nxt = nxt.tolist()
    to = to.tolist()
    cap = cap0.tolist()
    flow = 0
    while True:
        level = [-1] * n
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            e = head[u]
            while e >= 0:
                v = to[e]
                if cap[e] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
                e = nxt[e]
        if level[t] < 0:
            break
        it = list(head)
        while True:
            stack_v = [s]
            stack_e = []
            found = False
            while stack_v:
                u = stack_v[-1]
                if u == t:
                    found = True
                    break
                advanced = False
                while it[u] >= 0:
                    e = it[u]
                    v = to[e]
                    if cap[e] > 0 and level[v] == level[u] + 1:
                        stack_e.append(e)
                        stack_v.append(v)
                        advanced = True
                        break
                    it[u] = nxt[e]
                if not advanced:
                    if len(stack_v) == 1:
                        break
                    level[u] = -1
                    stack_v.pop()
                    stack_e.pop()
                    w = stack_v[-1]
                    it[w] = nxt[it[w]]
            if not found:
                break
            for e in stack_e:
                cap[e] -= 1
                cap[e ^ 1] += 1
            flow += 1
    return flow, np.asarray(cap, dtype=np.int64)
