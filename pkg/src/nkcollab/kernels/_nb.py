"""Numba kernels. Signatures mirror :mod:`nkcollab.kernels._np` exactly."""

import numpy as np

from .._accel import njit


@njit(cache=True)
def locus_indices(tables, loci, sols):
    n_agents, n = sols.shape
    width = loci.shape[1]
    out = np.empty((n_agents, n), dtype=np.int64)
    for a in range(n_agents):
        for i in range(n):
            idx = 0
            for p in range(width):
                idx = (idx << 1) | sols[a, loci[i, p]]
            out[a, i] = idx
    return out


@njit(cache=True)
def fitness_batch(tables, loci, sols):
    n_agents, n = sols.shape
    width = loci.shape[1]
    out = np.empty(n_agents, dtype=np.float64)
    for a in range(n_agents):
        total = 0.0
        for i in range(n):
            idx = 0
            for p in range(width):
                idx = (idx << 1) | sols[a, loci[i, p]]
            total += tables[i, idx]
        out[a] = total / n
    return out


@njit(cache=True)
def global_best_flips(tables, loci, dep_ptr, dep_locus, dep_mask, sols):
    """Best improving single-bit flip per row, or -1."""
    n_agents, n = sols.shape
    width = loci.shape[1]
    flips = np.full(n_agents, -1, dtype=np.int64)
    idx = np.empty(n, dtype=np.int64)
    for a in range(n_agents):
        for i in range(n):
            v = 0
            for p in range(width):
                v = (v << 1) | sols[a, loci[i, p]]
            idx[i] = v
        best = 0.0
        for j in range(n):
            delta = 0.0
            for q in range(dep_ptr[j], dep_ptr[j + 1]):
                l = dep_locus[q]
                delta += tables[l, idx[l] ^ dep_mask[q]] - tables[l, idx[l]]
            if delta > best:
                best = delta
                flips[a] = j
    return flips


@njit(cache=True)
def local_best_flips(tables, loci, dep_ptr, dep_locus, dep_mask, sols, concerns, member):
    """Best improving flip inside each row's concern, scored on the concern only.

    ``concerns[a]`` is sorted; ``member[a, l]`` marks concern membership.
    """
    n_agents, n = sols.shape
    width = loci.shape[1]
    c = concerns.shape[1]
    flips = np.full(n_agents, -1, dtype=np.int64)
    for a in range(n_agents):
        best = 0.0
        for r in range(c):
            j = concerns[a, r]
            delta = 0.0
            for q in range(dep_ptr[j], dep_ptr[j + 1]):
                l = dep_locus[q]
                if not member[a, l]:
                    continue
                v = 0
                for p in range(width):
                    v = (v << 1) | sols[a, loci[l, p]]
                delta += tables[l, v ^ dep_mask[q]] - tables[l, v]
            if delta > best:
                best = delta
                flips[a] = j
    return flips


@njit(cache=True)
def shared_local_flips(tables, loci, dep_ptr, dep_locus, dep_mask, shared, concerns, member):
    """Like :func:`local_best_flips` with every agent reading one shared string."""
    n = shared.shape[0]
    width = loci.shape[1]
    idx = np.empty(n, dtype=np.int64)
    for i in range(n):
        v = 0
        for p in range(width):
            v = (v << 1) | shared[loci[i, p]]
        idx[i] = v
    n_agents, c = concerns.shape
    flips = np.full(n_agents, -1, dtype=np.int64)
    for a in range(n_agents):
        best = 0.0
        for r in range(c):
            j = concerns[a, r]
            delta = 0.0
            for q in range(dep_ptr[j], dep_ptr[j + 1]):
                l = dep_locus[q]
                if member[a, l]:
                    delta += tables[l, idx[l] ^ dep_mask[q]] - tables[l, idx[l]]
            if delta > best:
                best = delta
                flips[a] = j
    return flips


@njit(cache=True)
def _sample_positions(d, u, out):
    """Draw ``min(len(out), d)`` distinct positions in ``range(d)`` from uniforms."""
    m = min(out.shape[0], d)
    for r in range(m):
        x = min(int(u[r] * (d - r)), d - r - 1)
        # walk past already chosen positions, kept sorted in out[:r]
        for s in range(r):
            if x >= out[s]:
                x += 1
        pos = r
        while pos > 0 and out[pos - 1] > x:
            out[pos] = out[pos - 1]
            pos -= 1
        out[pos] = x
    return m


@njit(cache=True)
def best_neighbor_sources(adj_ptr, adj_idx, fitness, own, uniforms, sample_size):
    """Row ``a`` of the CSR adjacency adopts its best sampled neighbour if it beats ``own[a]``."""
    n_agents = adj_ptr.shape[0] - 1
    src = np.full(n_agents, -1, dtype=np.int64)
    pos = np.empty(sample_size, dtype=np.int64)
    for a in range(n_agents):
        start = adj_ptr[a]
        d = adj_ptr[a + 1] - start
        m = _sample_positions(d, uniforms[a], pos)
        if m == 0:
            continue
        best = -1.0
        n_tied = 0
        for r in range(m):
            f = fitness[adj_idx[start + pos[r]]]
            if f > best:
                best = f
                n_tied = 1
            elif f == best:
                n_tied += 1
        if best <= own[a]:
            continue
        pick = min(int(uniforms[a, sample_size] * n_tied), n_tied - 1)
        for r in range(m):
            b = adj_idx[start + pos[r]]
            if fitness[b] == best:
                if pick == 0:
                    src[a] = b
                    break
                pick -= 1
    return src


@njit(cache=True)
def _rows_equal(sols, a, b):
    for i in range(sols.shape[1]):
        if sols[a, i] != sols[b, i]:
            return False
    return True


@njit(cache=True)
def conformity_sources(adj_ptr, adj_idx, sols, uniforms, sample_size):
    n_agents = adj_ptr.shape[0] - 1
    src = np.full(n_agents, -1, dtype=np.int64)
    pos = np.empty(sample_size, dtype=np.int64)
    members = np.empty(sample_size, dtype=np.int64)
    counts = np.zeros(sample_size, dtype=np.int64)
    for a in range(n_agents):
        start = adj_ptr[a]
        d = adj_ptr[a + 1] - start
        m = _sample_positions(d, uniforms[a], pos)
        if m == 0:
            continue
        # group sampled neighbours by identical solution, in sample order
        n_groups = 0
        for r in range(m):
            b = adj_idx[start + pos[r]]
            g = -1
            for h in range(n_groups):
                if _rows_equal(sols, members[h], b):
                    g = h
                    break
            if g < 0:
                members[n_groups] = b
                counts[n_groups] = 0
                g = n_groups
                n_groups += 1
            counts[g] += 1
        top = 0
        n_tied = 0
        for h in range(n_groups):
            if counts[h] > top:
                top = counts[h]
                n_tied = 1
            elif counts[h] == top:
                n_tied += 1
        pick = min(int(uniforms[a, sample_size] * n_tied), n_tied - 1)
        for h in range(n_groups):
            if counts[h] == top:
                if pick == 0:
                    src[a] = members[h]
                    break
                pick -= 1
    return src


@njit(cache=True)
def bfs_distance_sums(adj_ptr, adj_idx, sources):
    """Per source: (sum of distances to reachable nodes, number reachable), source excluded."""
    n = adj_ptr.shape[0] - 1
    n_src = sources.shape[0]
    sums = np.zeros(n_src, dtype=np.int64)
    reach = np.zeros(n_src, dtype=np.int64)
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for r in range(n_src):
        s = sources[r]
        dist[:] = -1
        dist[s] = 0
        head = 0
        tail = 1
        queue[0] = s
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u] + 1
            for q in range(adj_ptr[u], adj_ptr[u + 1]):
                v = adj_idx[q]
                if dist[v] < 0:
                    dist[v] = du
                    queue[tail] = v
                    tail += 1
                    sums[r] += du
        reach[r] = tail - 1
    return sums, reach


@njit(cache=True)
def _dinic_bfs(n, head, nxt, to, cap, s, t, level, queue):
    level[:] = -1
    level[s] = 0
    qh = 0
    qt = 1
    queue[0] = s
    while qh < qt:
        u = queue[qh]
        qh += 1
        e = head[u]
        while e >= 0:
            v = to[e]
            if cap[e] > 0 and level[v] < 0:
                level[v] = level[u] + 1
                queue[qt] = v
                qt += 1
            e = nxt[e]
    return level[t] >= 0


@njit(cache=True)
def _dinic_dfs(head, nxt, to, cap, s, t, level, it, stack_v, stack_e):
    """One blocking-flow augmentation of one unit along the level graph, iterative."""
    depth = 0
    stack_v[0] = s
    while True:
        u = stack_v[depth]
        if u == t:
            for d in range(depth):
                e = stack_e[d]
                cap[e] -= 1
                cap[e ^ 1] += 1
            return 1
        advanced = False
        while it[u] >= 0:
            e = it[u]
            v = to[e]
            if cap[e] > 0 and level[v] == level[u] + 1:
                stack_e[depth] = e
                depth += 1
                stack_v[depth] = v
                advanced = True
                break
            it[u] = nxt[e]
        if not advanced:
            if depth == 0:
                return 0
            level[u] = -1
            depth -= 1
            w = stack_v[depth]
            it[w] = nxt[it[w]]


@njit(cache=True)
def unit_max_flow(n, head, nxt, to, cap0, s, t):
    """Dinic max-flow on a unit-capacity residual graph stored as paired arc lists.

    Arc ``e`` and ``e ^ 1`` are reverse partners. ``cap0`` is copied; the
    residual capacities are returned alongside the flow value.
    """
    cap = cap0.copy()
    level = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    it = np.empty(n, dtype=np.int64)
    stack_v = np.empty(n + 1, dtype=np.int64)
    stack_e = np.empty(n + 1, dtype=np.int64)
    flow = 0
    while _dinic_bfs(n, head, nxt, to, cap, s, t, level, queue):
        it[:] = head
        while True:
            f = _dinic_dfs(head, nxt, to, cap, s, t, level, it, stack_v, stack_e)
            if f == 0:
                break
            flow += f
    return flow, cap
