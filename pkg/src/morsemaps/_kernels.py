"""Compiled inner loops: link classification, merge sweeps, survival replay.

All kernels operate on the total-order ranks (ties already broken), so they
never compare raw field values. Each is a pure function of its inputs.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["classify_kernel", "merge_events_kernel", "survival_replay_kernel"]


@njit(cache=True)
def classify_kernel(rank, nbr, valid):
    """Classify vertices by lower-link components on the 6-slot cyclic link.

    rank: ascending total-order rank per vertex.
    nbr, valid: (V, 6) neighbor table in cyclic slot order.
    Returns (kinds, multiplicity): kind codes 0 regular / 1 minimum /
    2 saddle / 3 maximum; multiplicity = extra lower-link components.
    """
    n = rank.shape[0]
    kinds = np.zeros(n, dtype=np.int8)
    mult = np.zeros(n, dtype=np.int32)
    seq = np.empty(6, dtype=np.bool_)
    for v in range(n):
        rv = rank[v]
        # Rotate so a clipped (absent) slot, if any, sits at the scan start;
        # the present slots then appear in true path order.
        gap = -1
        for k in range(6):
            if not valid[v, k]:
                gap = k
                break
        m = 0
        n_lower = 0
        for t in range(6):
            k = (gap + 1 + t) % 6 if gap >= 0 else t
            if valid[v, k]:
                low = rank[nbr[v, k]] < rv
                seq[m] = low
                if low:
                    n_lower += 1
                m += 1
        if n_lower == 0:
            kinds[v] = 1
            continue
        if n_lower == m:
            kinds[v] = 3
            continue
        runs = 0
        for t in range(m):
            prev = seq[m - 1] if (gap < 0 and t == 0) else (seq[t - 1] if t > 0 else False)
            if seq[t] and not prev:
                runs += 1
        if runs >= 2:
            kinds[v] = 2
            mult[v] = runs - 1
        # runs == 1 with both links nonempty: regular (kind 0)
    return kinds, mult


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


@njit(cache=True)
def merge_events_kernel(act, nbr, valid):
    """Union-find sweep in activation order; record component merges.

    act: vertices in activation order (act[0] first). A vertex with no
    active neighbor starts a component whose representative extremum it is;
    a vertex joining k >= 2 components is a merge site producing k - 1
    events. The component whose extremum activated earliest survives.

    Returns (dying, saddle, absorber, is_leaf): event arrays in
    chronological order plus a per-vertex flag marking component births.
    """
    n = act.shape[0]
    parent = np.full(n, -1, dtype=np.int64)
    comp_ext = np.empty(n, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)
    is_leaf = np.zeros(n, dtype=np.bool_)
    dying = np.empty(n, dtype=np.int64)
    saddle = np.empty(n, dtype=np.int64)
    absorber = np.empty(n, dtype=np.int64)
    n_events = 0
    roots = np.empty(6, dtype=np.int64)
    for step in range(n):
        v = act[step]
        pos[v] = step
        nr = 0
        for k in range(6):
            if not valid[v, k]:
                continue
            u = nbr[v, k]
            if parent[u] == -1:
                continue
            r = _find(parent, u)
            dup = False
            for t in range(nr):
                if roots[t] == r:
                    dup = True
                    break
            if not dup:
                roots[nr] = r
                nr += 1
        parent[v] = v
        comp_ext[v] = v
        if nr == 0:
            is_leaf[v] = True
            continue
        # elder component: extremum with the earliest activation
        e = roots[0]
        for t in range(1, nr):
            if pos[comp_ext[roots[t]]] < pos[comp_ext[e]]:
                e = roots[t]
        parent[v] = e
        for t in range(nr):
            r = roots[t]
            if r == e:
                continue
            dying[n_events] = comp_ext[r]
            saddle[n_events] = v
            absorber[n_events] = comp_ext[e]
            n_events += 1
            parent[r] = e
    return dying[:n_events], saddle[:n_events], absorber[:n_events], is_leaf


@njit(cache=True)
def survival_replay_kernel(n_max, dying, absorber, lam):
    """Replay cancellations, crediting each step's weight to the absorbing cell.

    dying/absorber hold indices into the member's maxima (0..n_max-1) in
    cancellation order; lam holds the step weights. Returns per-maximum
    accumulated weight: a vertex's survival value is the entry of its
    original maximum. Accumulation order per entry matches a direct
    per-vertex replay, so results agree bitwise with one.
    """
    b = np.zeros(n_max, dtype=np.float64)
    parent = np.arange(n_max)
    head = np.arange(n_max)
    tail = np.arange(n_max)
    nxt = np.full(n_max, -1, dtype=np.int64)
    for j in range(dying.shape[0]):
        a = _find(parent, absorber[j])
        d = dying[j]
        w = lam[j]
        node = head[a]
        while node != -1:
            b[node] += w
            node = nxt[node]
        nxt[tail[a]] = head[d]
        tail[a] = tail[d]
        parent[d] = a
    return b
