"""Event-driven core of the attack-defense simulator, jitted with numba.

One flat function runs a whole replication over CSR adjacency.  All
randomness comes from numba's MT19937 stream seeded once at entry, so a
replication is a pure function of (inputs, seed) and bit-identical across
runs.

Clock semantics: every clock, once drawn, is an absolute firing time in a
binary min-heap.  Clocks are never rescaled or residual-resampled; they
are cancelled (lazily, via per-node state version counters) when their
premise disappears, and a node's full clock set is redrawn on its own
recovery.  The Marshall-Olkin shared attack shock is one absolute time
drawn per (node, secure cycle); it compromises the node only if at least
one neighbor is compromised when it fires, and is spent either way.
"""

import numpy as np
from numba import njit

# event kinds
EV_X1 = 0
EV_X2 = 1
EV_GLOBAL = 2
EV_RECOVER = 3

# regime codes (fixed mapping used by sim.py)
R_EXP = 0
R_WEIBULL = 1
R_LOMAX = 2
R_MO = 3

INF = np.inf


@njit(inline="always")
def _draw_x1(regime, a0, a1, a2):
    if regime == R_EXP or regime == R_MO:
        if a0 <= 0.0:
            return INF
        return np.random.exponential(1.0 / a0)
    if regime == R_WEIBULL:
        if a0 <= 0.0:
            return INF
        return np.random.weibull(a2) / a0
    return a0 * np.random.pareto(a1)


@njit(inline="always")
def _draw_x2(regime, a0, a1, a2):
    if regime == R_EXP or regime == R_MO:
        if a1 <= 0.0:
            return INF
        return np.random.exponential(1.0 / a1)
    if regime == R_WEIBULL:
        if a1 <= 0.0:
            return INF
        return np.random.weibull(a2) / a1
    return a0 * np.random.pareto(a2)


@njit(inline="always")
def _draw_global_shock(a2):
    if a2 <= 0.0:
        return INF
    return np.random.exponential(1.0 / a2)


@njit(inline="always")
def _draw_c(regime, d0, d1, d2):
    if regime == R_EXP:
        return np.random.exponential(1.0 / (d0 + d1))
    if regime == R_WEIBULL:
        scale = (d0 ** d2 + d1 ** d2) ** (1.0 / d2)
        return np.random.weibull(d2) / scale
    if regime == R_LOMAX:
        return d0 * np.random.pareto(d1 + d2)
    return np.random.exponential(1.0 / (d0 + d1 + d2))


@njit(inline="always")
def _heap_push(ht, hn, hk, hv, hs, hsv, size, t, node, kind, ver, src, srcver):
    j = size
    ht[j] = t
    hn[j] = node
    hk[j] = kind
    hv[j] = ver
    hs[j] = src
    hsv[j] = srcver
    while j > 0:
        p = (j - 1) >> 1
        if ht[p] > ht[j]:
            ht[p], ht[j] = ht[j], ht[p]
            hn[p], hn[j] = hn[j], hn[p]
            hk[p], hk[j] = hk[j], hk[p]
            hv[p], hv[j] = hv[j], hv[p]
            hs[p], hs[j] = hs[j], hs[p]
            hsv[p], hsv[j] = hsv[j], hsv[p]
            j = p
        else:
            break
    return size + 1


@njit(inline="always")
def _heap_remove_min(ht, hn, hk, hv, hs, hsv, size):
    size -= 1
    ht[0] = ht[size]
    hn[0] = hn[size]
    hk[0] = hk[size]
    hv[0] = hv[size]
    hs[0] = hs[size]
    hsv[0] = hsv[size]
    j = 0
    while True:
        left = 2 * j + 1
        if left >= size:
            break
        m = left
        right = left + 1
        if right < size and ht[right] < ht[left]:
            m = right
        if ht[m] < ht[j]:
            ht[m], ht[j] = ht[j], ht[m]
            hn[m], hn[j] = hn[j], hn[m]
            hk[m], hk[j] = hk[j], hk[m]
            hv[m], hv[j] = hv[j], hv[m]
            hs[m], hs[j] = hs[j], hs[m]
            hsv[m], hsv[j] = hsv[j], hsv[m]
            j = m
        else:
            break
    return size


@njit
def _heap_grow(ht, hn, hk, hv, hs, hsv, size, newcap):
    nt = np.empty(newcap, np.float64)
    nn = np.empty(newcap, np.int32)
    nk = np.empty(newcap, np.int8)
    nv = np.empty(newcap, np.int64)
    ns = np.empty(newcap, np.int32)
    nsv = np.empty(newcap, np.int64)
    nt[:size] = ht[:size]
    nn[:size] = hn[:size]
    nk[:size] = hk[:size]
    nv[:size] = hv[:size]
    ns[:size] = hs[:size]
    nsv[:size] = hsv[:size]
    return nt, nn, nk, nv, ns, nsv


@njit
def _cycles_grow(cyc_node, cyc_s, cyc_c, clen, newcap):
    nn = np.empty(newcap, np.int32)
    ns = np.empty(newcap, np.float64)
    nc = np.empty(newcap, np.float64)
    nn[:clen] = cyc_node[:clen]
    ns[:clen] = cyc_s[:clen]
    nc[:clen] = cyc_c[:clen]
    return nn, ns, nc


@njit(inline="always")
def _advance(acc, last_t, t, n_comp, batch_acc, burn_in, horizon, batch_len,
             nbatch):
    """Advance the compromised-node-time integral from last_t to t (state
    constant in between), splitting the part inside [burn_in, horizon]
    over the batch accumulators."""
    acc += n_comp * (t - last_t)
    if nbatch > 0 and batch_len > 0.0:
        lo = last_t if last_t > burn_in else burn_in
        hi = t if t < horizon else horizon
        if hi > lo:
            b0 = int((lo - burn_in) / batch_len)
            b1 = int((hi - burn_in) / batch_len)
            if b0 >= nbatch:
                b0 = nbatch - 1
            if b1 >= nbatch:
                b1 = nbatch - 1
            if b0 == b1:
                batch_acc[b0] += n_comp * (hi - lo)
            else:
                for b in range(b0, b1 + 1):
                    s = burn_in + b * batch_len
                    e = s + batch_len
                    ss = lo if lo > s else s
                    ee = hi if hi < e else e
                    if ee > ss:
                        batch_acc[b] += n_comp * (ee - ss)
    return acc


@njit(cache=True)
def run_replication(indptr, indices, n, horizon, burn_in, regime,
                    a0, a1, a2, d0, d1, d2,
                    seed, init_frac, snap_interval, n_snaps,
                    collect_mask, record_states, max_deg, nbatch):
    np.random.seed(seed)

    state = np.zeros(n, np.uint8)
    sver = np.zeros(n, np.int64)
    secure_start = np.zeros(n, np.float64)
    comp_start = np.full(n, -1.0, np.float64)
    comp_time = np.zeros(n, np.float64)
    secure_time = np.zeros(n, np.float64)
    kcounts = np.zeros((n, max_deg + 1), np.int64)
    series_q = np.zeros(n_snaps, np.float64)
    states = np.zeros((n_snaps if record_states else 0, n), np.uint8)
    batch_acc = np.zeros(nbatch if nbatch > 0 else 1, np.float64)
    batch_len = (horizon - burn_in) / nbatch if nbatch > 0 else 0.0

    cap = 4 * n + 8 * (max_deg + 8)
    ht = np.empty(cap, np.float64)
    hn = np.empty(cap, np.int32)
    hk = np.empty(cap, np.int8)
    hv = np.empty(cap, np.int64)
    hs = np.empty(cap, np.int32)
    hsv = np.empty(cap, np.int64)
    size = 0

    ccap = 1024
    cyc_node = np.empty(ccap, np.int32)
    cyc_s = np.empty(ccap, np.float64)
    cyc_c = np.empty(ccap, np.float64)
    clen = 0

    n_comp = 0
    if init_frac > 0.0:
        for v in range(n):
            if np.random.random() < init_frac:
                state[v] = 1
                comp_start[v] = 0.0
                secure_start[v] = -1.0
                n_comp += 1
        for v in range(n):
            if state[v] == 1:
                if cap - size < max_deg + 8:
                    cap = cap * 2 + max_deg + 8
                    ht, hn, hk, hv, hs, hsv = _heap_grow(
                        ht, hn, hk, hv, hs, hsv, size, cap)
                c = _draw_c(regime, d0, d1, d2)
                size = _heap_push(ht, hn, hk, hv, hs, hsv, size,
                                  c, v, EV_RECOVER, 0, -1, 0)
    for v in range(n):
        if state[v] == 0:
            if cap - size < max_deg + 8:
                cap = cap * 2 + max_deg + 8
                ht, hn, hk, hv, hs, hsv = _heap_grow(
                    ht, hn, hk, hv, hs, hsv, size, cap)
            x1 = _draw_x1(regime, a0, a1, a2)
            if np.isfinite(x1):
                size = _heap_push(ht, hn, hk, hv, hs, hsv, size,
                                  x1, v, EV_X1, 0, -1, 0)
            if regime == R_MO:
                g = _draw_global_shock(a2)
                if np.isfinite(g):
                    size = _heap_push(ht, hn, hk, hv, hs, hsv, size,
                                      g, v, EV_GLOBAL, 0, -1, 0)
            for jj in range(indptr[v], indptr[v + 1]):
                u = indices[jj]
                if state[u] == 1:
                    x2 = _draw_x2(regime, a0, a1, a2)
                    if np.isfinite(x2):
                        size = _heap_push(ht, hn, hk, hv, hs, hsv, size,
                                          x2, v, EV_X2, 0, u, sver[u])

    acc = 0.0
    last_t = 0.0
    snap_idx = 0

    while size > 0 and ht[0] <= horizon:
        te = ht[0]
        v = hn[0]
        kind = hk[0]
        ver = hv[0]
        src = hs[0]
        srcver = hsv[0]
        size = _heap_remove_min(ht, hn, hk, hv, hs, hsv, size)

        while snap_idx < n_snaps:
            ts = snap_interval * (snap_idx + 1)
            if ts > te:
                break
            acc = _advance(acc, last_t, ts, n_comp, batch_acc, burn_in,
                           horizon, batch_len, nbatch)
            last_t = ts
            series_q[snap_idx] = acc / (n * ts)
            if ts >= burn_in:
                for u in range(n):
                    kk = 0
                    for jj in range(indptr[u], indptr[u + 1]):
                        kk += state[indices[jj]]
                    kcounts[u, kk] += 1
            if record_states:
                for u in range(n):
                    states[snap_idx, u] = state[u]
            snap_idx += 1

        acc = _advance(acc, last_t, te, n_comp, batch_acc, burn_in,
                       horizon, batch_len, nbatch)
        last_t = te

        if cap - size < max_deg + 8:
            cap = cap * 2 + max_deg + 8
            ht, hn, hk, hv, hs, hsv = _heap_grow(ht, hn, hk, hv, hs, hsv,
                                                 size, cap)

        if kind == EV_RECOVER:
            # A compromised node has exactly one live event (its recovery),
            # so no staleness check is needed here.
            start = comp_start[v] if comp_start[v] > burn_in else burn_in
            if te > start:
                comp_time[v] += te - start
            if collect_mask[v] == 1 and secure_start[v] >= 0.0:
                if clen == ccap:
                    ccap *= 2
                    cyc_node, cyc_s, cyc_c = _cycles_grow(
                        cyc_node, cyc_s, cyc_c, clen, ccap)
                cyc_node[clen] = v
                cyc_s[clen] = comp_start[v] - secure_start[v]
                cyc_c[clen] = te - comp_start[v]
                clen += 1
            state[v] = 0
            sver[v] += 1
            secure_start[v] = te
            n_comp -= 1
            ver_v = sver[v]
            x1 = _draw_x1(regime, a0, a1, a2)
            if np.isfinite(x1):
                size = _heap_push(ht, hn, hk, hv, hs, hsv, size,
                                  te + x1, v, EV_X1, ver_v, -1, 0)
            if regime == R_MO:
                g = _draw_global_shock(a2)
                if np.isfinite(g):
                    size = _heap_push(ht, hn, hk, hv, hs, hsv, size,
                                      te + g, v, EV_GLOBAL, ver_v, -1, 0)
            for jj in range(indptr[v], indptr[v + 1]):
                u = indices[jj]
                if state[u] == 1:
                    x2 = _draw_x2(regime, a0, a1, a2)
                    if np.isfinite(x2):
                        size = _heap_push(ht, hn, hk, hv, hs, hsv, size,
                                          te + x2, v, EV_X2, ver_v, u, sver[u])
        else:
            # attack event on v; drop if stale
            if ver != sver[v]:
                continue
            if kind == EV_X2 and srcver != sver[src]:
                continue
            if kind == EV_GLOBAL:
                any_comp = False
                for jj in range(indptr[v], indptr[v + 1]):
                    if state[indices[jj]] == 1:
                        any_comp = True
                        break
                if not any_comp:
                    continue  # shared shock spent with nobody to carry it
            start = secure_start[v] if secure_start[v] > burn_in else burn_in
            if te > start:
                secure_time[v] += te - start
            state[v] = 1
            sver[v] += 1
            comp_start[v] = te
            n_comp += 1
            c = _draw_c(regime, d0, d1, d2)
            size = _heap_push(ht, hn, hk, hv, hs, hsv, size,
                              te + c, v, EV_RECOVER, 0, -1, 0)
            for jj in range(indptr[v], indptr[v + 1]):
                u = indices[jj]
                if state[u] == 0:
                    x2 = _draw_x2(regime, a0, a1, a2)
                    if np.isfinite(x2):
                        size = _heap_push(ht, hn, hk, hv, hs, hsv, size,
                                          te + x2, u, EV_X2, sver[u], v, sver[v])

    while snap_idx < n_snaps:
        ts = snap_interval * (snap_idx + 1)
        if ts > horizon:
            break
        acc = _advance(acc, last_t, ts, n_comp, batch_acc, burn_in, horizon,
                       batch_len, nbatch)
        last_t = ts
        series_q[snap_idx] = acc / (n * ts)
        if ts >= burn_in:
            for u in range(n):
                kk = 0
                for jj in range(indptr[u], indptr[u + 1]):
                    kk += state[indices[jj]]
                kcounts[u, kk] += 1
        if record_states:
            for u in range(n):
                states[snap_idx, u] = state[u]
        snap_idx += 1

    acc = _advance(acc, last_t, horizon, n_comp, batch_acc, burn_in, horizon,
                   batch_len, nbatch)
    for v in range(n):
        if state[v] == 1:
            start = comp_start[v] if comp_start[v] > burn_in else burn_in
            if horizon > start:
                comp_time[v] += horizon - start
        else:
            start = secure_start[v] if secure_start[v] > burn_in else burn_in
            if horizon > start:
                secure_time[v] += horizon - start

    return (comp_time, secure_time, kcounts, series_q, states, batch_acc,
            cyc_node[:clen].copy(), cyc_s[:clen].copy(), cyc_c[:clen].copy())
