"""Independent reimplementations and instance generators used as oracles.

Everything here deliberately avoids the library's vectorized code paths:
Lipschitz constants come from explicit double loops, anchor images and
per-sample constants from triple loops, and the projection step from
numpy's SVD-based lstsq instead of the library's QR route.
"""

import numpy as np

import lipext as lx


def lip_const_brute(values, dist):
    """Double-loop scalar Lipschitz constant."""
    n = len(values)
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            best = max(best, abs(values[i] - values[j]) / dist[i][j])
    return best


def vector_lip_brute(values, dist):
    n = len(values)
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            gap = np.sqrt(sum((values[i][c] - values[j][c]) ** 2
                              for c in range(len(values[i]))))
            best = max(best, gap / dist[i][j])
    return best


def mcshane_min_loop(values, lip, query_dists):
    best = None
    for t in range(len(values)):
        cand = values[t] if query_dists[t] == 0.0 else values[t] + lip * query_dists[t]
        if query_dists[t] == 0.0:
            return values[t] if best is None or True else best
        if best is None or cand < best:
            best = cand
    return best


def dense_build(g, values, dist):
    """Triple-loop anchor images and per-sample Lipschitz constants."""
    m, p = g.shape
    n = values.shape[0]
    imgs = np.empty((m, n))
    for w in range(m):
        for t in range(n):
            imgs[w, t] = sum(values[t][c] * g[w][c] for c in range(p))
    lams = np.zeros(m)
    for w in range(m):
        best = 0.0
        for s in range(n):
            for t in range(s + 1, n):
                num = abs(sum((values[s][c] - values[t][c]) * g[w][c]
                              for c in range(p)))
                best = max(best, num / dist[s][t])
        lams[w] = best
    return imgs, lams


def dense_evaluate(g, imgs, lams, query_dists):
    """Loop extension plus SVD least squares per query."""
    m = g.shape[0]
    n = imgs.shape[1]
    out = []
    for dx in query_dists:
        u = np.empty(m)
        for w in range(m):
            u[w] = min(imgs[w, t] + lams[w] * dx[t] for t in range(n))
        sol, *_ = np.linalg.lstsq(g, u, rcond=None)
        out.append(sol)
    return np.asarray(out)


def random_euclidean_instance(rng, n, p, dim=3, scale=1.0):
    """Distinct random anchors with a random vector-valued map."""
    coords = scale * rng.standard_normal((n, dim))
    metric = lx.euclidean_metric(coords)
    values = rng.standard_normal((n, p))
    return lx.make_anchor_set(metric, values)


def random_scalar_instance(rng, n, dim=3):
    coords = rng.standard_normal((n, dim))
    metric = lx.euclidean_metric(coords)
    values = rng.standard_normal(n)
    return metric, values
