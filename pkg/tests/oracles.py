"""Independent reference computations shared by unit and acceptance tests."""

import itertools

import numpy as np

from clvboost.numerics import group_criterion


def brute_force_merges(X):
    """Greedy agglomeration recomputing every pairwise loss from scratch.

    Returns the list of merged member-set pairs ``(A, B)`` with ``min(A) < min(B)``.
    """
    clusters = [(j,) for j in range(X.shape[1])]
    T = {c: group_criterion(X[:, list(c)])[0] for c in clusters}
    merges = []
    while len(clusters) > 1:
        best = None
        for A, B in itertools.combinations(clusters, 2):
            if A[0] > B[0]:
                A, B = B, A
            U = tuple(sorted(A + B))
            loss = T[A] + T[B] - group_criterion(X[:, list(U)])[0]
            key = (loss, A[0], B[0])
            if best is None or key < best[0]:
                best = (key, A, B, U)
        _, A, B, U = best
        T[U] = group_criterion(X[:, list(U)])[0]
        clusters = [c for c in clusters if c not in (A, B)] + [U]
        merges.append((A, B))
    return merges


def random_centered(rng, n, p, groups=None):
    groups = groups or max(1, p // 3)
    Z = rng.standard_normal((n, groups))
    X = Z[:, rng.integers(0, groups, p)] * rng.choice([-1.0, 1.0], p) + 0.8 * rng.standard_normal((n, p))
    return X - X.mean(axis=0)


def naive_base_learner(d, e):
    """Selection rule evaluated level by level with plain Pearson correlations."""
    from clvboost.clv import kg_unidimensional, partition_at
    from clvboost.numerics import pearson_cor

    winners = {}
    for K in range(1, d.p + 1):
        best = None
        for i in partition_at(d, K):
            node = d.nodes[i]
            r = abs(pearson_cor(node.component, e))
            key = (-r, -node.size, i)
            if best is None or key < best:
                best = key
        winners[best[2]] = -best[0]
    passing = [(-d.nodes[i].size, -r, i) for i, r in winners.items() if kg_unidimensional(d.nodes[i], d.p)]
    return min(passing)[2]
