"""Ascendant hierarchical clustering of variables around latent components.

Every node of the dendrogram carries the latent component of its member
variables (first principal direction of the member block, unit norm), the
loadings that rebuild it from the members, and the two leading eigenvalues
of the members' correlation matrix for the unidimensionality test.

Merges minimise the criterion loss ``T_A + T_B - T_{A u B}``. Pair losses
are cached; after each merge only the pairs involving the new node are
evaluated, batched by union size.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DataError
from .numerics import correlation_top2, group_criterion, top_eigenvalues

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClusterNode:
    id: int
    members: tuple
    children: Optional[tuple]
    T: float
    loading_values: np.ndarray = field(repr=False)
    component: np.ndarray = field(repr=False)
    kg_lambda1: float
    kg_lambda2: float
    merge_loss: float = 0.0
    formed_at: int = 0
    merged_at: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def loadings(self) -> dict:
        return {j: float(v) for j, v in zip(self.members, self.loading_values)}

    def to_dict(self, full: bool = False) -> dict:
        d = {
            "id": self.id,
            "members": list(self.members),
            "children": None if self.children is None else list(self.children),
            "T": self.T,
            "merge_loss": self.merge_loss,
            "kg": [self.kg_lambda1, self.kg_lambda2],
            "loadings": {str(j): v for j, v in self.loadings.items()},
        }
        if full:
            d["component"] = self.component.tolist()
        return d


@dataclass(frozen=True)
class Dendrogram:
    """The ``2p - 1`` nodes of a complete variable hierarchy.

    Leaves have ids ``0..p-1``; the node formed by merge ``t`` (1-based) has
    id ``p + t - 1``, so the root is ``2p - 2``.
    """

    nodes: tuple
    merge_order: tuple
    p: int
    n: int

    @property
    def root(self) -> ClusterNode:
        return self.nodes[-1]

    def components(self) -> np.ndarray:
        """All latent components stacked as rows, shape ``(2p - 1, n)``."""
        return np.vstack([nd.component for nd in self.nodes])

    def sizes(self) -> np.ndarray:
        return np.array([nd.size for nd in self.nodes])

    def active_mask(self) -> np.ndarray:
        """Boolean ``(p, 2p - 1)``; row ``s`` marks the nodes present after ``s`` merges."""
        formed = np.array([nd.formed_at for nd in self.nodes])
        merged = np.array([self.p if nd.merged_at is None else nd.merged_at for nd in self.nodes])
        s = np.arange(self.p)[:, None]
        return (formed[None, :] <= s) & (s < merged[None, :])

    def to_dict(self, full: bool = False, var_names=None) -> dict:
        d = {
            "p": self.p,
            "n": self.n,
            "merge_order": list(self.merge_order),
            "nodes": [nd.to_dict(full) for nd in self.nodes],
        }
        if var_names is not None:
            d["var_names"] = list(var_names)
        return d


def _make_node(X, node_id, members, children=None, merge_loss=0.0, formed_at=0) -> ClusterNode:
    block = X[:, list(members)]
    T, v, c = group_criterion(block)
    lam1, lam2 = correlation_top2(block)
    return ClusterNode(
        id=node_id,
        members=tuple(members),
        children=children,
        T=float(T),
        loading_values=v,
        component=c,
        kg_lambda1=lam1,
        kg_lambda2=lam2,
        merge_loss=float(merge_loss),
        formed_at=formed_at,
    )


def _union_top_eigenvalues(X, C, base: list, others: list) -> np.ndarray:
    """Top eigenvalue of the cross-product of ``base u other`` for each other member list."""
    n = X.shape[0]
    out = np.empty(len(others))
    by_size: dict = {}
    for k, mem in enumerate(others):
        by_size.setdefault(len(mem), []).append(k)
    for size, ks in by_size.items():
        idx = np.array([base + others[k] for k in ks])
        s = idx.shape[1]
        if s <= n:
            stack = C[idx[:, :, None], idx[:, None, :]]
        else:
            blocks = X[:, idx]  # (n, b, s)
            stack = np.einsum("ibs,jbs->bij", blocks, blocks)
        out[ks] = top_eigenvalues(stack)
    return out


def build_hierarchy(X_pre) -> Dendrogram:
    """Agglomerate the columns of a centered matrix into a full dendrogram.

    At each step the pair of current clusters with the smallest criterion
    loss is merged; exact ties go to the pair with the smallest
    ``(min member of A, min member of B)``.
    """
    X = np.asarray(X_pre, dtype=float)
    if X.ndim != 2:
        raise DataError("expected a 2-D matrix")
    n, p = X.shape
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0.0):
        raise DataError(f"zero-variance column(s): {np.flatnonzero(norms == 0.0).tolist()}")

    nodes: list = [_make_node(X, j, (j,)) for j in range(p)]
    if p == 1:
        return Dendrogram(tuple(nodes), (), 1, n)

    C = X.T @ X
    total = 2 * p - 1
    T = np.array([nd.T for nd in nodes] + [0.0] * (p - 1))
    minmem = np.array(list(range(p)) + [0] * (p - 1))
    loss = np.full((total, total), np.inf)

    # singleton pairs: the loss is the smaller eigenvalue of the 2x2 cross-product
    d = np.diag(C)
    a, b = d[:, None], d[None, :]
    lam1 = 0.5 * (a + b) + np.sqrt(0.25 * (a - b) ** 2 + C**2)
    lam2 = (a * b - C**2) / lam1
    iu = np.triu_indices(p, 1)
    loss[iu] = np.maximum(lam2[iu], 0.0) / n**2

    active = list(range(p))
    merged_at: dict = {}
    merge_order = []
    for t in range(1, p):
        best = np.min(loss)
        cand = np.argwhere(loss == best)
        keys = [tuple(sorted((minmem[i], minmem[j]))) for i, j in cand]
        i, j = (int(v) for v in cand[min(range(len(cand)), key=keys.__getitem__)])
        A, B = nodes[i], nodes[j]
        if minmem[i] > minmem[j]:
            A, B = B, A
        new_id = p + t - 1
        members = tuple(sorted(A.members + B.members))
        node = _make_node(X, new_id, members, children=(A.id, B.id), formed_at=t)
        node = replace(node, merge_loss=A.T + B.T - node.T)
        nodes.append(node)
        merged_at[A.id] = merged_at[B.id] = t
        merge_order.append(new_id)
        T[new_id] = node.T
        minmem[new_id] = members[0]
        loss[[i, j], :] = np.inf
        loss[:, [i, j]] = np.inf
        active = [k for k in active if k not in (i, j)]
        if active:
            others = [list(nodes[k].members) for k in active]
            lam = _union_top_eigenvalues(X, C, list(members), others)
            loss[active, new_id] = T[active] + node.T - lam / n**2
        active.append(new_id)
        log.debug("merge %d: %s + %s loss %.3g", t, A.id, B.id, node.merge_loss)

    final = tuple(replace(nd, merged_at=merged_at.get(nd.id)) for nd in nodes)
    return Dendrogram(final, tuple(merge_order), p, n)


def partition_at(d: Dendrogram, K: int) -> list:
    """Node ids of the ``K``-cluster partition, ordered by smallest member."""
    if not 1 <= K <= d.p:
        raise ValueError(f"K must lie in 1..{d.p}, got {K}")
    s = d.p - K
    ids = [
        nd.id
        for nd in d.nodes
        if nd.formed_at <= s and (nd.merged_at is None or nd.merged_at > s)
    ]
    return sorted(ids, key=lambda i: d.nodes[i].members[0])


def partition_labels(d: Dendrogram, K: int) -> np.ndarray:
    """Cluster label (1..K) of every variable at level ``K``."""
    labels = np.zeros(d.p, dtype=np.int64)
    for k, node_id in enumerate(partition_at(d, K), start=1):
        labels[list(d.nodes[node_id].members)] = k
    return labels


def kg_threshold(size: int, p: int) -> float:
    """Modified Kaiser-Guttman threshold ``1 + 2 sqrt((size - 1) / (p - 1))``."""
    if p <= 1:
        return 1.0
    return 1.0 + 2.0 * math.sqrt((size - 1) / (p - 1))


def kg_unidimensional(node: ClusterNode, p: int) -> bool:
    """True when the node's correlation spectrum has exactly one eigenvalue above threshold.

    A single variable is unidimensional by convention.
    """
    if node.size == 1:
        return True
    L = kg_threshold(node.size, p)
    return node.kg_lambda1 > L and node.kg_lambda2 <= L
