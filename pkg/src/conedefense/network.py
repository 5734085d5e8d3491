"""Weighted digraphs for consensus networks.

Orientation: a weight a_ij > 0 means node i *receives* from node j, so row i
of the Laplacian carries the in-degree of i. Node j then "influences" node i.
All node indices are 0-based.
"""
from __future__ import annotations

import heapq
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np


@dataclass(frozen=True)
class Digraph:
    n_nodes: int
    weights: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("a digraph needs at least one node")
        clean = {}
        for (i, j), w in self.weights.items():
            i, j = int(i), int(j)
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise ValueError(f"edge ({i}, {j}) outside 0..{self.n_nodes - 1}")
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not w > 0:
                raise ValueError(f"edge ({i}, {j}) has nonpositive weight {w}")
            clean[(i, j)] = float(w)
        object.__setattr__(self, "weights", clean)

    @classmethod
    def from_adjacency(cls, adj) -> "Digraph":
        adj = np.asarray(adj, dtype=float)
        n = adj.shape[0]
        return cls(n, {(i, j): adj[i, j] for i in range(n) for j in range(n)
                       if i != j and adj[i, j] > 0})

    @classmethod
    def from_laplacian(cls, L, tol: float = 0.0) -> "Digraph":
        L = np.asarray(L, dtype=float)
        n = L.shape[0]
        return cls(n, {(i, j): -L[i, j] for i in range(n) for j in range(n)
                       if i != j and -L[i, j] > tol})

    @classmethod
    def cycle(cls, n: int, weight: float = 1.0) -> "Digraph":
        """Directed cycle where node i receives from node i+1 (mod n)."""
        if n == 1:
            return cls(1)
        return cls(n, {(i, (i + 1) % n): weight for i in range(n)})

    @classmethod
    def path(cls, n: int, weight: float = 1.0) -> "Digraph":
        """Directed path where node i+1 receives from node i."""
        return cls(n, {(i + 1, i): weight for i in range(n - 1)})

    @classmethod
    def complete(cls, n: int, weight: float = 1.0) -> "Digraph":
        return cls(n, {(i, j): weight for i in range(n) for j in range(n) if i != j})

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n_nodes, self.n_nodes))
        for (i, j), w in self.weights.items():
            A[i, j] = w
        return A

    def sources_of(self, i: int) -> list[int]:
        """Nodes that node i receives from."""
        return sorted(j for (a, j) in self.weights if a == i)

    def influenced_by(self, j: int) -> list[int]:
        """Nodes that receive from node j."""
        return sorted(i for (i, b) in self.weights if b == j)

    def reversed(self) -> "Digraph":
        return Digraph(self.n_nodes, {(j, i): w for (i, j), w in self.weights.items()})

    def induced(self, nodes: Iterable[int]) -> "Digraph":
        nodes = list(nodes)
        pos = {v: k for k, v in enumerate(nodes)}
        return Digraph(len(nodes), {(pos[i], pos[j]): w for (i, j), w in self.weights.items()
                                    if i in pos and j in pos})


def laplacian(g: Digraph) -> np.ndarray:
    """L = D_in - A_adj; every row sums to zero."""
    A = g.adjacency()
    L = -A
    # diagonal built from the same off-diagonal values so row sums cancel exactly
    # up to the summation order
    np.fill_diagonal(L, A.sum(axis=1))
    return L


# strongly connected components ---------------------------------------------------

@dataclass(frozen=True)
class SccDecomposition:
    """Components ordered so that the block-permuted Laplacian is upper block-triangular.

    Component p precedes component q whenever some node of p receives from a
    node of q; the influence-sink components therefore come first.
    """

    components: tuple[tuple[int, ...], ...]
    component_of: tuple[int, ...]

    @property
    def n_components(self) -> int:
        return len(self.components)

    def permutation(self) -> list[int]:
        return [v for comp in self.components for v in comp]


def _tarjan(n: int, succ: list[list[int]]) -> list[list[int]]:
    """Iterative Tarjan; components come out in reverse topological order of ``succ``."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, k = work[-1]
            if k < len(succ[v]):
                work[-1] = (v, k + 1)
                w = succ[v][k]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
    return out


def scc_decompose(g: Digraph) -> SccDecomposition:
    n = g.n_nodes
    # "receives-from" successor lists: i -> j when a_ij > 0
    succ = [[] for _ in range(n)]
    for (i, j) in sorted(g.weights):
        succ[i].append(j)
    raw = _tarjan(n, succ)
    comp_of = [0] * n
    for c, comp in enumerate(raw):
        for v in comp:
            comp_of[v] = c
    # deterministic topological order of the receives-from condensation (Kahn,
    # smallest member node first among ready components)
    m = len(raw)
    out_edges = [set() for _ in range(m)]
    indeg = [0] * m
    for (i, j) in g.weights:
        a, b = comp_of[i], comp_of[j]
        if a != b and b not in out_edges[a]:
            out_edges[a].add(b)
            indeg[b] += 1
    ready = [(raw[c][0], c) for c in range(m) if indeg[c] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        _, c = heapq.heappop(ready)
        order.append(c)
        for d in out_edges[c]:
            indeg[d] -= 1
            if indeg[d] == 0:
                heapq.heappush(ready, (raw[d][0], d))
    components = tuple(tuple(raw[c]) for c in order)
    final_of = [0] * n
    for k, comp in enumerate(components):
        for v in comp:
            final_of[v] = k
    return SccDecomposition(components, tuple(final_of))


def is_strongly_connected(g: Digraph) -> bool:
    return scc_decompose(g).n_components == 1


def _check_node(g, v):
    if not 0 <= v < g.n_nodes:
        raise IndexError(f"node {v} outside 0..{g.n_nodes - 1}")


def influence_reachable(g: Digraph, from_node: int, to_node: int) -> bool:
    """True iff a directed influence walk leads from ``from_node`` to ``to_node``."""
    _check_node(g, from_node)
    _check_node(g, to_node)
    if from_node == to_node:
        return True
    succ = [[] for _ in range(g.n_nodes)]
    for (i, j) in g.weights:
        succ[j].append(i)
    seen = {from_node}
    queue = deque([from_node])
    while queue:
        v = queue.popleft()
        for w in succ[v]:
            if w == to_node:
                return True
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return False


def _unique_terminal(g: Digraph, receives: bool):
    d = scc_decompose(g)
    m = d.n_components
    has_out = [False] * m
    for (i, j) in g.weights:
        a, b = d.component_of[i], d.component_of[j]
        if a != b:
            # influence flows j -> i; "receives" terminal has no incoming influence
            has_out[b if not receives else a] = True
    terminal = [c for c in range(m) if not has_out[c]]
    if len(terminal) != 1:
        return None
    return frozenset(d.components[terminal[0]])


def universal_sink_component(g: Digraph) -> frozenset[int] | None:
    """The component every node can influence, if there is one.

    In an acyclic condensation this exists iff there is exactly one component
    with no outgoing influence edge.
    """
    return _unique_terminal(g, receives=False)


def universal_source_component(g: Digraph) -> frozenset[int] | None:
    """The component that influences every node (spanning-tree roots), if any."""
    return _unique_terminal(g, receives=True)


def component_index_sets(d: SccDecomposition) -> tuple[list[list[int]], list[int]]:
    """Contiguous coordinate blocks per component after block permutation.

    Returns ``(blocks, perm)``: ``perm[k]`` is the original node placed at
    position k, and ``blocks[c]`` lists the positions occupied by component c.
    """
    perm = d.permutation()
    blocks, start = [], 0
    for comp in d.components:
        blocks.append(list(range(start, start + len(comp))))
        start += len(comp)
    return blocks, perm


IMAGE_TOL = 1e-8


def basis_in_image(L, i: int, tol: float = IMAGE_TOL, transpose: bool = False) -> bool:
    """Whether e_i lies in Im(L) (or Im(L^T)), by least-squares residual."""
    L = np.asarray(L, dtype=float)
    M = L.T if transpose else L
    n = M.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"index {i} outside 0..{n - 1}")
    e = np.zeros(n)
    e[i] = 1.0
    x, *_ = np.linalg.lstsq(M, e, rcond=None)
    return bool(np.linalg.norm(M @ x - e) <= tol)


def basis_image_check(L, i: int, tol: float = IMAGE_TOL, transpose: bool = False) -> bool:
    """:func:`basis_in_image`, warning when L is not strongly connected.

    For strongly connected Laplacians e_i is never in the image.
    """
    if not is_strongly_connected(Digraph.from_laplacian(L)):
        warnings.warn("Laplacian is not strongly connected; e_i may lie in its image",
                      RuntimeWarning, stacklevel=2)
    return basis_in_image(L, i, tol, transpose)
