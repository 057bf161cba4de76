"""Weighted undirected graphs, Laplacians and validated spectra."""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

Edge = tuple[int, int, float]


class GraphError(ValueError):
    """Malformed graph description (bad ids, weights, duplicates, syntax)."""


class DisconnectedGraphError(GraphError):
    """Raised when the graph has more than one connected component."""

    def __init__(self, components: list[list[int]]):
        self.components = components
        parts = "; ".join("{" + ", ".join(map(str, c)) + "}" for c in components)
        super().__init__(f"graph is disconnected, components: {parts}")


class SpectrumError(ValueError):
    """Spectral decomposition failed validation."""


def _components(n: int, edges: Iterable[Edge]) -> list[list[int]]:
    parent = list(range(n + 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j, _ in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for v in range(1, n + 1):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


@dataclass(frozen=True)
class Graph:
    """Simple connected undirected graph on nodes ``1..n`` with positive weights.

    Edges are stored canonically as ``(i, j, w)`` with ``i < j``, sorted.
    """

    n: int
    edges: tuple[Edge, ...]

    def __init__(self, n: int, edges: Iterable[Sequence[float]]):
        n = int(n)
        if n < 2:
            raise GraphError(f"need at least 2 nodes, got {n}")
        seen: set[tuple[int, int]] = set()
        canon: list[Edge] = []
        for e in edges:
            if len(e) != 3:
                raise GraphError(f"edge must be (i, j, w), got {e!r}")
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if i != e[0] or j != e[1]:
                raise GraphError(f"node ids must be integers, got {e!r}")
            if not (1 <= i <= n and 1 <= j <= n):
                raise GraphError(f"node id out of range 1..{n}: {e!r}")
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if not (w > 0 and math.isfinite(w)):
                raise GraphError(f"weight must be positive and finite: {e!r}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
            canon.append((key[0], key[1], w))
        canon.sort()
        comps = _components(n, canon)
        if len(comps) > 1:
            raise DisconnectedGraphError(comps)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(canon))

    def has_edge(self, i: int, j: int) -> bool:
        a, b = min(i, j), max(i, j)
        return any(e[0] == a and e[1] == b for e in self.edges)

    def weight(self, i: int, j: int) -> float:
        a, b = min(i, j), max(i, j)
        for e in self.edges:
            if e[0] == a and e[1] == b:
                return e[2]
        return 0.0

    def with_edge(self, i: int, j: int, w: float = 1.0) -> "Graph":
        if self.has_edge(i, j):
            raise GraphError(f"edge ({i}, {j}) already present")
        return Graph(self.n, list(self.edges) + [(i, j, w)])

    def without_edge(self, i: int, j: int) -> "Graph":
        a, b = min(i, j), max(i, j)
        rest = [e for e in self.edges if (e[0], e[1]) != (a, b)]
        if len(rest) == len(self.edges):
            raise GraphError(f"edge ({i}, {j}) not present")
        return Graph(self.n, rest)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with node ``v`` renamed to ``perm[v - 1]`` (1-based permutation)."""
        if sorted(perm) != list(range(1, self.n + 1)):
            raise GraphError("relabeling must be a permutation of 1..n")
        return Graph(self.n, [(perm[i - 1], perm[j - 1], w) for i, j, w in self.edges])

    def scaled(self, gamma: float) -> "Graph":
        return Graph(self.n, [(i, j, gamma * w) for i, j, w in self.edges])

    def non_edges(self) -> list[tuple[int, int]]:
        present = {(i, j) for i, j, _ in self.edges}
        return [(i, j) for i in range(1, self.n + 1) for j in range(i + 1, self.n + 1)
                if (i, j) not in present]

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            a[i - 1, j - 1] = a[j - 1, i - 1] = w
        return a


def build_laplacian(g: Graph) -> np.ndarray:
    """Weighted Laplacian ``D - A`` of ``g``."""
    a = g.adjacency()
    return np.diag(a.sum(axis=1)) - a


# ---------------------------------------------------------------------------
# spectrum

def jacobi_eigh(a: np.ndarray, rel_tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi eigen-decomposition of a real symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` unsorted; column ``k`` of the
    vector matrix belongs to eigenvalue ``k``. Iterates full sweeps until the
    off-diagonal Frobenius mass drops below ``rel_tol * ||a||_F``.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise SpectrumError("matrix must be square and symmetric")
    v = np.eye(n)
    target = rel_tol * np.linalg.norm(a)
    mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        # summed directly: total minus diagonal cancels at ~1e-8 relative
        off = math.sqrt(np.sum(a[mask] ** 2))
        if off <= target:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise SpectrumError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


@dataclass(frozen=True)
class Spectrum:
    """Validated orthonormal eigen-decomposition ``L = Q diag(lambda) Q^T``.

    ``eigenvalues[0]`` is exactly 0 and ``eigenvectors[:, 0]`` exactly
    ``1/sqrt(n)``. Arrays are read-only.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    tolerance: float = field(default=0.0)

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def lambda2(self) -> float:
        return float(self.eigenvalues[1])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def nonzero(self) -> np.ndarray:
        return self.eigenvalues[1:]

    @property
    def modes(self) -> np.ndarray:
        """Eigenvectors of the nonzero eigenvalues, shape ``(n, n-1)``."""
        return self.eigenvectors[:, 1:]

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def spectral_tolerance(lambda_max: float) -> float:
    return 1e-9 * max(1.0, lambda_max)


def _canonicalize(lam: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(lam)
    order = np.argsort(lam, kind="stable")
    lam = lam[order].copy()
    q = q[:, order].copy()
    q[:, 0] = 1.0 / math.sqrt(n)
    # modified Gram-Schmidt against the consensus direction and each other
    for k in range(1, n):
        v = q[:, k]
        for m in range(k):
            v = v - (q[:, m] @ v) * q[:, m]
        v /= np.linalg.norm(v)
        q[:, k] = v
    for k in range(1, n):
        col = q[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if len(nz) and col[nz[0]] < 0:
            q[:, k] = -col
    return lam, q


def spectrum(L: np.ndarray, method: str = "jacobi") -> Spectrum:
    """Sorted, validated eigen-decomposition of a Laplacian.

    ``method`` is ``"jacobi"`` (cyclic Jacobi rotations) or ``"numpy"``
    (LAPACK ``eigh``); both go through the same canonicalization and checks.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    if L.shape != (n, n) or n < 2:
        raise SpectrumError("Laplacian must be an n x n matrix with n >= 2")
    scale = max(1.0, np.abs(L).max())
    if np.abs(L - L.T).max() > 1e-12 * scale:
        raise SpectrumError("Laplacian is not symmetric")
    if np.abs(L.sum(axis=1)).max() > 1e-9 * scale:
        raise SpectrumError("Laplacian rows must sum to zero")
    if method == "jacobi":
        lam, q = jacobi_eigh(L)
    elif method == "numpy":
        lam, q = np.linalg.eigh(L)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    lam, q = _canonicalize(np.asarray(lam, dtype=float), q)
    eps = spectral_tolerance(lam[-1])
    if abs(lam[0]) > eps:
        raise SpectrumError(f"smallest eigenvalue {lam[0]:.3e} is not zero")
    lam[0] = 0.0
    if lam[1] <= eps:
        raise SpectrumError(
            f"lambda_2 = {lam[1]:.3e} <= {eps:.1e}: graph disconnected or degenerate")
    if np.abs(q.T @ q - np.eye(n)).max() > eps:
        raise SpectrumError("eigenvectors are not orthonormal")
    if np.abs((q * lam) @ q.T - L).max() > eps:
        raise SpectrumError("decomposition does not reconstruct L")
    lam.setflags(write=False)
    q.setflags(write=False)
    return Spectrum(lam, q, eps)


def graph_spectrum(g: Graph, method: str = "jacobi") -> Spectrum:
    return spectrum(build_laplacian(g), method=method)


def is_complete_spectrum(s: Spectrum, tol: float = 1e-9) -> bool:
    """True when all nonzero eigenvalues coincide up to relative ``tol``."""
    return (s.lambda_max - s.lambda2) / s.lambda_max <= tol


# ---------------------------------------------------------------------------
# generators

def complete_graph(n: int, weight: float = 1.0) -> Graph:
    return Graph(n, [(i, j, weight) for i in range(1, n + 1) for j in range(i + 1, n + 1)])


def path_graph(n: int, weight: float = 1.0) -> Graph:
    return Graph(n, [(i, i + 1, weight) for i in range(1, n)])


def cycle_graph(n: int, weight: float = 1.0) -> Graph:
    return Graph(n, [(i, i + 1, weight) for i in range(1, n)] + [(1, n, weight)])


def star_graph(leaves: int, weight: float = 1.0) -> Graph:
    """Star with center node 1 and ``leaves`` leaf nodes."""
    return Graph(leaves + 1, [(1, j, weight) for j in range(2, leaves + 2)])


def random_connected_graph(n: int, p: float = 0.3, seed: int = 0,
                           weights: tuple[float, float] | None = None) -> Graph:
    """Erdos-Renyi graph on a random spanning tree, so it is always connected.

    With ``weights=(lo, hi)`` edge weights are uniform on that range,
    otherwise all weights are 1.
    """
    rng = np.random.default_rng(seed)
    order = rng.permutation(n) + 1
    pairs = {(min(a, b), max(a, b))
             for a, b in ((int(order[k]), int(order[rng.integers(k)])) for k in range(1, n))}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if rng.random() < p:
                pairs.add((i, j))
    edges = []
    for i, j in sorted(pairs):
        w = 1.0 if weights is None else float(rng.uniform(*weights))
        edges.append((i, j, w))
    return Graph(n, edges)


# ---------------------------------------------------------------------------
# edge-list text format

def parse_edge_list(text: str) -> Graph:
    """Parse ``i j w`` lines; ``#`` comments; optional leading ``n <count>`` header."""
    n = None
    edges: list[Edge] = []
    first = True
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if first and parts[0] == "n":
            if len(parts) != 2:
                raise GraphError(f"line {lineno}: header must be 'n <count>'")
            try:
                n = int(parts[1])
            except ValueError:
                raise GraphError(f"line {lineno}: bad node count {parts[1]!r}") from None
            first = False
            continue
        first = False
        if len(parts) != 3:
            raise GraphError(f"line {lineno}: expected 'i j w', got {line!r}")
        try:
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise GraphError(f"line {lineno}: cannot parse {line!r}") from None
        edges.append((i, j, w))
    if not edges:
        raise GraphError("edge list is empty")
    if n is None:
        n = max(max(i, j) for i, j, _ in edges)
    return Graph(n, edges)


def format_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines += [f"{i} {j} {w!r}" for i, j, w in g.edges]
    return "\n".join(lines) + "\n"


def read_edge_list(path: str | os.PathLike) -> Graph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: Graph, path: str | os.PathLike) -> None:
    Path(path).write_text(format_edge_list(g))
