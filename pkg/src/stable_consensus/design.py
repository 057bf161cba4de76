"""Sigma_alpha-minimizing network design by exhaustive one-step search.

Every candidate is scored with the full pipeline (fresh spectrum, then the
closed form or quadrature); there are no perturbative shortcuts.
"""

from __future__ import annotations

import csv
import io
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .fluctuation import sigma_alpha_total
from .graph import DisconnectedGraphError, Graph, GraphError, graph_spectrum
from .kernel import DEFAULT_TOL, SpectralKernel

TIE_RTOL = 1e-6
THREADS_ENV = "STABLE_CONSENSUS_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def objective(graph: Graph, alpha: float, tol: float = DEFAULT_TOL) -> float:
    """Sigma_alpha of ``graph`` under symmetric noise."""
    return sigma_alpha_total(SpectralKernel(graph_spectrum(graph)), alpha, tol)


def _map(fn, items, threads: int | None):
    threads = default_threads() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class DesignResult:
    """Objective per candidate and the argmin set.

    Candidates within relative ``TIE_RTOL`` of the minimum form the tie set,
    listed in candidate order.
    """

    kind: str
    alpha: float
    candidates: list
    values: np.ndarray
    skipped: list = field(default_factory=list)
    refined: tuple[float, float] | None = None

    @property
    def best_value(self) -> float:
        return float(np.min(self.values))

    @property
    def argmin(self) -> list:
        best = self.best_value
        idx = [k for k, v in enumerate(self.values) if v <= best * (1 + TIE_RTOL)]
        # objective gaps inside a tie are rounding noise, so order by candidate
        idx.sort(key=lambda k: self.candidates[k])
        return [self.candidates[k] for k in idx]

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(["candidate", "alpha", "sigma_alpha", "is_argmin"])
        winners = set(map(_cand_str, self.argmin))
        for c, v in zip(self.candidates, self.values):
            w.writerow([_cand_str(c), f"{self.alpha:.9g}", f"{v:.9g}", int(_cand_str(c) in winners)])
        return buf.getvalue()


def _cand_str(c) -> str:
    if isinstance(c, tuple):
        return f"{c[0]}-{c[1]}"
    return f"{c:.9g}"


def best_addition(graph: Graph, alpha: float, candidates: Sequence[tuple[int, int]] | None = None,
                  tol: float = DEFAULT_TOL, weight: float = 1.0,
                  threads: int | None = None) -> DesignResult:
    """Score adding one edge of weight ``weight`` for each candidate non-edge."""
    cands = graph.non_edges() if candidates is None else [tuple(sorted(map(int, c))) for c in candidates]
    for i, j in cands:
        if graph.has_edge(i, j):
            raise GraphError(f"candidate ({i},{j}) is already an edge")
    vals = _map(lambda c: objective(graph.with_edge(*c, weight), alpha, tol), cands, threads)
    return DesignResult("add", alpha, list(cands), np.array(vals))


def best_removal(graph: Graph, alpha: float, candidates: Sequence[tuple[int, int]] | None = None,
                 tol: float = DEFAULT_TOL, threads: int | None = None) -> DesignResult:
    """Score removing each edge; removals that disconnect the graph are skipped."""
    pool = [(i, j) for i, j, _ in graph.edges] if candidates is None else \
        [tuple(sorted(map(int, c))) for c in candidates]
    kept, skipped, graphs = [], [], []
    for c in pool:
        try:
            graphs.append(graph.without_edge(*c))
        except DisconnectedGraphError:
            skipped.append(c)
            continue
        kept.append(c)
    if not kept:
        raise GraphError("every candidate removal disconnects the graph")
    vals = _map(lambda h: objective(h, alpha, tol), graphs, threads)
    return DesignResult("remove", alpha, kept, np.array(vals), skipped)


# ---------------------------------------------------------------------------
# one-parameter reweighting

_AFFINE = re.compile(r"^\s*([-+]?[0-9.eE]+)?\s*(?:([-+])\s*(?:([0-9.eE]+)\s*\*\s*)?b)?\s*$")


def _parse_affine(token: str) -> tuple[float, float]:
    """``'2-b'`` -> ``(2, -1)``; accepts ``c``, ``b``, ``-b``, ``c+k*b`` and ``k*b``."""
    tok = token.replace(" ", "")
    m = re.fullmatch(r"([-+]?)(?:([0-9.eE]+)\*)?b", tok)
    if m:
        return 0.0, (-1.0 if m.group(1) == "-" else 1.0) * float(m.group(2) or 1.0)
    m = _AFFINE.match(tok)
    if not m or m.group(1) is None:
        raise GraphError(f"cannot parse weight {token!r}")
    const = float(m.group(1))
    if m.group(2) is None:
        return const, 0.0
    slope = float(m.group(3) or 1.0)
    return const, slope if m.group(2) == "+" else -slope


@dataclass(frozen=True)
class ReweightTemplate:
    """Graph whose edge weights are affine in one parameter ``b``."""

    n: int
    edges: tuple[tuple[int, int, float, float], ...]

    def graph(self, b: float) -> Graph:
        return Graph(self.n, [(i, j, c + k * b) for i, j, c, k in self.edges])

    @property
    def b_range(self) -> tuple[float, float]:
        """Open interval of ``b`` on which every weight is positive."""
        lo, hi = -math.inf, math.inf
        for _, _, c, k in self.edges:
            if k > 0:
                lo = max(lo, -c / k)
            elif k < 0:
                hi = min(hi, -c / k)
        return lo, hi


def parse_template(text: str) -> ReweightTemplate:
    n = None
    edges = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 2)
        if parts[0] == "n" and n is None and not edges:
            n = int(parts[1])
            continue
        if len(parts) != 3:
            raise GraphError(f"line {lineno}: expected 'i j weight-expression'")
        edges.append((int(parts[0]), int(parts[1]), *_parse_affine(parts[2])))
    if not edges:
        raise GraphError("template has no edges")
    if n is None:
        n = max(max(i, j) for i, j, *_ in edges)
    return ReweightTemplate(n, tuple(edges))


def load_template(spec: str) -> ReweightTemplate:
    from .datasets import resolve_text
    return parse_template(resolve_text(spec))


def best_reweighting(template: ReweightTemplate | Callable[[float], Graph], b_grid,
                     alpha: float, tol: float = DEFAULT_TOL, b_tol: float = 1e-6,
                     refine: bool = True, threads: int | None = None) -> DesignResult:
    """Sigma_alpha(b) over ``b_grid``, then golden-section refinement of the grid minimum.

    ``refined`` holds ``(b*, Sigma_alpha(b*))``. Grid points where the graph
    is invalid (non-positive weight or disconnected) are skipped.
    """
    make = template.graph if isinstance(template, ReweightTemplate) else template
    grid = [float(b) for b in b_grid]

    def score(b):
        try:
            return objective(make(b), alpha, tol)
        except GraphError:
            return None

    raw = _map(score, grid, threads)
    kept = [b for b, v in zip(grid, raw) if v is not None]
    skipped = [b for b, v in zip(grid, raw) if v is None]
    if not kept:
        raise GraphError("no valid b on the grid")
    vals = np.array([v for v in raw if v is not None])
    res = DesignResult("reweight", alpha, kept, vals, skipped)
    if refine and len(kept) >= 3:
        k = int(np.argmin(vals))
        lo = kept[max(k - 1, 0)]
        hi = kept[min(k + 1, len(kept) - 1)]
        f = lambda b: objective(make(b), alpha, tol)
        if 0 < k < len(kept) - 1:
            out = optimize.minimize_scalar(f, bracket=(lo, kept[k], hi), method="golden",
                                           options={"xtol": b_tol / max(abs(kept[k]), 1e-12)})
        else:
            out = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                           options={"xatol": b_tol})
        b_star = float(out.x)
        v_star = float(out.fun)
        if v_star > vals[k]:
            b_star, v_star = kept[k], float(vals[k])
        res.refined = (b_star, v_star)
    return res


# ---------------------------------------------------------------------------
# crossovers in alpha

@dataclass(frozen=True)
class Segment:
    """``argmin`` holds on ``[lo, hi]``; endpoints are bisection-refined switch points."""

    lo: float
    hi: float
    argmin: tuple


def _evaluator(graph: Graph, kind: str, candidates, tol, threads):
    if kind == "add":
        return lambda a: best_addition(graph, a, candidates, tol, threads=threads)
    if kind == "remove":
        return lambda a: best_removal(graph, a, candidates, tol, threads=threads)
    raise ValueError(f"crossover scan supports 'add' and 'remove', not {kind!r}")


def crossover_scan(graph: Graph, kind: str, alpha_grid, candidates=None, tol: float = DEFAULT_TOL,
                   resolution: float = 1e-3, threads: int | None = None) -> list[Segment]:
    """Piecewise-constant argmin map over ``alpha_grid`` with switch points refined by bisection.

    Tie sets are compared as sets. A bisection midpoint whose argmin matches
    neither neighbor (e.g. an exact tie at the switch) ends the refinement there.
    """
    evaluate = _evaluator(graph, kind, candidates, tol, threads)
    grid = np.sort(np.asarray(alpha_grid, dtype=float))
    key = lambda a: tuple(evaluate(float(a)).argmin)
    winners = [key(a) for a in grid]
    segments = []
    start = grid[0]
    for k in range(len(grid) - 1):
        left, right = winners[k], winners[k + 1]
        if set(left) == set(right):
            continue
        lo, hi = grid[k], grid[k + 1]
        while hi - lo > resolution:
            mid = 0.5 * (lo + hi)
            w = key(mid)
            if set(w) == set(left):
                lo = mid
            elif set(w) == set(right):
                hi = mid
            else:
                lo = hi = mid
        switch = float(0.5 * (lo + hi))
        segments.append(Segment(float(start), switch, left))
        start = switch
    segments.append(Segment(float(start), float(grid[-1]), winners[-1]))
    return segments


def switch_points(segments: list[Segment]) -> list[float]:
    return [s.hi for s in segments[:-1]]
