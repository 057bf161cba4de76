"""Bundled graphs and graph-spec resolution.

A graph spec is either a path to an edge-list file, the name of a bundled
graph (``g1``, ``g2``), or a generator call ``complete:5``, ``path:3``,
``star:4`` (leaf count) or ``cycle:6``.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .graph import (Graph, GraphError, complete_graph, cycle_graph, parse_edge_list, path_graph,
                    star_graph)

BUNDLED = ("g1", "g2", "g3")
GENERATORS = {"complete": complete_graph, "path": path_graph, "star": star_graph,
              "cycle": cycle_graph}


def bundled_text(name: str) -> str:
    if name not in BUNDLED:
        raise KeyError(f"no bundled graph {name!r}; choose from {BUNDLED}")
    return resources.files("stable_consensus.data").joinpath(f"{name}.txt").read_text()


def bundled_graph(name: str) -> Graph:
    """``g1`` or ``g2``; ``g3`` is a reweighting template (see ``design.load_template``)."""
    if name == "g3":
        raise KeyError("g3 is a reweighting template, load it with design.load_template")
    return parse_edge_list(bundled_text(name))


def resolve_text(spec: str) -> str:
    """Edge-list text for a file path or bundled name."""
    if spec in BUNDLED and not Path(spec).exists():
        return bundled_text(spec)
    try:
        return Path(spec).read_text()
    except OSError as exc:
        raise GraphError(f"cannot read graph file {spec!r}: {exc.strerror}") from None


def resolve_graph(spec: str) -> Graph:
    kind, sep, arg = spec.partition(":")
    if sep and kind in GENERATORS:
        try:
            size = int(arg)
        except ValueError:
            raise GraphError(f"bad generator size in {spec!r}") from None
        return GENERATORS[kind](size)
    return parse_edge_list(resolve_text(spec))
