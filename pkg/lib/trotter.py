"""
Edge colouring and Heisenberg Trotter circuits.
"""

import logging
from typing import Dict, List

import networkx as nx

from .circuit import Circuit, Gate
from .network import Edge, NetworkGraph, edge_key
from .validators import ValidationError

logger = logging.getLogger(__name__)


def _bipartite_coloring(graph: NetworkGraph, n_colors: int) -> Dict[Edge, int]:
    # Alternating-path recolouring; bipartite graphs always fit in max-degree colours.
    at: List[Dict[int, int]] = [dict() for _ in range(graph.n)]
    colors: Dict[Edge, int] = {}
    for u, v in graph.edges:
        a = next(c for c in range(n_colors) if c not in at[u])
        b = next(c for c in range(n_colors) if c not in at[v])
        if a in at[v]:
            path = []
            x, current = v, a
            while current in at[x]:
                y = at[x][current]
                path.append((x, y, current))
                x, current = y, (b if current == a else a)
            for x, y, c in path:
                del at[x][c]
                del at[y][c]
            for x, y, c in path:
                swapped = b if c == a else a
                at[x][swapped] = y
                at[y][swapped] = x
                colors[edge_key(x, y)] = swapped
        at[u][a] = v
        at[v][a] = u
        colors[(u, v)] = a
    return colors


def edge_coloring(graph: NetworkGraph) -> List[List[Edge]]:
    """
    Split the edges into matchings.

    Bipartite graphs (chains, grids, heavy-hex) get exactly z groups where z
    is the coordination number; other graphs fall back to a greedy colouring
    of the line graph.
    """
    if not graph.edges:
        return []
    if nx.is_bipartite(graph.nx_graph):
        colors = _bipartite_coloring(graph, graph.coordination_number)
    else:
        line_colors = nx.greedy_color(nx.line_graph(graph.nx_graph), strategy="largest_first")
        colors = {edge_key(*e): c for e, c in line_colors.items()}
        logger.info("Graph %s is not bipartite; greedy colouring used %d colours", graph.name, len(set(colors.values())))

    groups: Dict[int, List[Edge]] = {}
    for e, c in colors.items():
        groups.setdefault(c, []).append(e)
    return [sorted(groups[c]) for c in sorted(groups)]


def heisenberg_trotter_circuit(graph: NetworkGraph, coupling: float = 1.0, dt: float = 0.1, layers: int = 1) -> Circuit:
    """
    First-order Trotter circuit of the Heisenberg model on the graph edges.

    Each Trotter step applies exp(-i dt J (XX + YY + ZZ)) on every edge, one
    colour group after the other, so a step has as many circuit layers as
    there are colours.
    """
    if layers < 0:
        raise ValidationError(f"Number of Trotter layers must be >= 0, got {layers}")
    groups = edge_coloring(graph)
    circuit_layers = []
    for _ in range(layers):
        for group in groups:
            circuit_layers.append(tuple(Gate("Heisenberg", e, (coupling, dt)) for e in group))
    return Circuit(n=graph.n, layers=tuple(circuit_layers))
