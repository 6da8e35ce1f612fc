"""
Line partitions of planar networks.

Groups are 0-based. The groups must form a path (edges only inside a group
or between consecutive groups) and every group interior must be a path in
the stored vertex order, so each group acts as an MPO between boundary MPS.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from .network import Edge, NetworkGraph, TensorNetworkState
from .validators import ValidationError

logger = logging.getLogger(__name__)

STRATEGIES = ("columns", "rows", "diagonal", "custom")

_COORD_DIGITS = 6


class PartitionError(ValidationError):
    """The grouping does not form a line of path-shaped groups."""


@dataclass(frozen=True)
class Partitioning:
    graph: NetworkGraph
    groups: Tuple[Tuple[int, ...], ...]
    strategy: str = "custom"

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @cached_property
    def _group_of(self) -> Dict[int, int]:
        return {v: b for b, group in enumerate(self.groups) for v in group}

    @cached_property
    def _position(self) -> Dict[int, int]:
        return {v: i for group in self.groups for i, v in enumerate(group)}

    def group_of(self, v: int) -> int:
        return self._group_of[v]

    def position(self, v: int) -> int:
        return self._position[v]

    @cached_property
    def _cuts(self) -> Tuple[Tuple[Edge, ...], ...]:
        cuts: List[List[Tuple[Tuple[int, int], Edge]]] = [[] for _ in range(max(self.n_groups - 1, 0))]
        for u, v in self.graph.edges:
            bu, bv = self._group_of[u], self._group_of[v]
            if bu == bv:
                continue
            lower, upper = (u, v) if bu < bv else (v, u)
            cuts[min(bu, bv)].append(((self._position[lower], self._position[upper]), (u, v)))
        return tuple(tuple(edge for _, edge in sorted(cut)) for cut in cuts)

    def cut_edges(self, b: int) -> Tuple[Edge, ...]:
        """
        Edges between groups b and b+1, ordered by the position of their
        endpoint in group b, then in group b+1.
        """
        return self._cuts[b]

    def validate(self) -> "Partitioning":
        """
        Raises:
            PartitionError: Groups overlap or miss vertices, the quotient is not a
                path, or an intra-group edge skips positions
        """
        seen = [v for group in self.groups for v in group]
        if sorted(seen) != list(range(self.graph.n)):
            raise PartitionError("Groups must cover every vertex exactly once")
        if any(len(group) == 0 for group in self.groups):
            raise PartitionError("Empty group in partitioning")

        bad_cross, bad_inner = [], []
        for u, v in self.graph.edges:
            bu, bv = self._group_of[u], self._group_of[v]
            if abs(bu - bv) > 1:
                bad_cross.append((u, v))
            elif bu == bv and abs(self._position[u] - self._position[v]) != 1:
                bad_inner.append((u, v))
        if bad_cross:
            raise PartitionError(f"{self.strategy} partition: edges {bad_cross[:5]} join non-adjacent groups")
        if bad_inner:
            raise PartitionError(
                f"{self.strategy} partition: edges {bad_inner[:5]} are not between consecutive group members"
            )
        for b in range(self.n_groups - 1):
            if not self._cuts[b]:
                raise PartitionError(f"No edges between groups {b} and {b + 1}; the network is not a line of groups")
        return self

    def to_dict(self) -> Dict:
        return {"strategy": self.strategy, "groups": [list(g) for g in self.groups]}


def _grouped(graph: NetworkGraph, key, order) -> Tuple[Tuple[int, ...], ...]:
    buckets: Dict[float, List[int]] = {}
    for v in range(graph.n):
        buckets.setdefault(round(key(v), _COORD_DIGITS), []).append(v)
    return tuple(tuple(sorted(buckets[k], key=order)) for k in sorted(buckets))


def partition_line(
    state_or_graph, strategy: str = "columns", groups: Optional[Sequence[Sequence[int]]] = None
) -> Partitioning:
    """
    Group the vertices into a line.

    Strategies:
        columns: equal x, groups left to right, members top to bottom
        rows: equal y, groups top to bottom, members left to right
        diagonal: equal x - y, members left to right
        custom: the given groups as they are

    Raises:
        PartitionError: Missing coordinates or an invalid grouping
    """
    graph = state_or_graph.graph if isinstance(state_or_graph, TensorNetworkState) else state_or_graph
    if strategy not in STRATEGIES:
        raise PartitionError(f"Unknown partition strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")

    if strategy == "custom":
        if groups is None:
            raise PartitionError("custom partition needs explicit groups")
        result = tuple(tuple(int(v) for v in g) for g in groups)
    else:
        if graph.coords is None:
            raise PartitionError(f"{strategy} partition needs vertex coordinates")
        xy = graph.coords
        if strategy == "columns":
            result = _grouped(graph, lambda v: xy[v][0], lambda v: (-xy[v][1], v))
        elif strategy == "rows":
            result = _grouped(graph, lambda v: -xy[v][1], lambda v: (xy[v][0], v))
        else:
            result = _grouped(graph, lambda v: xy[v][0] - xy[v][1], lambda v: (xy[v][0], v))

    partitioning = Partitioning(graph=graph, groups=result, strategy=strategy).validate()
    logger.debug(
        "%s partition of %s: %d groups, largest %d", strategy, graph.name, partitioning.n_groups,
        max(len(g) for g in partitioning.groups),
    )
    return partitioning
