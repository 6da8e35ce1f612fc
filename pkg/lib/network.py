"""
Planar graphs and tensor network states on them.

A TensorNetworkState holds one IndexedTensor per qubit. Site tensor v carries
the physical index ``p<v>`` (dimension 2) and one virtual index ``e<u>-<w>``
(u < w) per incident edge. The bra copy of any label ``l`` is ``l*``.
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from .tensor_core import Index, IndexedTensor, contract_network
from .validators import ValidationError, validate_file_path

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
Bitstring = Tuple[int, ...]

PHYSICAL_DIMENSION = 2
BYTES_PER_ENTRY = 16


class PlanarityError(ValidationError):
    """Raised for graphs without a planar embedding."""

    def __init__(self, message: str, certificate: Sequence[Edge] = ()):
        super().__init__(message)
        self.certificate = tuple(certificate)


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def physical_label(v: int) -> str:
    return f"p{v}"


def bond_label(u: int, v: int) -> str:
    a, b = edge_key(u, v)
    return f"e{a}-{b}"


def bra(label: str) -> str:
    return label + "*"


@dataclass(frozen=True)
class NetworkGraph:
    """
    Qubit connectivity graph.

    Edges are stored normalized (u < v) and sorted. Coordinates, when given,
    fix the planar embedding and drive the partitioning strategies.
    """

    n: int
    edges: Tuple[Edge, ...]
    coords: Optional[Tuple[Tuple[float, float], ...]] = None
    name: str = "custom"

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"A graph needs at least one vertex, got n={self.n}")
        normalized = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValidationError(f"Self-loop on vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"Edge ({u}, {v}) outside vertex range 0..{self.n - 1}")
            normalized.append(edge_key(u, v))
        if len(set(normalized)) != len(normalized):
            raise ValidationError("Duplicate edges in graph")
        object.__setattr__(self, "edges", tuple(sorted(normalized)))
        if self.coords is not None:
            if len(self.coords) != self.n:
                raise ValidationError(f"{len(self.coords)} coordinates for {self.n} vertices")
            object.__setattr__(self, "coords", tuple((float(x), float(y)) for x, y in self.coords))

    @cached_property
    def nx_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    @cached_property
    def _adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(sorted(self.nx_graph.neighbors(v))) for v in range(self.n))

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self._adjacency[v]

    def degree(self, v: int) -> int:
        return len(self._adjacency[v])

    @property
    def coordination_number(self) -> int:
        return max((self.degree(v) for v in range(self.n)), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self._edge_set

    @cached_property
    def _edge_set(self) -> frozenset:
        return frozenset(self.edges)

    @property
    def is_tree(self) -> bool:
        return len(self.edges) == self.n - 1 and nx.is_connected(self.nx_graph)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"n": self.n, "edges": [list(e) for e in self.edges]}
        if self.coords is not None:
            data["coords"] = [list(c) for c in self.coords]
        if self.name != "custom":
            data["name"] = self.name
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "NetworkGraph":
        try:
            n = int(data["n"])
            edges = tuple((int(u), int(v)) for u, v in data["edges"])
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Malformed graph description: {e}") from e
        coords = data.get("coords")
        return cls(
            n=n,
            edges=edges,
            coords=tuple((float(x), float(y)) for x, y in coords) if coords is not None else None,
            name=str(data.get("name", "custom")),
        )


def check_planar_connected(graph: NetworkGraph) -> NetworkGraph:
    """
    Reject disconnected or non-planar graphs.

    Raises:
        ValidationError: If the graph is disconnected
        PlanarityError: If the graph is not planar; certificate holds a Kuratowski subgraph
    """
    if not nx.is_connected(graph.nx_graph):
        raise ValidationError(f"Graph {graph.name!r} is not connected")
    planar, certificate = nx.check_planarity(graph.nx_graph, counterexample=True)
    if not planar:
        edges = sorted(edge_key(u, v) for u, v in certificate.edges())
        raise PlanarityError(f"Graph {graph.name!r} is not planar (Kuratowski subgraph with {len(edges)} edges)", edges)
    return graph


def load_graph(path: Union[str, Path]) -> NetworkGraph:
    """Read a graph JSON file ``{"n", "edges", "coords"?}`` and validate it."""
    path = validate_file_path(path, must_exist=True)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    graph = NetworkGraph.from_dict(data)
    if graph.name == "custom":
        graph = replace(graph, name=path.stem)
    return check_planar_connected(graph)


def save_graph(graph: NetworkGraph, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(graph.to_dict(), indent=2) + "\n", encoding="utf-8")
    logger.debug("Wrote graph %s (%d vertices) to %s", graph.name, graph.n, path)
    return path


def as_bitstring(bits: Union[str, Iterable[int]], n: int) -> Bitstring:
    """
    Normalize "0101" or [0, 1, 0, 1] to a tuple of ints.

    Raises:
        ValidationError: On wrong length or non-binary entries
    """
    if isinstance(bits, str):
        values = [c for c in bits.strip() if not c.isspace()]
        if any(c not in "01" for c in values):
            raise ValidationError(f"Bitstring {bits!r} contains characters other than 0/1")
        result = tuple(int(c) for c in values)
    else:
        result = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in result):
            raise ValidationError(f"Bitstring {result} contains values other than 0/1")
    if len(result) != n:
        raise ValidationError(f"Bitstring has length {len(result)}, expected {n}")
    return result


def format_bits(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def site_labels(graph: NetworkGraph, v: int) -> Tuple[str, ...]:
    """Canonical index order of site tensor v: physical, then bonds by neighbour id."""
    return (physical_label(v),) + tuple(bond_label(v, w) for w in graph.neighbors(v))


@dataclass(frozen=True)
class TensorNetworkState:
    """One site tensor per vertex of a planar graph."""

    graph: NetworkGraph
    tensors: Tuple[IndexedTensor, ...]

    def __post_init__(self):
        object.__setattr__(self, "tensors", tuple(self.tensors))
        if len(self.tensors) != self.graph.n:
            raise ValidationError(f"{len(self.tensors)} site tensors for {self.graph.n} vertices")
        for v, tensor in enumerate(self.tensors):
            expected = set(site_labels(self.graph, v))
            if set(tensor.labels) != expected:
                raise ValidationError(f"Site {v} has labels {tensor.labels}, expected {sorted(expected)}")
            if tensor.dim(physical_label(v)) != PHYSICAL_DIMENSION:
                raise ValidationError(f"Site {v} physical dimension is {tensor.dim(physical_label(v))}")
        for u, v in self.graph.edges:
            label = bond_label(u, v)
            if self.tensors[u].dim(label) != self.tensors[v].dim(label):
                raise ValidationError(
                    f"Bond {label} has dimension {self.tensors[u].dim(label)} at {u} "
                    f"but {self.tensors[v].dim(label)} at {v}"
                )

    @property
    def n_qubits(self) -> int:
        return self.graph.n

    def tensor(self, v: int) -> IndexedTensor:
        return self.tensors[v]

    def bond_dimension(self, u: int, v: int) -> int:
        return self.tensors[u].dim(bond_label(u, v))

    def max_bond_dimension(self) -> int:
        return max((self.bond_dimension(u, v) for u, v in self.graph.edges), default=1)

    def bond_dimensions(self) -> Dict[Edge, int]:
        return {e: self.bond_dimension(*e) for e in self.graph.edges}

    def replace(self, updates: Mapping[int, IndexedTensor]) -> "TensorNetworkState":
        """Copy of the state with some site tensors swapped (canonical label order enforced)."""
        tensors = list(self.tensors)
        for v, tensor in updates.items():
            tensors[v] = tensor.transpose(site_labels(self.graph, v))
        return TensorNetworkState(self.graph, tuple(tensors))


def product_state(graph: NetworkGraph, bits: Union[str, Iterable[int]]) -> TensorNetworkState:
    """Computational basis state with all virtual dimensions equal to one."""
    bits = as_bitstring(bits, graph.n)
    tensors = []
    for v, bit in enumerate(bits):
        labels = site_labels(graph, v)
        data = np.zeros((PHYSICAL_DIMENSION,) + (1,) * (len(labels) - 1), dtype=np.complex128)
        data[(bit,) + (0,) * (len(labels) - 1)] = 1.0
        tensors.append(IndexedTensor.from_array(labels, data))
    return TensorNetworkState(graph, tuple(tensors))


def domain_wall(graph: NetworkGraph) -> Bitstring:
    """
    Lower half of the vertices (by x coordinate, then id) in 0, the rest in 1.

    Without coordinates the split is by vertex id.
    """
    if graph.coords is not None:
        order = sorted(range(graph.n), key=lambda v: (graph.coords[v][0], v))
    else:
        order = list(range(graph.n))
    bits = [1] * graph.n
    for v in order[: graph.n // 2]:
        bits[v] = 0
    return tuple(bits)


def magnetization_sector(bits: Sequence[int]) -> int:
    """Hamming weight: the conserved quantity of magnetization-preserving circuits."""
    return int(sum(bits))


def memory_footprint(state: TensorNetworkState) -> int:
    """Bytes held by the site tensors at double-complex precision."""
    return sum(BYTES_PER_ENTRY * t.size for t in state.tensors)


def bra_tensor(state: TensorNetworkState, v: int, open_physical: bool = False) -> IndexedTensor:
    """
    Conjugate copy of site v with virtual labels primed.

    With open_physical the physical label is primed too, leaving a density-matrix leg.
    """
    tensor = state.tensor(v)
    keep = () if open_physical else (physical_label(v),)
    return tensor.conj().relabel({label: bra(label) for label in tensor.labels if label not in keep})


def to_dense(state: TensorNetworkState) -> np.ndarray:
    """
    Exact statevector, qubit 0 most significant.

    Only feasible for small networks (a few tens of qubits at most).
    """
    result = contract_network(state.tensors)
    order = [physical_label(v) for v in range(state.n_qubits)]
    return result.transpose(order).data.reshape(-1).copy()


def exact_norm(state: TensorNetworkState) -> float:
    vector = to_dense(state)
    return float(np.vdot(vector, vector).real)


@dataclass(frozen=True)
class Loop:
    """A primitive loop: vertices in cyclic order and the matching edges."""

    vertices: Tuple[int, ...]
    edges: Tuple[Edge, ...] = field(init=False)

    def __post_init__(self):
        cycle = self.vertices
        object.__setattr__(
            self, "edges", tuple(edge_key(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle)))
        )

    def __len__(self) -> int:
        return len(self.vertices)


def _planar_embedding(graph: NetworkGraph) -> nx.PlanarEmbedding:
    if graph.coords is not None:
        data = {}
        for v in range(graph.n):
            x0, y0 = graph.coords[v]
            # clockwise = decreasing polar angle
            data[v] = sorted(
                graph.neighbors(v),
                key=lambda w: -math.atan2(graph.coords[w][1] - y0, graph.coords[w][0] - x0),
            )
        embedding = nx.PlanarEmbedding()
        embedding.add_nodes_from(range(graph.n))
        try:
            embedding.set_data(data)
            embedding.check_structure()
            return embedding
        except nx.NetworkXException:
            logger.warning("Coordinates of %s do not give a planar embedding; using a combinatorial one", graph.name)
    planar, embedding = nx.check_planarity(graph.nx_graph)
    if not planar:
        raise PlanarityError(f"Graph {graph.name!r} is not planar")
    return embedding


def _strip_spurs(face: List[int]) -> List[int]:
    """Remove back-and-forth walks along tree edges hanging into a face."""
    darts = [(face[i], face[(i + 1) % len(face)]) for i in range(len(face))]
    stack: List[Edge] = []
    for dart in darts:
        if stack and stack[-1] == (dart[1], dart[0]):
            stack.pop()
        else:
            stack.append(dart)
    while len(stack) >= 2 and stack[0] == (stack[-1][1], stack[-1][0]):
        stack = stack[1:-1]
    return [u for u, _ in stack]


def _shoelace(graph: NetworkGraph, face: Sequence[int]) -> float:
    area = 0.0
    for i, v in enumerate(face):
        x1, y1 = graph.coords[v]
        x2, y2 = graph.coords[face[(i + 1) % len(face)]]
        area += x1 * y2 - x2 * y1
    return abs(area) / 2.0


def primitive_loops(graph: NetworkGraph) -> List[Loop]:
    """
    Interior faces of the planar embedding.

    The outer face is the one with the largest enclosed area when
    coordinates exist, otherwise the longest face walk. Trees have none.
    """
    if len(graph.edges) < 3:
        return []
    embedding = _planar_embedding(graph)
    visited: set = set()
    faces: List[List[int]] = []
    for u, v in embedding.edges():
        if (u, v) in visited:
            continue
        faces.append(list(embedding.traverse_face(u, v, mark_half_edges=visited)))

    if graph.coords is not None:
        outer = max(range(len(faces)), key=lambda i: (_shoelace(graph, faces[i]), len(faces[i])))
    else:
        outer = max(range(len(faces)), key=lambda i: len(faces[i]))

    loops = []
    for i, face in enumerate(faces):
        if i == outer:
            continue
        cycle = _strip_spurs(face)
        if len(cycle) < 3:
            continue
        if len(set(cycle)) != len(cycle):
            logger.warning("Face %s of %s is not a simple cycle; skipped", face, graph.name)
            continue
        start = cycle.index(min(cycle))
        cycle = cycle[start:] + cycle[:start]
        if cycle[1] > cycle[-1]:
            cycle = [cycle[0]] + cycle[:0:-1]
        loops.append(Loop(tuple(cycle)))

    expected = len(graph.edges) - graph.n + 1
    if len(loops) != expected:
        logger.warning("Found %d primitive loops in %s, Euler count is %d", len(loops), graph.name, expected)
    return sorted(loops, key=lambda loop: loop.vertices)
