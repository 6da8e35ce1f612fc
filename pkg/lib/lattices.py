"""
Lattice builders.

Every builder places qubits on 2D points, numbers them row-major (top row
first, left to right) and returns a connected planar NetworkGraph with those
points as coordinates.
"""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Mapping, Tuple, Union

from .network import NetworkGraph, check_planar_connected
from .validators import ValidationError, validate_file_path, validate_positive_int

logger = logging.getLogger(__name__)

Point = Tuple[int, int]

LATTICE_KINDS = ("chain", "heavy-hex", "rotated-square", "custom-adjacency", "preset")


def _from_points(points: Iterable[Point], links: Iterable[Tuple[Point, Point]], name: str) -> NetworkGraph:
    ordered = sorted(set(points), key=lambda p: (-p[1], p[0]))
    numbering = {p: i for i, p in enumerate(ordered)}
    edges = []
    for a, b in links:
        if a not in numbering or b not in numbering:
            raise ValidationError(f"Lattice link {a}-{b} references a missing site")
        edges.append((numbering[a], numbering[b]))
    graph = NetworkGraph(n=len(ordered), edges=tuple(edges), coords=tuple(ordered), name=name)
    return check_planar_connected(graph)


def chain(n: int) -> NetworkGraph:
    n = validate_positive_int(n, "n")
    points = [(x, 0) for x in range(n)]
    return _from_points(points, [((x, 0), (x + 1, 0)) for x in range(n - 1)], f"chain_{n}")


def rotated_square(rows: int, cols: int) -> NetworkGraph:
    """Square grid drawn axis-aligned: site (r, c) sits at (c, -r)."""
    rows = validate_positive_int(rows, "rows")
    cols = validate_positive_int(cols, "cols")
    points = [(c, -r) for r in range(rows) for c in range(cols)]
    links = [((c, -r), (c + 1, -r)) for r in range(rows) for c in range(cols - 1)]
    links += [((c, -r), (c, -r - 1)) for r in range(rows - 1) for c in range(cols)]
    return _from_points(points, links, f"rotated_square_{rows}x{cols}")


def heavy_hex(rows: int, cols: int) -> NetworkGraph:
    """
    Heavy-hex patch of rows x cols hexagonal cells.

    Horizontal qubit lines sit at y = 0, -2, ..., -2*rows. The cell row between
    lines i and i+1 is held by bridge qubits at y = -2i-1, every fourth column,
    offset by two on odd cell rows. Each cell is a 12-qubit loop; a 1x1 patch
    has 12 qubits and a 5x5 patch has 164.
    """
    rows = validate_positive_int(rows, "rows")
    cols = validate_positive_int(cols, "cols")

    def pair_range(p: int) -> Tuple[int, int]:
        offset = 0 if p % 2 == 0 else 2
        return offset, offset + 4 * cols

    points: List[Point] = []
    links: List[Tuple[Point, Point]] = []
    for line in range(rows + 1):
        spans = [pair_range(p) for p in (line - 1, line) if 0 <= p < rows]
        start, stop = min(s for s, _ in spans), max(e for _, e in spans)
        y = -2 * line
        points += [(x, y) for x in range(start, stop + 1)]
        links += [((x, y), (x + 1, y)) for x in range(start, stop)]
    for p in range(rows):
        start, stop = pair_range(p)
        y = -2 * p - 1
        for x in range(start, stop + 1, 4):
            points.append((x, y))
            links += [((x, y), (x, y + 1)), ((x, y), (x, y - 1))]
    return _from_points(points, links, f"heavy_hex_{rows}x{cols}")


def heavy_hex_ladder(length: int) -> NetworkGraph:
    """Two qubit chains joined by a bridge qubit every fourth site."""
    length = validate_positive_int(length, "length")
    points = [(x, y) for y in (0, -2) for x in range(length)]
    links = [((x, y), (x + 1, y)) for y in (0, -2) for x in range(length - 1)]
    for x in range(0, length, 4):
        points.append((x, -1))
        links += [((x, -1), (x, 0)), ((x, -1), (x, -2))]
    return _from_points(points, links, f"heavy_hex_ladder_{length}")


def diamond_grid(columns: int, rows: int) -> NetworkGraph:
    """
    Square lattice drawn rotated by 45 degrees.

    Drawn column i holds `rows` qubits at y = -(2j + i % 2); each qubit couples
    to the qubits one unit above and below in the neighbouring columns.
    """
    columns = validate_positive_int(columns, "columns")
    rows = validate_positive_int(rows, "rows")
    points = [(i, -(2 * j + i % 2)) for i in range(columns) for j in range(rows)]
    present = set(points)
    links = []
    for x, y in points:
        for dy in (1, -1):
            other = (x + 1, y + dy)
            if other in present:
                links.append(((x, y), other))
    return _from_points(points, links, f"diamond_{columns}x{rows}")


# Best-effort reconstructions of published device layouts.
PRESETS: Dict[str, Callable[[], NetworkGraph]] = {
    "heavyhex_164": lambda: heavy_hex(5, 5),
    "willow_105": lambda: diamond_grid(15, 7),
    "n2_52": lambda: heavy_hex_ladder(23),
    "fe4s4_72": lambda: heavy_hex_ladder(32),
}


def preset(name: str) -> NetworkGraph:
    if name not in PRESETS:
        raise ValidationError(f"Unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    graph = PRESETS[name]()
    return NetworkGraph(n=graph.n, edges=graph.edges, coords=graph.coords, name=name)


def from_adjacency(data: Union[Mapping[str, Any], str, Path]) -> NetworkGraph:
    """
    Graph from an adjacency description.

    Accepts the graph JSON schema (``n``/``edges``/``coords``) or a mapping
    ``{"adjacency": {"0": [1, 2], ...}}``, either inline or as a file path.
    """
    name = "custom"
    if isinstance(data, (str, Path)):
        path = validate_file_path(data, must_exist=True)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
        name = path.stem

    if "adjacency" in data:
        adjacency = {int(k): [int(w) for w in ws] for k, ws in data["adjacency"].items()}
        n = int(data.get("n", max(adjacency, default=-1) + 1))
        edges = sorted({(min(v, w), max(v, w)) for v, ws in adjacency.items() for w in ws})
        graph = NetworkGraph(n=n, edges=tuple(edges), coords=None, name=name)
        if data.get("coords") is not None:
            graph = NetworkGraph(n=n, edges=graph.edges, coords=tuple(map(tuple, data["coords"])), name=name)
    else:
        graph = NetworkGraph.from_dict({"name": name, **data})
    return check_planar_connected(graph)


def build_lattice(kind: str, params: Mapping[str, Any]) -> NetworkGraph:
    """
    Build one of the supported lattices.

    Args:
        kind: chain, heavy-hex, rotated-square, custom-adjacency or preset
        params: n (chain); rows and cols (grids, heavy-hex cells);
            adjacency (custom, inline mapping or file path); name (preset)

    Returns:
        Connected planar NetworkGraph

    Raises:
        ValidationError: Unknown kind or invalid dimensions
        PlanarityError: Non-planar custom adjacency
    """
    if kind == "chain":
        graph = chain(params.get("n", 0))
    elif kind == "heavy-hex":
        graph = heavy_hex(params.get("rows", 0), params.get("cols", 0))
    elif kind == "rotated-square":
        graph = rotated_square(params.get("rows", 0), params.get("cols", 0))
    elif kind == "custom-adjacency":
        if "adjacency" not in params:
            raise ValidationError("custom-adjacency needs an 'adjacency' parameter")
        graph = from_adjacency(params["adjacency"])
    elif kind == "preset":
        graph = preset(str(params.get("name", "")))
    else:
        raise ValidationError(f"Unknown lattice kind {kind!r}; choose from {', '.join(LATTICE_KINDS)}")

    logger.debug(
        "Built %s: %d qubits, %d edges, z=%d", graph.name, graph.n, len(graph.edges), graph.coordination_number
    )
    return graph
