"""
Circuits: layers of non-overlapping gates, and their JSON format.

Circuit JSON::

    {"n": 4,
     "layers": [[{"kind": "Heisenberg", "sites": [0, 1], "params": [1.0, 0.1]}, ...], ...]}

A flat ``"gates": [...]`` list is accepted instead of ``layers`` and is packed
greedily into layers. Raw gates carry ``"matrix"``: 4 (one-site) or 16
(two-site) ``[re, im]`` pairs in row-major order, or the same as nested rows.
Two-site raw matrices are little-endian: basis index x_{sites[0]} + 2*x_{sites[1]}.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .gates import GATE_SPECS, Z, canonical_name, is_unitary, named_gate_matrix
from .network import NetworkGraph
from .validators import ValidationError, validate_file_path

logger = logging.getLogger(__name__)

UNITARY_TOL = 1e-12
RAW = "raw"


class CircuitError(ValidationError):
    """Invalid gate or circuit; message carries the layer/gate position."""


def _little_to_kron(matrix: np.ndarray) -> np.ndarray:
    """Swap the qubit order of a two-site matrix (the map is its own inverse)."""
    return matrix.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)


@dataclass(frozen=True)
class Gate:
    """
    A named or raw gate on one or two sites.

    For raw gates ``matrix`` holds the row-major entries in the file
    convention (little-endian for two sites).
    """

    kind: str
    sites: Tuple[int, ...]
    params: Tuple[float, ...] = ()
    matrix: Optional[Tuple[complex, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.sites) not in (1, 2):
            raise CircuitError(f"Gate acts on {len(self.sites)} sites; only 1 or 2 supported")
        if len(set(self.sites)) != len(self.sites):
            raise CircuitError(f"Gate sites {self.sites} repeat a qubit")

        if self.kind.lower() == RAW:
            object.__setattr__(self, "kind", RAW)
            if self.matrix is None:
                raise CircuitError("Raw gate without a matrix")
            entries = tuple(complex(x) for x in self.matrix)
            if len(entries) != 4 ** len(self.sites):
                raise CircuitError(f"Raw gate on {len(self.sites)} site(s) needs {4 ** len(self.sites)} entries")
            object.__setattr__(self, "matrix", entries)
        else:
            try:
                name = canonical_name(self.kind)
            except KeyError:
                raise CircuitError(f"Unknown gate kind {self.kind!r}") from None
            spec = GATE_SPECS[name]
            if spec.arity != len(self.sites):
                raise CircuitError(f"Gate {name} acts on {spec.arity} site(s), got sites {self.sites}")
            if spec.n_params != len(self.params):
                raise CircuitError(f"Gate {name} takes {spec.n_params} parameter(s), got {len(self.params)}")
            object.__setattr__(self, "kind", name)

        if not is_unitary(self.unitary(), UNITARY_TOL):
            raise CircuitError(f"Gate {self.kind} on {self.sites} is not unitary within {UNITARY_TOL}")

    @property
    def arity(self) -> int:
        return len(self.sites)

    def unitary(self) -> np.ndarray:
        """Matrix in kron order of the site list (first site most significant)."""
        if self.kind == RAW:
            dim = 2 ** self.arity
            matrix = np.asarray(self.matrix, dtype=np.complex128).reshape(dim, dim)
            return _little_to_kron(matrix) if self.arity == 2 else matrix
        return named_gate_matrix(self.kind, self.params)

    def file_matrix(self) -> np.ndarray:
        """Matrix in the circuit-file convention."""
        matrix = self.unitary()
        return _little_to_kron(matrix) if self.arity == 2 else matrix

    def tensor(self) -> np.ndarray:
        """(out, in) for one site, (out_first, out_second, in_first, in_second) for two."""
        return self.unitary().reshape((2,) * (2 * self.arity))

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "sites": list(self.sites)}
        if self.kind == RAW:
            data["matrix"] = [[z.real, z.imag] for z in self.matrix]
        elif self.params:
            data["params"] = list(self.params)
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Gate":
        if not isinstance(data, Mapping) or "kind" not in data or "sites" not in data:
            raise CircuitError("Gate entries need 'kind' and 'sites'")
        matrix = None
        if "matrix" in data:
            matrix = _parse_matrix(data["matrix"])
        return cls(kind=str(data["kind"]), sites=tuple(data["sites"]), params=tuple(data.get("params", ())), matrix=matrix)


def _parse_matrix(raw: Any) -> Tuple[complex, ...]:
    array = np.asarray(raw, dtype=float)
    if array.shape[-1] != 2:
        raise CircuitError("Matrix entries must be [re, im] pairs")
    flat = array.reshape(-1, 2)
    return tuple(complex(re, im) for re, im in flat)


@dataclass(frozen=True)
class Circuit:
    """Ordered layers; gates inside a layer act on disjoint sites."""

    n: int
    layers: Tuple[Tuple[Gate, ...], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))
        for layer_index, layer in enumerate(self.layers):
            used = set()
            for gate_index, gate in enumerate(layer):
                for site in gate.sites:
                    if not 0 <= site < self.n:
                        raise CircuitError(
                            f"Layer {layer_index}, gate {gate_index}: site {site} outside 0..{self.n - 1}"
                        )
                    if site in used:
                        raise CircuitError(f"Layer {layer_index}, gate {gate_index}: site {site} already used in layer")
                    used.add(site)

    def gates(self) -> Iterator[Gate]:
        for layer in self.layers:
            yield from layer

    @property
    def num_gates(self) -> int:
        return sum(len(layer) for layer in self.layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def validate_for(self, graph: NetworkGraph) -> "Circuit":
        """
        Raises:
            CircuitError: On a qubit-count mismatch or a two-site gate off the graph edges
        """
        if self.n != graph.n:
            raise CircuitError(f"Circuit has {self.n} qubits, graph has {graph.n}")
        for layer_index, layer in enumerate(self.layers):
            for gate_index, gate in enumerate(layer):
                if gate.arity == 2 and not graph.has_edge(*gate.sites):
                    raise CircuitError(
                        f"Layer {layer_index}, gate {gate_index}: {gate.kind} on {gate.sites} is not on a graph edge"
                    )
        return self

    def conserves_magnetization(self, tol: float = 1e-10) -> bool:
        """True when every gate commutes with the total Z of its sites."""
        total_z_two = np.kron(Z, np.eye(2)) + np.kron(np.eye(2), Z)
        for gate in self.gates():
            matrix = gate.unitary()
            total_z = Z if gate.arity == 1 else total_z_two
            if np.max(np.abs(matrix @ total_z - total_z @ matrix)) > tol:
                return False
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "layers": [[gate.to_dict() for gate in layer] for layer in self.layers]}

    @classmethod
    def from_gates(cls, n: int, gates: Sequence[Gate]) -> "Circuit":
        """Pack gates in order: a gate joins the last layer if it is disjoint from it."""
        layers: List[List[Gate]] = []
        used: set = set()
        for gate in gates:
            if layers and used.isdisjoint(gate.sites):
                layers[-1].append(gate)
            else:
                layers.append([gate])
                used = set()
            used.update(gate.sites)
        return cls(n=n, layers=tuple(tuple(layer) for layer in layers))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Circuit":
        if not isinstance(data, Mapping) or "n" not in data:
            raise CircuitError("Circuit JSON needs an integer 'n'")
        try:
            n = int(data["n"])
        except (TypeError, ValueError):
            raise CircuitError(f"Circuit 'n' must be an integer, got {data['n']!r}") from None

        if "layers" in data:
            layers = []
            for layer_index, layer in enumerate(data["layers"]):
                gates = []
                for gate_index, entry in enumerate(layer):
                    try:
                        gates.append(Gate.from_dict(entry))
                    except CircuitError as e:
                        raise CircuitError(f"Layer {layer_index}, gate {gate_index}: {e}") from None
                layers.append(tuple(gates))
            return cls(n=n, layers=tuple(layers))

        gates = []
        for gate_index, entry in enumerate(data.get("gates", [])):
            try:
                gates.append(Gate.from_dict(entry))
            except CircuitError as e:
                raise CircuitError(f"Gate {gate_index}: {e}") from None
        return cls.from_gates(n, gates)


def load_circuit(path: Union[str, Path]) -> Circuit:
    """
    Read and validate a circuit file.

    Raises:
        CircuitError: Syntax errors (with line number), schema violations, non-unitary matrices
    """
    path = validate_file_path(path, must_exist=True)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CircuitError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    circuit = Circuit.from_dict(data)
    logger.debug("Loaded circuit %s: %d gates in %d layers", path.name, circuit.num_gates, circuit.depth)
    return circuit


def save_circuit(circuit: Circuit, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(circuit.to_dict(), indent=1) + "\n", encoding="utf-8")
    return path
