"""
Closed-form gate matrices.

Two-site matrices here are in kron order: basis index 2*x_first + x_second,
where first/second follow the gate's site list. Circuit files use the
opposite (little-endian) order; see circuit.Gate for the conversion.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Sequence

import numpy as np
import scipy.linalg

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

XX = np.kron(X, X)
YY = np.kron(Y, Y)
ZZ = np.kron(Z, Z)


def _rotation(pauli: np.ndarray) -> Callable[[Sequence[float]], np.ndarray]:
    def build(params: Sequence[float]) -> np.ndarray:
        theta = params[0]
        return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * pauli

    return build


def _phase(params: Sequence[float]) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * params[0])]).astype(np.complex128)


def _controlled_phase(params: Sequence[float]) -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, np.exp(1j * params[0])]).astype(np.complex128)


def _xx_plus_yy(params: Sequence[float]) -> np.ndarray:
    return scipy.linalg.expm(-1j * params[0] / 4 * (XX + YY))


def _heisenberg(params: Sequence[float]) -> np.ndarray:
    coupling, dt = params
    return scipy.linalg.expm(-1j * dt * coupling * (XX + YY + ZZ))


def _fixed(matrix: np.ndarray) -> Callable[[Sequence[float]], np.ndarray]:
    return lambda params: matrix


@dataclass(frozen=True)
class GateSpec:
    name: str
    arity: int
    n_params: int
    build: Callable[[Sequence[float]], np.ndarray]


_SPECS = [
    GateSpec("I", 1, 0, _fixed(I2)),
    GateSpec("X", 1, 0, _fixed(X)),
    GateSpec("Y", 1, 0, _fixed(Y)),
    GateSpec("Z", 1, 0, _fixed(Z)),
    GateSpec("H", 1, 0, _fixed(H)),
    GateSpec("S", 1, 0, _fixed(np.diag([1, 1j]).astype(np.complex128))),
    GateSpec("T", 1, 0, _fixed(np.diag([1, np.exp(1j * np.pi / 4)]).astype(np.complex128))),
    GateSpec("Rx", 1, 1, _rotation(X)),
    GateSpec("Ry", 1, 1, _rotation(Y)),
    GateSpec("Rz", 1, 1, _rotation(Z)),
    GateSpec("P", 1, 1, _phase),
    GateSpec("CP", 2, 1, _controlled_phase),
    GateSpec("XXPlusYY", 2, 1, _xx_plus_yy),
    GateSpec("Heisenberg", 2, 2, _heisenberg),
    GateSpec(
        "CNOT", 2, 0, _fixed(np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128))
    ),
    GateSpec("CZ", 2, 0, _fixed(np.diag([1, 1, 1, -1]).astype(np.complex128))),
    GateSpec(
        "SWAP", 2, 0, _fixed(np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128))
    ),
]

GATE_SPECS: Dict[str, GateSpec] = {spec.name: spec for spec in _SPECS}

_ALIASES = {spec.name.lower(): spec.name for spec in _SPECS}
_ALIASES.update({"phase": "P", "cx": "CNOT", "xx+yy": "XXPlusYY", "cphase": "CP", "id": "I"})


def canonical_name(name: str) -> str:
    """Case-insensitive gate lookup; raises KeyError for unknown names."""
    return _ALIASES[name.strip().lower()]


def named_gate_matrix(name: str, params: Sequence[float] = ()) -> np.ndarray:
    spec = GATE_SPECS[canonical_name(name)]
    if len(params) != spec.n_params:
        raise ValueError(f"Gate {spec.name} takes {spec.n_params} parameter(s), got {len(params)}")
    return np.asarray(spec.build([float(p) for p in params]), dtype=np.complex128)


def is_unitary(matrix: np.ndarray, tol: float = 1e-12) -> bool:
    matrix = np.asarray(matrix)
    identity = np.eye(matrix.shape[0])
    return bool(np.max(np.abs(matrix.conj().T @ matrix - identity)) <= tol)
