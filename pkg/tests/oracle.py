"""
Dense statevector reference for small networks (qubit 0 most significant)
"""

from typing import Optional, Sequence

import numpy as np

from lib.circuit import Circuit, Gate
from lib.network import NetworkGraph, TensorNetworkState, site_labels
from lib.observables import PauliString
from lib.tensor_core import IndexedTensor


def basis_vector(bits: Sequence[int]) -> np.ndarray:
    vector = np.zeros(2 ** len(bits), dtype=np.complex128)
    vector[basis_index(bits)] = 1.0
    return vector


def basis_index(bits: Sequence[int]) -> int:
    return int("".join(str(int(b)) for b in bits), 2)


def bits_of(index: int, n: int) -> tuple:
    return tuple(int(c) for c in format(index, f"0{n}b"))


def apply_gate(vector: np.ndarray, n: int, gate: Gate) -> np.ndarray:
    k = gate.arity
    sites = list(gate.sites)
    psi = np.tensordot(gate.tensor(), vector.reshape((2,) * n), axes=(list(range(k, 2 * k)), sites))
    return np.moveaxis(psi, list(range(k)), sites).reshape(-1)


def simulate(circuit: Circuit, bits: Sequence[int], vector: Optional[np.ndarray] = None) -> np.ndarray:
    psi = basis_vector(bits) if vector is None else vector
    for gate in circuit.gates():
        psi = apply_gate(psi, circuit.n, gate)
    return psi


def probabilities(vector: np.ndarray) -> np.ndarray:
    weights = np.abs(vector) ** 2
    return weights / weights.sum()


def expectation(vector: np.ndarray, observable: PauliString) -> float:
    n = int(np.log2(vector.size))
    psi = vector.reshape((2,) * n)
    for site, matrix in observable.matrices().items():
        psi = np.moveaxis(np.tensordot(matrix, psi, axes=([1], [site])), 0, site)
    return float((np.vdot(vector, psi.reshape(-1)) / np.vdot(vector, vector)).real)


def random_state(graph: NetworkGraph, bond_dim: int = 2, seed: int = 0) -> TensorNetworkState:
    """Site tensors with i.i.d. complex normal entries"""
    rng = np.random.default_rng(seed)
    tensors = []
    for v in range(graph.n):
        labels = site_labels(graph, v)
        shape = (2,) + (bond_dim,) * (len(labels) - 1)
        data = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        tensors.append(IndexedTensor.from_array(labels, data))
    return TensorNetworkState(graph, tuple(tensors))
