"""
Belief propagation on the norm network <psi|psi>.

A message m[u->v] is a matrix on the (ket, bra) pair of the virtual index of
edge (u, v): the contraction of everything on u's side of the edge when the
rest of the network is replaced by incoming messages. Messages are kept
Hermitian, positive and of unit Frobenius norm.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .network import Edge, Loop, TensorNetworkState, bond_label, bra, bra_tensor, edge_key, primitive_loops
from .tensor_core import IndexedTensor, contract, eig_full
from .validators import ValidationError

logger = logging.getLogger(__name__)

DEFAULT_BP_TOL = 1e-10
DEFAULT_BP_MAX_ITERS = 200
SCHEDULES = ("synchronous", "sequential")

DirectedEdge = Tuple[int, int]


def identity_message(dimension: int, label: str) -> IndexedTensor:
    return IndexedTensor.from_array([label, bra(label)], np.eye(dimension) / np.sqrt(dimension))


@dataclass(frozen=True)
class MessageEnvironment:
    """
    Messages for every directed edge, plus convergence bookkeeping.

    ``messages[(u, v)]`` is the message sent from u to v.
    """

    messages: Mapping[DirectedEdge, IndexedTensor]
    converged: bool = False
    iterations: int = 0
    residual: float = float("inf")

    def message(self, source: int, target: int) -> IndexedTensor:
        return self.messages[(source, target)]

    def with_edge_messages(
        self, u: int, v: int, m_uv: IndexedTensor, m_vu: IndexedTensor
    ) -> "MessageEnvironment":
        messages = dict(self.messages)
        messages[(u, v)] = m_uv
        messages[(v, u)] = m_vu
        return MessageEnvironment(messages, self.converged, self.iterations, self.residual)

    def is_compatible(self, state: TensorNetworkState) -> bool:
        """True when every message matches the current bond dimensions."""
        for u, v in state.graph.edges:
            dim = state.bond_dimension(u, v)
            for key in ((u, v), (v, u)):
                message = self.messages.get(key)
                if message is None or message.shape != (dim, dim):
                    return False
        return True


def initial_environment(state: TensorNetworkState) -> MessageEnvironment:
    """Normalized identity messages on every directed edge."""
    messages = {}
    for u, v in state.graph.edges:
        label = bond_label(u, v)
        message = identity_message(state.bond_dimension(u, v), label)
        messages[(u, v)] = message
        messages[(v, u)] = message
    return MessageEnvironment(messages)


def _absorb_messages(
    state: TensorNetworkState, env: MessageEnvironment, v: int, exclude: Sequence[int] = ()
) -> IndexedTensor:
    """Ket tensor of v with incoming messages from all neighbours not in exclude."""
    tensor = state.tensor(v)
    for w in state.graph.neighbors(v):
        if w not in exclude:
            tensor = contract(tensor, env.message(w, v))
    return tensor


def _normalize_message(matrix: np.ndarray) -> Optional[np.ndarray]:
    matrix = 0.5 * (matrix + matrix.conj().T)
    trace = np.trace(matrix).real
    if trace < 0:
        matrix = -matrix
    norm = np.linalg.norm(matrix)
    if norm == 0.0:
        return None
    return matrix / norm


def _update_message(state: TensorNetworkState, env: MessageEnvironment, u: int, v: int) -> IndexedTensor:
    label = bond_label(u, v)
    local = contract(_absorb_messages(state, env, u, exclude=(v,)), bra_tensor(state, u))
    matrix = _normalize_message(local.to_matrix([label], [bra(label)]))
    if matrix is None:
        logger.warning("Message %d->%d vanished; keeping the previous one", u, v)
        return env.message(u, v)
    return IndexedTensor.from_array([label, bra(label)], matrix)


def run_bp(
    state: TensorNetworkState,
    tol: float = DEFAULT_BP_TOL,
    max_iters: int = DEFAULT_BP_MAX_ITERS,
    schedule: str = "synchronous",
    initial: Optional[MessageEnvironment] = None,
    workers: int = 1,
) -> MessageEnvironment:
    """
    Iterate message updates to a fixed point.

    Args:
        state: Tensor network state
        tol: Stop when no message moves by more than this (Frobenius distance)
        max_iters: Maximum number of sweeps
        schedule: "synchronous" (all messages from the previous sweep) or
            "sequential" (each update sees the newest messages)
        initial: Warm-start environment; ignored if its dimensions no longer match
        workers: Threads for synchronous sweeps

    Returns:
        MessageEnvironment; converged is False when max_iters was exhausted
    """
    if schedule not in SCHEDULES:
        raise ValidationError(f"Unknown BP schedule {schedule!r}; choose from {', '.join(SCHEDULES)}")
    if max_iters < 1:
        raise ValidationError("bp max_iters must be >= 1")

    if initial is not None and initial.is_compatible(state):
        env = MessageEnvironment(dict(initial.messages))
    else:
        env = initial_environment(state)

    keys = sorted(env.messages)
    if not keys:
        return MessageEnvironment({}, converged=True, iterations=0, residual=0.0)

    residual = float("inf")
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 and schedule == "synchronous" else None
    try:
        for iteration in range(1, max_iters + 1):
            old = env.messages
            if schedule == "synchronous":
                if pool is not None:
                    updated = list(pool.map(lambda key: _update_message(state, env, *key), keys))
                else:
                    updated = [_update_message(state, env, *key) for key in keys]
                new = dict(zip(keys, updated))
                env = MessageEnvironment(new)
            else:
                new = dict(old)
                for key in keys:
                    new[key] = _update_message(state, MessageEnvironment(new), *key)
                env = MessageEnvironment(new)

            residual = max(float(np.linalg.norm(new[k].data - old[k].data)) for k in keys)
            logger.debug("BP sweep %d: residual %.3e", iteration, residual)
            if residual <= tol:
                return MessageEnvironment(new, converged=True, iterations=iteration, residual=residual)
    finally:
        if pool is not None:
            pool.shutdown()

    logger.warning("BP did not converge in %d sweeps (residual %.3e > %.1e)", max_iters, residual, tol)
    return MessageEnvironment(env.messages, converged=False, iterations=max_iters, residual=residual)


@dataclass(frozen=True)
class BPNormResult:
    value: float
    converged: bool
    imaginary_residue: float = 0.0

    def __float__(self) -> float:
        return self.value


def bp_norm(state: TensorNetworkState, env: MessageEnvironment) -> BPNormResult:
    """
    BP estimate of <psi|psi>: product of vertex contractions over product of
    edge contractions. Exact on trees.
    """
    if not env.converged:
        logger.warning("bp_norm evaluated on a non-converged environment")

    log_magnitude = 0.0
    phase = 1.0 + 0.0j
    for v in range(state.n_qubits):
        z_v = contract(_absorb_messages(state, env, v), bra_tensor(state, v)).item()
        log_magnitude += np.log(abs(z_v)) if z_v != 0 else -np.inf
        phase *= z_v / abs(z_v) if z_v != 0 else 1.0
    for u, v in state.graph.edges:
        z_e = contract(env.message(u, v), env.message(v, u)).item()
        if z_e == 0:
            raise ZeroDivisionError(f"Edge normalization vanished on ({u}, {v})")
        log_magnitude -= np.log(abs(z_e))
        phase /= z_e / abs(z_e)

    value = float(np.exp(log_magnitude)) * phase
    residue = abs(value.imag)
    if residue > 1e-10 * max(1.0, abs(value)):
        logger.warning("bp_norm has imaginary residue %.3e", residue)
    return BPNormResult(value=float(value.real), converged=env.converged, imaginary_residue=residue)


@dataclass(frozen=True)
class LoopError:
    loop_id: int
    vertices: Tuple[int, ...]
    cut_edge: Edge
    error: float
    spectrum_size: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "loop_id": self.loop_id,
            "vertices": list(self.vertices),
            "cut_edge": list(self.cut_edge),
            "error": self.error,
        }


@dataclass(frozen=True)
class LoopErrorReport:
    per_loop: Tuple[LoopError, ...] = field(default_factory=tuple)

    @property
    def mean_error(self) -> float:
        if not self.per_loop:
            return 0.0
        return float(np.mean([loop.error for loop in self.per_loop]))

    @property
    def max_error(self) -> float:
        return max((loop.error for loop in self.per_loop), default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_loops": len(self.per_loop),
            "mean_error": self.mean_error,
            "max_error": self.max_error,
            "per_loop": [loop.to_dict() for loop in self.per_loop],
        }


def _rotate_to_cut(loop: Loop) -> Tuple[List[int], Edge]:
    """Rotate the cycle so that the cut edge joins its last and first vertex."""
    cut = min(loop.edges)
    cycle = list(loop.vertices)
    size = len(cycle)
    for i in range(size):
        if edge_key(cycle[i], cycle[(i + 1) % size]) == cut:
            start = (i + 1) % size
            return cycle[start:] + cycle[:start], cut
    raise ValueError(f"Cut edge {cut} not on loop {loop.vertices}")


def loop_transfer_matrix(
    state: TensorNetworkState, env: MessageEnvironment, loop: Loop
) -> Tuple[IndexedTensor, List[str], List[str]]:
    """
    Norm network of one loop with BP messages on every leg leaving the loop,
    opened on its cut edge. Returns the tensor and its (row, column) labels.
    """
    cycle, cut = _rotate_to_cut(loop)
    cut_label = bond_label(*cut)
    row = [cut_label + "#in", bra(cut_label) + "#in"]
    col = [cut_label, bra(cut_label)]

    size = len(cycle)
    transfer: Optional[IndexedTensor] = None
    for j, v in enumerate(cycle):
        loop_neighbours = (cycle[j - 1], cycle[(j + 1) % size])
        ket = _absorb_messages(state, env, v, exclude=loop_neighbours)
        local = contract(ket, bra_tensor(state, v))
        if j == 0:
            local = local.relabel({cut_label: row[0], bra(cut_label): row[1]})
        transfer = local if transfer is None else contract(transfer, local)
    return transfer, row, col


def loop_error(
    state: TensorNetworkState,
    env: MessageEnvironment,
    loops: Optional[Sequence[Loop]] = None,
) -> LoopErrorReport:
    """
    Per-loop BP error: 1 - |lambda_1| / sum_i |lambda_i| over the spectrum of
    each primitive loop's transfer matrix.
    """
    if not env.converged:
        logger.warning("loop_error evaluated on a non-converged environment")
    if loops is None:
        loops = primitive_loops(state.graph)

    results = []
    for loop_id, loop in enumerate(loops):
        transfer, row, col = loop_transfer_matrix(state, env, loop)
        spectrum = np.abs(eig_full(transfer, row, col))
        total = float(np.sum(spectrum))
        if total == 0.0:
            logger.warning("Transfer matrix of loop %d vanished; reporting zero error", loop_id)
            error = 0.0
        else:
            error = max(0.0, 1.0 - float(spectrum[0]) / total)
        _, cut = _rotate_to_cut(loop)
        results.append(LoopError(loop_id, loop.vertices, cut, error, int(spectrum.size)))
        logger.debug("Loop %d (%d sites): BP error %.3e", loop_id, len(loop), error)

    return LoopErrorReport(tuple(results))
