"""
Gate application on tensor network states.

One-site gates are exact. Two-site gates are applied with the
message-gauged SVD: the square roots of the BP messages entering the pair
are absorbed into the two site tensors, the gate acts on the joined pair,
the result is split by a truncated SVD, and the roots are removed again.
The discarded squared singular weight of that split is the gate error.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .belief_propagation import (
    DEFAULT_BP_MAX_ITERS,
    DEFAULT_BP_TOL,
    MessageEnvironment,
    initial_environment,
    run_bp,
)
from .circuit import Circuit, CircuitError, Gate
from .network import TensorNetworkState, bond_label, bra, physical_label
from .tensor_core import DEFAULT_SVD_CUTOFF, IndexedTensor, contract, psd_roots, svd_truncate
from .validators import ValidationError

logger = logging.getLogger(__name__)

BP_POLICIES = ("per-layer", "per-gate", "never")

# Kept Schmidt modes carry weight above the SVD cutoff, so ungauging with a
# smaller regularization never projects them out.
DEFAULT_GAUGE_REG_CUTOFF = DEFAULT_SVD_CUTOFF * 1e-2

LayerCallback = Callable[[int, TensorNetworkState, Optional[MessageEnvironment]], None]


def apply_one_site(state: TensorNetworkState, gate: Gate) -> TensorNetworkState:
    """Apply a one-site gate exactly; bond dimensions are unchanged."""
    if gate.arity != 1:
        raise CircuitError(f"{gate.kind} is not a one-site gate")
    (v,) = gate.sites
    if not 0 <= v < state.n_qubits:
        raise CircuitError(f"Site {v} outside 0..{state.n_qubits - 1}")
    phys = physical_label(v)
    operator = IndexedTensor.from_array([phys + "#out", phys], gate.tensor())
    updated = contract(operator, state.tensor(v)).relabel({phys + "#out": phys})
    return state.replace({v: updated})


def _gauge(tensor: IndexedTensor, matrix: IndexedTensor, label: str) -> IndexedTensor:
    # matrix carries (label, label*); the leg comes back under its own name
    return contract(tensor, matrix).relabel({bra(label): label})


@dataclass(frozen=True)
class GateUpdate:
    state: TensorNetworkState
    env: MessageEnvironment
    error: float
    kept_rank: int
    exact_rank: int
    regularized_modes: int


def apply_two_site(
    state: TensorNetworkState,
    env: MessageEnvironment,
    gate: Gate,
    max_rank: int,
    cutoff: float = DEFAULT_SVD_CUTOFF,
    reg_cutoff: float = DEFAULT_GAUGE_REG_CUTOFF,
) -> GateUpdate:
    """
    Apply a two-site gate on a graph edge with a message-gauged truncated SVD.

    Args:
        state: Current state
        env: BP messages (may be stale from the last refresh)
        gate: Two-site gate on an edge of the graph
        max_rank: Bond dimension cap chi
        cutoff: SVD cutoff on normalized squared singular values
        reg_cutoff: Relative eigenvalue cutoff for the inverse message roots

    Returns:
        GateUpdate with the new state, the environment with this edge's
        messages replaced by the kept singular values, and the gate error
    """
    if gate.arity != 2:
        raise CircuitError(f"{gate.kind} is not a two-site gate")
    u, v = gate.sites
    graph = state.graph
    if not graph.has_edge(u, v):
        raise CircuitError(f"{gate.kind} on ({u}, {v}) is not on a graph edge")

    shared = bond_label(u, v)
    regularized = 0
    tensors = {}
    inverse_roots: Dict[int, List[Tuple[str, IndexedTensor]]] = {}
    for site, partner in ((u, v), (v, u)):
        tensor = state.tensor(site)
        inverse_roots[site] = []
        for w in graph.neighbors(site):
            if w == partner:
                continue
            label = bond_label(site, w)
            roots = psd_roots(env.message(w, site), [label], [bra(label)], reg_cutoff)
            if roots.dropped:
                logger.warning("Regularized %d mode(s) of message %d->%d", roots.dropped, w, site)
            regularized += roots.dropped
            tensor = _gauge(tensor, roots.sqrt, label)
            inverse_roots[site].append((label, roots.inv_sqrt))
        tensors[site] = tensor

    pu, pv = physical_label(u), physical_label(v)
    operator = IndexedTensor.from_array([pu + "#out", pv + "#out", pu, pv], gate.tensor())
    theta = contract(contract(tensors[u], tensors[v]), operator).relabel({pu + "#out": pu, pv + "#out": pv})

    left_labels = [label for label in tensors[u].labels if label != shared]
    result = svd_truncate(theta, left_labels, max_rank, cutoff, bond_label=shared, absorb="both")

    new_u, new_v = result.left, result.right
    for label, inverse in inverse_roots[u]:
        new_u = _gauge(new_u, inverse, label)
    for label, inverse in inverse_roots[v]:
        new_v = _gauge(new_v, inverse, label)

    kept = result.singular_values[: result.kept_rank]
    weights = kept / np.linalg.norm(kept)
    message = IndexedTensor.from_array([shared, bra(shared)], np.diag(weights))
    new_env = env.with_edge_messages(u, v, message, message)

    return GateUpdate(
        state=state.replace({u: new_u, v: new_v}),
        env=new_env,
        error=result.discarded_weight,
        kept_rank=result.kept_rank,
        exact_rank=result.exact_rank,
        regularized_modes=regularized,
    )


@dataclass(frozen=True)
class GateRecord:
    index: int
    layer: int
    kind: str
    sites: Tuple[int, ...]
    error: float
    kept_rank: int
    exact_rank: int
    regularized_modes: int
    fidelity: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "layer": self.layer,
            "kind": self.kind,
            "sites": list(self.sites),
            "error": self.error,
            "kept_rank": self.kept_rank,
            "exact_rank": self.exact_rank,
            "regularized_modes": self.regularized_modes,
            "fidelity": self.fidelity,
        }


@dataclass(frozen=True)
class BPRefresh:
    layer: int
    gate_index: int
    iterations: int
    residual: float
    converged: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layer": self.layer,
            "gate_index": self.gate_index,
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
        }


@dataclass
class GateLog:
    """Per-gate errors and the running fidelity estimate f = prod(1 - eps_i)."""

    records: List[GateRecord] = field(default_factory=list)
    refreshes: List[BPRefresh] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def fidelity(self) -> float:
        return self.records[-1].fidelity if self.records else 1.0

    @property
    def max_error(self) -> float:
        return max((r.error for r in self.records), default=0.0)

    def record(self, gate: Gate, layer: int, error: float, kept: int, exact: int, regularized: int = 0) -> GateRecord:
        entry = GateRecord(
            index=len(self.records),
            layer=layer,
            kind=gate.kind,
            sites=gate.sites,
            error=error,
            kept_rank=kept,
            exact_rank=exact,
            regularized_modes=regularized,
            fidelity=self.fidelity * (1.0 - error),
        )
        self.records.append(entry)
        return entry

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fidelity": self.fidelity,
            "max_error": self.max_error,
            "n_gates": len(self.records),
            "n_bp_refreshes": len(self.refreshes),
            "wall_time_seconds": self.wall_time,
            "gates": [r.to_dict() for r in self.records],
            "bp_refreshes": [r.to_dict() for r in self.refreshes],
        }


def run_circuit(
    state: TensorNetworkState,
    circuit: Circuit,
    chi: int,
    cutoff: float = DEFAULT_SVD_CUTOFF,
    bp_policy: str = "per-layer",
    bp_tol: float = DEFAULT_BP_TOL,
    bp_max_iters: int = DEFAULT_BP_MAX_ITERS,
    bp_schedule: str = "synchronous",
    reg_cutoff: float = DEFAULT_GAUGE_REG_CUTOFF,
    env: Optional[MessageEnvironment] = None,
    callback: Optional[LayerCallback] = None,
    workers: int = 1,
) -> Tuple[TensorNetworkState, GateLog]:
    """
    Apply a circuit layer by layer.

    BP is re-converged before every layer holding a two-site gate
    ("per-layer"), before every two-site gate ("per-gate"), or only once at
    the start ("never"). Non-converged BP is logged and the run continues.

    Args:
        callback: Called as callback(layer_index, state, env) after each layer

    Returns:
        (final state, GateLog)
    """
    if bp_policy not in BP_POLICIES:
        raise ValidationError(f"Unknown bp policy {bp_policy!r}; choose from {', '.join(BP_POLICIES)}")
    if chi < 1:
        raise ValidationError(f"chi must be >= 1, got {chi}")
    circuit.validate_for(state.graph)

    started = time.perf_counter()
    log = GateLog()

    def refresh(current: TensorNetworkState, layer: int, previous: Optional[MessageEnvironment]) -> MessageEnvironment:
        fresh = run_bp(current, bp_tol, bp_max_iters, bp_schedule, initial=previous, workers=workers)
        log.refreshes.append(BPRefresh(layer, len(log.records), fresh.iterations, fresh.residual, fresh.converged))
        if not fresh.converged:
            logger.warning("BP refresh before layer %d did not converge; continuing with its messages", layer)
        return fresh

    if env is None or not env.is_compatible(state):
        env = refresh(state, 0, None) if bp_policy == "never" else initial_environment(state)

    for layer_index, layer in enumerate(circuit.layers):
        has_two_site = any(gate.arity == 2 for gate in layer)
        if bp_policy == "per-layer" and has_two_site:
            env = refresh(state, layer_index, env)
        for gate in layer:
            if gate.arity == 1:
                state = apply_one_site(state, gate)
                log.record(gate, layer_index, 0.0, 0, 0)
                continue
            if bp_policy == "per-gate":
                env = refresh(state, layer_index, env)
            update = apply_two_site(state, env, gate, chi, cutoff, reg_cutoff)
            state, env = update.state, update.env
            log.record(gate, layer_index, update.error, update.kept_rank, update.exact_rank, update.regularized_modes)
        logger.debug(
            "Layer %d/%d done: f=%.12f, max bond %d", layer_index + 1, circuit.depth, log.fidelity,
            state.max_bond_dimension(),
        )
        if callback is not None:
            callback(layer_index, state, env)

    log.wall_time = time.perf_counter() - started
    logger.info(
        "Applied %d gates in %d layers: f=%.12f, max bond dimension %d",
        circuit.num_gates, circuit.depth, log.fidelity, state.max_bond_dimension(),
    )
    return state, log
