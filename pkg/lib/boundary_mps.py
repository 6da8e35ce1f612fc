"""
Boundary MPS contraction of line-partitioned networks.

A boundary MPS lives on the cut between groups c and c+1: one site per cut
edge (in Partitioning.cut_edges order). A norm MPS site carries the edge's
ket and bra labels, an amplitude MPS site only the ket label.

Passing a boundary MPS through a group is a fit: the group tensors (with the
incoming MPS attached) form an MPO-like strip, and the outgoing MPS of rank R
is obtained by a zip-up sweep of truncated SVDs, refined with one-site
variational sweeps when the zip-up had to truncate.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .network import Edge, TensorNetworkState, bond_label, bra, bra_tensor, physical_label
from .observables import PauliString
from .partitioning import Partitioning
from .tensor_core import (
    DEFAULT_SVD_CUTOFF,
    DegenerateSpectrumError,
    Index,
    IndexedTensor,
    contract,
    lq_split,
    qr_split,
    svd_truncate,
)
from .validators import ValidationError

logger = logging.getLogger(__name__)

DEFAULT_FIT_SWEEPS = 10
DEFAULT_FIT_TOL = 1e-12

_TMP = "#tmp"


@dataclass(frozen=True)
class BoundaryMPS:
    cut: int
    edges: Tuple[Edge, ...]
    tensors: Tuple[IndexedTensor, ...]
    bond_labels: Tuple[str, ...]
    open_labels: Tuple[Tuple[str, ...], ...]

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def max_rank(self) -> int:
        return max((self.tensors[k].dim(label) for k, label in enumerate(self.bond_labels)), default=1)

    def conj(self) -> "BoundaryMPS":
        """Complex conjugate with every label primed (ket legs become bra legs)."""
        tensors = tuple(t.conj().relabel({label: bra(label) for label in t.labels}) for t in self.tensors)
        return BoundaryMPS(
            cut=self.cut,
            edges=self.edges,
            tensors=tensors,
            bond_labels=tuple(bra(label) for label in self.bond_labels),
            open_labels=tuple(tuple(bra(label) for label in labels) for labels in self.open_labels),
        )


@dataclass(frozen=True)
class FitReport:
    sweeps: int = 0
    relative_change: float = 0.0
    truncated: bool = False
    discarded_weight: float = 0.0
    objective: float = 0.0
    restarted: bool = False
    history: Tuple[float, ...] = ()


@dataclass(frozen=True)
class PartitionOperator:
    """
    The tensors of one group, per vertex in group order.

    ``open_labels(edge)`` gives the labels a boundary MPS site carries for a
    cut edge of this group (ket only, or ket and bra).
    """

    partitioning: Partitioning
    group: int
    layers: Mapping[int, Tuple[IndexedTensor, ...]]
    doubled: bool

    @classmethod
    def norm(
        cls,
        state: TensorNetworkState,
        partitioning: Partitioning,
        group: int,
        operators: Optional[Mapping[int, np.ndarray]] = None,
    ) -> "PartitionOperator":
        """<psi|O|psi> strip; operators maps sites to 2x2 matrices applied to the ket."""
        operators = operators or {}
        layers = {}
        for v in partitioning.groups[group]:
            ket = state.tensor(v)
            if v in operators:
                phys = physical_label(v)
                op = IndexedTensor.from_array([phys + "#out", phys], operators[v])
                ket = contract(op, ket).relabel({phys + "#out": phys})
            layers[v] = (ket, bra_tensor(state, v))
        return cls(partitioning, group, layers, doubled=True)

    @classmethod
    def amplitude(
        cls, state: TensorNetworkState, partitioning: Partitioning, group: int, bits: Sequence[int]
    ) -> "PartitionOperator":
        """<x|psi> strip for the bits of this group."""
        layers = {
            v: (state.tensor(v).project(physical_label(v), int(bits[v])),) for v in partitioning.groups[group]
        }
        return cls(partitioning, group, layers, doubled=False)

    def open_labels(self, edge: Edge) -> Tuple[str, ...]:
        label = bond_label(*edge)
        return (label, bra(label)) if self.doubled else (label,)

    def slabs(self, incoming: Sequence[Optional[BoundaryMPS]] = ()) -> List[List[IndexedTensor]]:
        return strip_slabs(self.partitioning, self.group, self.layers, incoming)


def strip_slabs(
    partitioning: Partitioning,
    group: int,
    layers: Mapping[int, Sequence[IndexedTensor]],
    incoming: Sequence[Optional[BoundaryMPS]] = (),
) -> List[List[IndexedTensor]]:
    """
    One slab per vertex of the group: the boundary MPS sites whose edge ends
    at the vertex, then the vertex's own tensors.
    """
    vertices = partitioning.groups[group]
    attached: Dict[int, List[IndexedTensor]] = {v: [] for v in vertices}
    for mps in incoming:
        if mps is None:
            continue
        for (u, w), tensor in zip(mps.edges, mps.tensors):
            endpoint = u if partitioning.group_of(u) == group else w
            attached[endpoint].append(tensor)
    return [attached[v] + list(layers[v]) for v in vertices]


def contract_slabs(slabs: Sequence[Sequence[IndexedTensor]]) -> IndexedTensor:
    result = IndexedTensor.scalar(1.0)
    for slab in slabs:
        for tensor in slab:
            result = contract(result, tensor)
    return result


def _placements(slab_of_site: Sequence[int]) -> List[int]:
    placement, running = [], -1
    for slab in slab_of_site:
        running = max(running, slab)
        placement.append(running)
    return placement


def _zip_up(
    slabs: Sequence[Sequence[IndexedTensor]],
    placement: Sequence[int],
    open_labels: Sequence[Tuple[str, ...]],
    bonds: Sequence[str],
    max_rank: int,
    cutoff: float,
) -> Optional[Tuple[List[IndexedTensor], bool, float]]:
    n = len(open_labels)
    x = IndexedTensor.scalar(1.0)
    tensors: List[IndexedTensor] = []
    kept_fraction = 1.0
    truncated = False
    k = 0
    for i, slab in enumerate(slabs):
        for tensor in slab:
            x = contract(x, tensor)
        while k < n - 1 and placement[k] <= i:
            left = ([bonds[k - 1]] if k > 0 else []) + list(open_labels[k])
            if set(left) == set(x.labels):
                # nothing else is attached yet: product with the remaining strip
                tensors.append(x.transpose(left).expand(bonds[k]))
                x = IndexedTensor([Index(bonds[k], 1)], [1.0])
                k += 1
                continue
            try:
                result = svd_truncate(x, left, max_rank, cutoff, bond_label=bonds[k], absorb="right")
            except DegenerateSpectrumError:
                return None
            tensors.append(result.left)
            x = result.right
            truncated = truncated or result.truncated
            kept_fraction *= 1.0 - result.discarded_weight
            k += 1
    if x.norm() == 0.0:
        return None
    tail = ([bonds[n - 2]] if n > 1 else []) + list(open_labels[n - 1])
    tensors.append(x.transpose(tail))
    return tensors, truncated, 1.0 - kept_fraction


def _site_labels(k: int, n: int, bonds: Sequence[str], open_labels: Sequence[Tuple[str, ...]]) -> List[str]:
    labels = [bonds[k - 1]] if k > 0 else []
    labels += list(open_labels[k])
    if k < n - 1:
        labels.append(bonds[k])
    return labels


def _sequence(slabs, placement) -> List[Tuple[str, object]]:
    seq: List[Tuple[str, object]] = []
    k = 0
    for i, slab in enumerate(slabs):
        seq += [("t", tensor) for tensor in slab]
        while k < len(placement) and placement[k] <= i:
            seq.append(("s", k))
            k += 1
    return seq


def _entry(entry, phis) -> IndexedTensor:
    kind, value = entry
    return phis[value].conj() if kind == "s" else value


def _sweep_right_to_left(seq, phis, bonds, n) -> float:
    prefix = [IndexedTensor.scalar(1.0)]
    for entry in seq:
        prefix.append(contract(prefix[-1], _entry(entry, phis)))
    right = IndexedTensor.scalar(1.0)
    objective = 0.0
    for p in reversed(range(len(seq))):
        kind, value = seq[p]
        if kind == "t":
            right = contract(value, right)
            continue
        k = value
        env = contract(prefix[p], right)
        env = env.transpose([label for label in phis[k].labels])
        objective = env.norm()
        if k > 0:
            _, q = lq_split(env, [bonds[k - 1]], _TMP)
            phis[k] = q.relabel({_TMP: bonds[k - 1]})
        else:
            phis[k] = env
        right = contract(phis[k].conj(), right)
    return objective


def _sweep_left_to_right(seq, phis, bonds, n) -> float:
    suffix = [IndexedTensor.scalar(1.0)]
    for entry in reversed(seq):
        suffix.append(contract(_entry(entry, phis), suffix[-1]))
    suffix.reverse()
    left = IndexedTensor.scalar(1.0)
    objective = 0.0
    for p, (kind, value) in enumerate(seq):
        if kind == "t":
            left = contract(left, value)
            continue
        k = value
        env = contract(left, suffix[p + 1])
        env = env.transpose([label for label in phis[k].labels])
        objective = env.norm()
        if k < n - 1:
            q, _ = qr_split(env, [label for label in env.labels if label != bonds[k]], _TMP)
            phis[k] = q.relabel({_TMP: bonds[k]})
        else:
            phis[k] = env
        left = contract(left, phis[k].conj())
    return objective


def _label_dims(slabs) -> Dict[str, int]:
    dims: Dict[str, int] = {}
    for slab in slabs:
        for tensor in slab:
            for index in tensor.indices:
                dims[index.label] = index.dimension
    return dims


def _random_mps(open_labels, bonds, dims, max_rank, rng) -> List[IndexedTensor]:
    n = len(open_labels)
    local = [math.prod(dims[label] for label in labels) for labels in open_labels]
    bond_dims = [min(max_rank, math.prod(local[: k + 1]), math.prod(local[k + 1:])) for k in range(n - 1)]
    tensors = []
    for k in range(n):
        indices = [Index(bonds[k - 1], bond_dims[k - 1])] if k > 0 else []
        indices += [Index(label, dims[label]) for label in open_labels[k]]
        if k < n - 1:
            indices.append(Index(bonds[k], bond_dims[k]))
        shape = [i.dimension for i in indices]
        tensors.append(IndexedTensor(indices, rng.standard_normal(shape) + 1j * rng.standard_normal(shape)))
    return tensors


def _zero_mps(open_labels, bonds, dims) -> List[IndexedTensor]:
    n = len(open_labels)
    tensors = []
    for k in range(n):
        indices = ([Index(bonds[k - 1], 1)] if k > 0 else []) + [Index(l, dims[l]) for l in open_labels[k]]
        if k < n - 1:
            indices.append(Index(bonds[k], 1))
        tensors.append(IndexedTensor(indices, np.zeros([i.dimension for i in indices])))
    return tensors


def fit_mps_mpo(
    incoming: Optional[BoundaryMPS],
    operator: PartitionOperator,
    toward: int,
    max_rank: int,
    sweeps: int = DEFAULT_FIT_SWEEPS,
    tol: float = DEFAULT_FIT_TOL,
    cutoff: float = DEFAULT_SVD_CUTOFF,
    tag: str = "M",
    extra: Sequence[Optional[BoundaryMPS]] = (),
) -> Tuple[BoundaryMPS, FitReport]:
    """
    Contract the incoming boundary MPS through one group and compress the
    result to an MPS of rank at most max_rank on the cut toward `toward`.

    Args:
        incoming: Boundary MPS on the other side of the group (None at the edge)
        operator: The group's tensors
        toward: Neighbouring group the output faces (group +- 1)
        max_rank: Maximum output bond dimension R
        sweeps: Maximum number of one-site sweep pairs
        tol: Stop when the relative change of the overlap is below this
        tag: Prefix for the output bond labels
        extra: Further boundary MPS attached to the strip (sampling conditions)

    Returns:
        (BoundaryMPS, FitReport). The output is left-canonical with the
        norm on its last site; when no truncation was needed it equals the
        exact contraction.
    """
    partitioning = operator.partitioning
    group = operator.group
    if abs(toward - group) != 1 or not 0 <= toward < partitioning.n_groups:
        raise ValidationError(f"Group {group} has no neighbour {toward}")
    if max_rank < 1:
        raise ValidationError(f"Boundary rank must be >= 1, got {max_rank}")

    cut = min(group, toward)
    edges = partitioning.cut_edges(cut)
    n = len(edges)
    open_labels = [operator.open_labels(e) for e in edges]
    bonds = [f"#{tag}{cut}.{k}" for k in range(n - 1)]

    slabs = operator.slabs([incoming, *extra])
    endpoint = [u if partitioning.group_of(u) == group else w for u, w in edges]
    placement = _placements([partitioning.position(v) for v in endpoint])
    dims = _label_dims(slabs)

    def build(tensors) -> BoundaryMPS:
        return BoundaryMPS(cut, tuple(edges), tuple(tensors), tuple(bonds), tuple(open_labels))

    zipped = _zip_up(slabs, placement, open_labels, bonds, max_rank, cutoff)
    if zipped is None:
        logger.debug("Strip of group %d contracts to zero; returning a zero boundary MPS", group)
        return build(_zero_mps(open_labels, bonds, dims)), FitReport()
    phis, truncated, discarded = zipped
    if not truncated or n == 1:
        return build(phis), FitReport(truncated=truncated, discarded_weight=discarded, objective=phis[-1].norm())

    seq = _sequence(slabs, placement)
    history: List[float] = []
    restarted = False
    previous = phis[-1].norm()
    change = float("inf")
    used = 0
    for used in range(1, sweeps + 1):
        _sweep_right_to_left(seq, phis, bonds, n)
        objective = _sweep_left_to_right(seq, phis, bonds, n)
        history.append(objective)
        if objective == 0.0 and not restarted:
            logger.warning("Fit overlap vanished on group %d; restarting from a random MPS", group)
            rng = np.random.default_rng(used)
            phis = _random_mps(open_labels, bonds, dims, max_rank, rng)
            restarted = True
            continue
        change = abs(objective - previous) / max(objective, 1e-300)
        logger.debug("Fit sweep %d on group %d: overlap %.12e, change %.2e", used, group, objective, change)
        previous = objective
        if change < tol:
            break

    report = FitReport(
        sweeps=used,
        relative_change=change,
        truncated=True,
        discarded_weight=discarded,
        objective=history[-1] if history else previous,
        restarted=restarted,
        history=tuple(history),
    )
    return build(phis), report


@dataclass(frozen=True)
class BoundaryEnvironment:
    """
    Precomputed norm messages.

    ``right[c]`` contracts groups c+1..N-1 of the norm network onto cut c
    (it enters group c); ``left[c]`` contracts groups 0..c (it enters group c+1).
    """

    partitioning: Partitioning
    rank: int
    right: Mapping[int, BoundaryMPS] = field(default_factory=dict)
    left: Mapping[int, BoundaryMPS] = field(default_factory=dict)
    reports: Tuple[FitReport, ...] = ()

    @property
    def truncated(self) -> bool:
        return any(r.truncated for r in self.reports)


def _left_messages(state, partitioning, rank, sweeps, tol, cutoff) -> Tuple[Dict[int, BoundaryMPS], List[FitReport]]:
    left: Dict[int, BoundaryMPS] = {}
    reports = []
    incoming = None
    for b in range(partitioning.n_groups - 1):
        operator = PartitionOperator.norm(state, partitioning, b)
        incoming, report = fit_mps_mpo(incoming, operator, b + 1, rank, sweeps, tol, cutoff, tag="L")
        left[b] = incoming
        reports.append(report)
    return left, reports


def norm_environments(
    state: TensorNetworkState,
    partitioning: Partitioning,
    rank: int,
    sweeps: int = DEFAULT_FIT_SWEEPS,
    tol: float = DEFAULT_FIT_TOL,
    cutoff: float = DEFAULT_SVD_CUTOFF,
    both_directions: bool = False,
) -> BoundaryEnvironment:
    """
    Fit the norm messages from the last group back to the first.

    Computed once per state and shared read-only by every amplitude,
    expectation and sampling call.
    """
    right: Dict[int, BoundaryMPS] = {}
    reports: List[FitReport] = []
    incoming = None
    for b in range(partitioning.n_groups - 1, 0, -1):
        operator = PartitionOperator.norm(state, partitioning, b)
        incoming, report = fit_mps_mpo(incoming, operator, b - 1, rank, sweeps, tol, cutoff, tag="M")
        right[b - 1] = incoming
        reports.append(report)

    left: Dict[int, BoundaryMPS] = {}
    if both_directions:
        left, left_reports = _left_messages(state, partitioning, rank, sweeps, tol, cutoff)
        reports += left_reports

    logger.debug(
        "Norm environment at rank %d: %d groups, truncated=%s", rank, partitioning.n_groups,
        any(r.truncated for r in reports),
    )
    return BoundaryEnvironment(partitioning, rank, right, left, tuple(reports))


def norm_value(state: TensorNetworkState, partitioning: Partitioning, env: BoundaryEnvironment) -> float:
    """<psi|psi> from closing the right messages against the first group."""
    operator = PartitionOperator.norm(state, partitioning, 0)
    value = contract_slabs(operator.slabs([env.right.get(0)])).item()
    return float(value.real)


def amplitude(
    state: TensorNetworkState,
    bits: Sequence[int],
    partitioning: Partitioning,
    rank: int,
    sweeps: int = DEFAULT_FIT_SWEEPS,
    tol: float = DEFAULT_FIT_TOL,
    cutoff: float = DEFAULT_SVD_CUTOFF,
) -> complex:
    """<x|psi> by passing an amplitude MPS of rank `rank` from the first group to the last."""
    if len(bits) != state.n_qubits:
        raise ValidationError(f"Bitstring has length {len(bits)}, expected {state.n_qubits}")
    incoming = None
    last = partitioning.n_groups - 1
    for b in range(last):
        operator = PartitionOperator.amplitude(state, partitioning, b, bits)
        incoming, _ = fit_mps_mpo(incoming, operator, b + 1, rank, sweeps, tol, cutoff, tag="m")
    operator = PartitionOperator.amplitude(state, partitioning, last, bits)
    return contract_slabs(operator.slabs([incoming])).item()


def _interleave(groups: Sequence[int], slabs: Sequence[List[List[IndexedTensor]]]):
    ordered = []
    for g, group_slabs in zip(groups, slabs):
        size = len(group_slabs)
        for position, slab in enumerate(group_slabs):
            ordered.append(((position + 0.5) / size, g, slab))
    return [slab for _, _, slab in sorted(ordered, key=lambda item: (item[0], item[1]))]


def _closure(state, partitioning, env, groups, operators) -> complex:
    first, last = groups[0], groups[-1]
    left = env.left.get(first - 1)
    right = env.right.get(last)
    if len(groups) == 1:
        operator = PartitionOperator.norm(state, partitioning, first, operators)
        return contract_slabs(operator.slabs([left, right])).item()
    lower = PartitionOperator.norm(state, partitioning, first, operators).slabs([left])
    upper = PartitionOperator.norm(state, partitioning, last, operators).slabs([right])
    return contract_slabs(_interleave(groups, [lower, upper])).item()


def with_left_messages(state: TensorNetworkState, env: BoundaryEnvironment, sweeps=DEFAULT_FIT_SWEEPS,
                       tol=DEFAULT_FIT_TOL, cutoff=DEFAULT_SVD_CUTOFF) -> BoundaryEnvironment:
    if env.left or env.partitioning.n_groups == 1:
        return env
    left, reports = _left_messages(state, env.partitioning, env.rank, sweeps, tol, cutoff)
    return replace(env, left=left, reports=env.reports + tuple(reports))


def expectation(
    state: TensorNetworkState,
    observable: PauliString,
    partitioning: Partitioning,
    rank: int,
    env: Optional[BoundaryEnvironment] = None,
    sweeps: int = DEFAULT_FIT_SWEEPS,
    tol: float = DEFAULT_FIT_TOL,
    cutoff: float = DEFAULT_SVD_CUTOFF,
) -> float:
    """
    <psi|O|psi> / <psi|psi> for a Pauli string supported on at most two
    adjacent groups, closing the boundary messages on both sides.

    Raises:
        ValidationError: Sites out of range or spread over non-adjacent groups
    """
    observable.check_sites(state.n_qubits)
    if not observable.sites:
        return 1.0
    groups = sorted({partitioning.group_of(site) for site in observable.sites})
    if len(groups) > 2 or (len(groups) == 2 and groups[1] - groups[0] != 1):
        raise ValidationError(
            f"Observable {observable.label} spans groups {groups}; at most two adjacent groups are supported"
        )

    if env is None or env.rank != rank or env.partitioning is not partitioning:
        env = norm_environments(state, partitioning, rank, sweeps, tol, cutoff, both_directions=True)
    else:
        env = with_left_messages(state, env, sweeps, tol, cutoff)

    numerator = _closure(state, partitioning, env, groups, observable.matrices())
    denominator = _closure(state, partitioning, env, groups, None)
    if denominator == 0:
        raise ZeroDivisionError(f"Norm vanished while evaluating {observable.label}")
    ratio = numerator / denominator
    if abs(ratio.imag) > 1e-8 * max(1.0, abs(ratio)):
        logger.warning("Expectation of %s has imaginary part %.3e", observable.label, ratio.imag)
    return float(ratio.real)
