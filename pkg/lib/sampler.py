"""
Bitstring sampling from a tensor network state with boundary MPS.

Groups are sampled in order. Inside group b every qubit is drawn from its
one-site reduced density matrix, with the groups above it projected onto the
bits already drawn (the amplitude MPS m and its conjugate), the qubits of the
group drawn so far projected, and everything below traced out (the
precomputed norm message M entering group b). After group b the amplitude
MPS is advanced through it at rank R_x.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .boundary_mps import (
    DEFAULT_FIT_SWEEPS,
    DEFAULT_FIT_TOL,
    BoundaryEnvironment,
    BoundaryMPS,
    PartitionOperator,
    amplitude,
    contract_slabs,
    fit_mps_mpo,
    strip_slabs,
)
from .network import Bitstring, TensorNetworkState, bra, bra_tensor, format_bits, magnetization_sector, physical_label
from .observables import PauliString
from .partitioning import Partitioning
from .tensor_core import DEFAULT_SVD_CUTOFF, IndexedTensor, NumericalError, contract
from .validators import ValidationError

logger = logging.getLogger(__name__)

NEGATIVE_MASS_TOL = 1e-10
MIN_NORM_ESTIMATE = 1e-12


class SamplingError(NumericalError):
    """A sample kept hitting conditional distributions with zero mass."""


class UnreliableEstimateError(NumericalError):
    """The importance weights are too small to normalize an estimate."""


@dataclass(frozen=True)
class SamplerConfig:
    rank_x: int
    rank_n: int
    n_samples: int
    seed: int = 0
    verify_rank: Optional[int] = None
    sweeps: int = DEFAULT_FIT_SWEEPS
    tol: float = DEFAULT_FIT_TOL
    cutoff: float = DEFAULT_SVD_CUTOFF
    workers: int = 1
    sector_weight: Optional[int] = None
    max_resamples: int = 10

    def __post_init__(self):
        for name in ("rank_x", "rank_n", "n_samples", "workers"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.verify_rank is not None and self.verify_rank < 1:
            raise ValidationError(f"verify_rank must be >= 1, got {self.verify_rank}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError(f"Seed must be a non-negative 64-bit integer, got {self.seed}")

    def resolved_verify_rank(self, state: TensorNetworkState) -> int:
        return self.verify_rank if self.verify_rank is not None else 2 * state.max_bond_dimension()


@dataclass(frozen=True)
class SampleRecord:
    index: int
    bits: Bitstring
    q: float
    p: float
    p_onthefly: Optional[float] = None
    in_sector: Optional[bool] = None

    @property
    def bitstring(self) -> str:
        return format_bits(self.bits)

    @property
    def ratio(self) -> float:
        return self.p / self.q

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "x": self.bitstring,
            "q": self.q,
            "p": self.p,
            "ratio": self.ratio,
            "p_onthefly": self.p_onthefly,
            "in_sector": self.in_sector,
        }


@dataclass
class SampleReport:
    records: List[SampleRecord]
    rank_x: int
    rank_n: int
    verify_rank: int
    clamp_incidents: int = 0
    resample_events: int = 0
    mean_seconds_per_sample: float = 0.0
    env_truncated: bool = False
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def zero_p_count(self) -> int:
        return sum(1 for r in self.records if r.p == 0.0)

    @property
    def kld(self) -> float:
        return kld(self.records)

    @property
    def norm_estimate(self) -> float:
        return norm_estimator(self.records)[0]

    @property
    def norm_std_error(self) -> float:
        return norm_estimator(self.records)[1]

    @property
    def magnetization_pass_rate(self) -> Optional[float]:
        flags = [r.in_sector for r in self.records if r.in_sector is not None]
        return sum(flags) / len(flags) if flags else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_samples": len(self.records),
            "rank_x": self.rank_x,
            "rank_n": self.rank_n,
            "verify_rank": self.verify_rank,
            "kld": self.kld,
            "zero_p_count": self.zero_p_count,
            "norm_estimate": self.norm_estimate,
            "norm_std_error": self.norm_std_error,
            "magnetization_pass_rate": self.magnetization_pass_rate,
            "clamp_incidents": self.clamp_incidents,
            "resample_events": self.resample_events,
            "mean_seconds_per_sample": self.mean_seconds_per_sample,
            "env_truncated": self.env_truncated,
            **self.extra,
        }


class _ZeroMass(Exception):
    pass


@dataclass
class _Walk:
    bits: List[int]
    q: float = 1.0
    truncated: bool = False
    clamps: int = 0
    final_amplitude: Optional[complex] = None


Chooser = Callable[[int, np.ndarray], int]


def sample_rng(seed: int, index: int, attempt: int = 0) -> np.random.Generator:
    """Counter-based generator for one sample; attempts advance a counter word."""
    key = np.array([seed, index], dtype=np.uint64)
    counter = np.array([0, 0, attempt, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def _conditional(rho: IndexedTensor, v: int, walk: _Walk) -> np.ndarray:
    phys = physical_label(v)
    probs = np.real(np.diag(rho.to_matrix([phys], [bra(phys)]))).copy()
    trace = float(np.sum(probs))
    if probs.min() < 0.0:
        if probs.min() < -NEGATIVE_MASS_TOL * abs(trace):
            logger.warning("Clamped negative conditional mass %.3e on qubit %d", probs.min(), v)
            walk.clamps += 1
        probs = np.clip(probs, 0.0, None)
    total = float(np.sum(probs))
    if total <= 0.0 or not math.isfinite(total):
        raise _ZeroMass(v)
    return probs / total


def _walk(
    state: TensorNetworkState,
    partitioning: Partitioning,
    env: BoundaryEnvironment,
    rank_x: int,
    choose: Chooser,
    sweeps: int = DEFAULT_FIT_SWEEPS,
    tol: float = DEFAULT_FIT_TOL,
    cutoff: float = DEFAULT_SVD_CUTOFF,
) -> _Walk:
    walk = _Walk(bits=[0] * state.n_qubits)
    m: Optional[BoundaryMPS] = None
    last = partitioning.n_groups - 1
    for b, group in enumerate(partitioning.groups):
        incoming = [m, m.conj() if m is not None else None, env.right.get(b)]
        attached = strip_slabs(partitioning, b, {v: () for v in group}, incoming)

        traced = [attached[i] + [state.tensor(v), bra_tensor(state, v)] for i, v in enumerate(group)]
        suffix = [IndexedTensor.scalar(1.0)] * (len(group) + 1)
        for i in reversed(range(len(group))):
            below = suffix[i + 1]
            for tensor in reversed(traced[i]):
                below = contract(tensor, below)
            suffix[i] = below

        prefix = IndexedTensor.scalar(1.0)
        for i, v in enumerate(group):
            ket, bra_open = state.tensor(v), bra_tensor(state, v, open_physical=True)
            rho = prefix
            for tensor in attached[i] + [ket, bra_open]:
                rho = contract(rho, tensor)
            rho = contract(rho, suffix[i + 1])
            probs = _conditional(rho, v, walk)
            bit = choose(v, probs)
            walk.bits[v] = bit
            walk.q *= float(probs[bit])
            if walk.q == 0.0:
                raise _ZeroMass(v)
            phys = physical_label(v)
            for tensor in attached[i] + [ket.project(phys, bit), bra_open.project(bra(phys), bit)]:
                prefix = contract(prefix, tensor)

        if b < last:
            operator = PartitionOperator.amplitude(state, partitioning, b, walk.bits)
            m, report = fit_mps_mpo(m, operator, b + 1, rank_x, sweeps, tol, cutoff, tag="m")
            walk.truncated = walk.truncated or report.truncated

    closing = PartitionOperator.amplitude(state, partitioning, last, walk.bits)
    walk.final_amplitude = contract_slabs(closing.slabs([m])).item()
    return walk


def sequential_probability(
    state: TensorNetworkState,
    partitioning: Partitioning,
    env: BoundaryEnvironment,
    bits: Sequence[int],
    rank_x: int,
    sweeps: int = DEFAULT_FIT_SWEEPS,
    tol: float = DEFAULT_FIT_TOL,
    cutoff: float = DEFAULT_SVD_CUTOFF,
) -> float:
    """
    q(x) for a given bitstring: the product of the conditionals the sampler
    would emit on its way to x. Zero when some conditional vanishes.
    """
    if len(bits) != state.n_qubits:
        raise ValidationError(f"Bitstring has length {len(bits)}, expected {state.n_qubits}")
    try:
        return _walk(state, partitioning, env, rank_x, lambda v, probs: int(bits[v]), sweeps, tol, cutoff).q
    except _ZeroMass:
        return 0.0


def verify_p(
    state: TensorNetworkState,
    bits: Sequence[int],
    partitioning: Partitioning,
    verify_rank: int,
    sweeps: int = DEFAULT_FIT_SWEEPS,
    tol: float = DEFAULT_FIT_TOL,
    cutoff: float = DEFAULT_SVD_CUTOFF,
) -> float:
    """p(x) = |<x|psi>|^2 from an independent amplitude contraction at verify_rank."""
    value = amplitude(state, bits, partitioning, verify_rank, sweeps, tol, cutoff)
    return float(abs(value) ** 2)


def _draw_one(
    index: int,
    state: TensorNetworkState,
    partitioning: Partitioning,
    env: BoundaryEnvironment,
    cfg: SamplerConfig,
    verify_rank: int,
) -> Tuple[SampleRecord, int, int, float]:
    started = time.perf_counter()
    resamples = 0
    for attempt in range(cfg.max_resamples + 1):
        rng = sample_rng(cfg.seed, index, attempt)

        def choose(v: int, probs: np.ndarray) -> int:
            return 1 if rng.random() < probs[1] else 0

        try:
            walk = _walk(state, partitioning, env, cfg.rank_x, choose, cfg.sweeps, cfg.tol, cfg.cutoff)
            break
        except _ZeroMass as e:
            resamples += 1
            logger.warning("Sample %d hit zero conditional mass at qubit %s; resampling", index, e.args[0])
    else:
        raise SamplingError(f"Sample {index} hit zero conditional mass {cfg.max_resamples + 1} times")

    bits = tuple(walk.bits)
    p = verify_p(state, bits, partitioning, verify_rank, cfg.sweeps, cfg.tol, cfg.cutoff)
    record = SampleRecord(
        index=index,
        bits=bits,
        q=walk.q,
        p=p,
        p_onthefly=None if walk.truncated else float(abs(walk.final_amplitude) ** 2),
        in_sector=None if cfg.sector_weight is None else magnetization_sector(bits) == cfg.sector_weight,
    )
    return record, walk.clamps, resamples, time.perf_counter() - started


def draw_samples(
    state: TensorNetworkState,
    partitioning: Partitioning,
    env: BoundaryEnvironment,
    cfg: SamplerConfig,
) -> SampleReport:
    """
    Draw cfg.n_samples bitstrings.

    Every sample uses its own counter-based generator keyed by
    (seed, sample index), so the stream does not depend on cfg.workers.

    Raises:
        ValidationError: The environment was built for another partitioning
        SamplingError: A sample exhausted its resample attempts
    """
    if env.partitioning.groups != partitioning.groups:
        raise ValidationError("Boundary environment was built for a different partitioning")
    if env.rank != cfg.rank_n:
        logger.warning("Environment rank %d differs from configured R_n=%d", env.rank, cfg.rank_n)
    verify_rank = cfg.resolved_verify_rank(state)

    def task(index: int):
        return _draw_one(index, state, partitioning, env, cfg, verify_rank)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(task, range(cfg.n_samples)))
    else:
        results = []
        for index in range(cfg.n_samples):
            results.append(task(index))
            if (index + 1) % 100 == 0:
                logger.info("Drew %d/%d samples", index + 1, cfg.n_samples)

    results.sort(key=lambda item: item[0].index)
    report = SampleReport(
        records=[r for r, _, _, _ in results],
        rank_x=cfg.rank_x,
        rank_n=cfg.rank_n,
        verify_rank=verify_rank,
        clamp_incidents=sum(c for _, c, _, _ in results),
        resample_events=sum(s for _, _, s, _ in results),
        mean_seconds_per_sample=float(np.mean([t for _, _, _, t in results])),
        env_truncated=env.truncated,
    )
    logger.info(
        "Sampled %d bitstrings at R_x=%d, R_n=%d: KLD=%.3e, norm estimate %.6f",
        len(report.records), cfg.rank_x, cfg.rank_n, report.kld, report.norm_estimate,
    )
    return report


Records = Union[SampleReport, Sequence[SampleRecord]]


def _records(source: Records) -> Sequence[SampleRecord]:
    return source.records if isinstance(source, SampleReport) else source


def kld(source: Records) -> float:
    """
    Sample KL divergence: mean of log(q/p) over records with p > 0.

    Records with p = 0 are left out (SampleReport.zero_p_count counts them);
    NaN when no record is left.
    """
    logs = [math.log(r.q / r.p) for r in _records(source) if r.p > 0.0]
    if not logs:
        logger.warning("No sample with p > 0; KLD undefined")
        return float("nan")
    return float(np.mean(logs))


def norm_estimator(source: Records) -> Tuple[float, float]:
    """Mean of p/q (an unbiased estimate of <psi|psi>) and its standard error."""
    ratios = np.array([r.ratio for r in _records(source)], dtype=float)
    if ratios.size == 0:
        raise ValidationError("Norm estimate needs at least one sample")
    error = float(np.std(ratios, ddof=1) / math.sqrt(ratios.size)) if ratios.size > 1 else 0.0
    return float(np.mean(ratios)), error


def importance_expectation(source: Records, observable: PauliString) -> float:
    """
    (1/N) mean_i (p_i / q_i) <x_i|O|x_i> with N the mean of p/q.

    Raises:
        ValidationError: Observable not diagonal in the computational basis
        UnreliableEstimateError: N below 1e-12
    """
    records = _records(source)
    if not observable.is_diagonal:
        raise ValidationError(f"{observable.label} is not diagonal in the computational basis")
    normalization, _ = norm_estimator(records)
    if normalization < MIN_NORM_ESTIMATE:
        raise UnreliableEstimateError(f"Norm estimate {normalization:.3e} is too small to reweight samples")
    values = np.array([r.ratio * observable.value_on(r.bits) for r in records])
    return float(np.mean(values) / normalization)


def raw_sample_mean(source: Records, observable: PauliString) -> float:
    """Uncorrected mean of a diagonal observable over the drawn bitstrings."""
    records = _records(source)
    return float(np.mean([observable.value_on(r.bits) for r in records]))


def normalized(state: TensorNetworkState, norm: float) -> TensorNetworkState:
    """Rescale every site tensor uniformly so that <psi|psi> becomes 1 given its current value."""
    if norm <= 0.0:
        raise UnreliableEstimateError(f"Cannot normalize a state with norm {norm:.3e}")
    factor = norm ** (-0.5 / state.n_qubits)
    return state.replace({v: state.tensor(v).scale(factor) for v in range(state.n_qubits)})
