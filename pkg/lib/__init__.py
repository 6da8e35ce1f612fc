"""
Planar TNS Sampler - Core Library

Main exports:
- Named-index tensors and decompositions (tensor_core)
- Graphs, lattices and tensor network states (network, lattices)
- Belief propagation and per-loop BP errors (belief_propagation)
- Gates, circuits, Trotter circuits and the gate engine (gates, circuit, trotter, engine)
- Boundary MPS contraction and sampling (partitioning, boundary_mps, sampler)
- State files, logging, validation and the script base class
"""

from .logger import setup_logger, get_default_log_file

from .tensor_core import (
    TensorError,
    StructuralError,
    NumericalError,
    DegenerateSpectrumError,
    NonPSDError,
    Index,
    IndexedTensor,
    contract,
    contract_network,
    svd_truncate,
    eig_full,
    psd_roots,
    psd_sqrt_and_pinv_sqrt,
)

from .network import (
    NetworkGraph,
    TensorNetworkState,
    PlanarityError,
    Loop,
    load_graph,
    save_graph,
    product_state,
    domain_wall,
    primitive_loops,
    memory_footprint,
    to_dense,
)
from .lattices import build_lattice, chain, heavy_hex, rotated_square, preset

from .belief_propagation import MessageEnvironment, run_bp, bp_norm, loop_error, LoopErrorReport

from .circuit import Gate, Circuit, CircuitError, load_circuit, save_circuit
from .trotter import edge_coloring, heisenberg_trotter_circuit
from .engine import apply_one_site, apply_two_site, run_circuit, GateLog

from .partitioning import Partitioning, PartitionError, partition_line
from .observables import PauliString
from .boundary_mps import (
    BoundaryMPS,
    BoundaryEnvironment,
    FitReport,
    PartitionOperator,
    fit_mps_mpo,
    norm_environments,
    norm_value,
    amplitude,
    expectation,
)
from .sampler import (
    SamplerConfig,
    SampleRecord,
    SampleReport,
    SamplingError,
    UnreliableEstimateError,
    draw_samples,
    verify_p,
    kld,
    norm_estimator,
    importance_expectation,
)
from .state_io import save_state, load_state

# Utility functions
from .utils import save_to_json, save_to_jsonl, load_config, print_table, format_bytes, ensure_directory

# Validators
from .validators import ValidationError, validate_file_path, validate_positive_int, validate_range

# Script base class
from .script_base import SimulationScript

__version__ = "1.0.0"

__all__ = [
    # Logging
    "setup_logger",
    "get_default_log_file",
    # Tensors
    "TensorError",
    "StructuralError",
    "NumericalError",
    "DegenerateSpectrumError",
    "NonPSDError",
    "Index",
    "IndexedTensor",
    "contract",
    "contract_network",
    "svd_truncate",
    "eig_full",
    "psd_roots",
    "psd_sqrt_and_pinv_sqrt",
    # Graphs and states
    "NetworkGraph",
    "TensorNetworkState",
    "PlanarityError",
    "Loop",
    "load_graph",
    "save_graph",
    "product_state",
    "domain_wall",
    "primitive_loops",
    "memory_footprint",
    "to_dense",
    "build_lattice",
    "chain",
    "heavy_hex",
    "rotated_square",
    "preset",
    # Belief propagation
    "MessageEnvironment",
    "run_bp",
    "bp_norm",
    "loop_error",
    "LoopErrorReport",
    # Circuits
    "Gate",
    "Circuit",
    "CircuitError",
    "load_circuit",
    "save_circuit",
    "edge_coloring",
    "heisenberg_trotter_circuit",
    "apply_one_site",
    "apply_two_site",
    "run_circuit",
    "GateLog",
    # Boundary MPS
    "Partitioning",
    "PartitionError",
    "partition_line",
    "PauliString",
    "BoundaryMPS",
    "BoundaryEnvironment",
    "FitReport",
    "PartitionOperator",
    "fit_mps_mpo",
    "norm_environments",
    "norm_value",
    "amplitude",
    "expectation",
    # Sampling
    "SamplerConfig",
    "SampleRecord",
    "SampleReport",
    "SamplingError",
    "UnreliableEstimateError",
    "draw_samples",
    "verify_p",
    "kld",
    "norm_estimator",
    "importance_expectation",
    # State files
    "save_state",
    "load_state",
    # Utils
    "save_to_json",
    "save_to_jsonl",
    "load_config",
    "print_table",
    "format_bytes",
    "ensure_directory",
    # Validators
    "ValidationError",
    "validate_file_path",
    "validate_positive_int",
    "validate_range",
    # Script base
    "SimulationScript",
]
