"""
Base class for simulator command scripts to reduce boilerplate code.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .belief_propagation import DEFAULT_BP_MAX_ITERS, DEFAULT_BP_TOL
from .boundary_mps import DEFAULT_FIT_SWEEPS, DEFAULT_FIT_TOL
from .circuit import Circuit, load_circuit
from .engine import DEFAULT_GAUGE_REG_CUTOFF
from .logger import get_default_log_file, setup_logger
from .network import NetworkGraph, TensorNetworkState, as_bitstring, domain_wall, load_graph, product_state
from .tensor_core import DEFAULT_SVD_CUTOFF, NumericalError
from .trotter import heisenberg_trotter_circuit
from .utils import load_config
from .validators import ValidationError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INTERRUPTED = 130

# Built-in defaults; config file values override them, command-line flags override both.
DEFAULT_SETTINGS: Dict[str, Any] = {
    "chi": 16,
    "cutoff": DEFAULT_SVD_CUTOFF,
    "reg_cutoff": DEFAULT_GAUGE_REG_CUTOFF,
    "bp_policy": "per-layer",
    "bp_tol": DEFAULT_BP_TOL,
    "bp_max_iters": DEFAULT_BP_MAX_ITERS,
    "bp_schedule": "synchronous",
    "boundary_rank": 8,
    "fit_sweeps": DEFAULT_FIT_SWEEPS,
    "fit_tol": DEFAULT_FIT_TOL,
    "n_samples": 1000,
    "seed": 0,
    "threads": 1,
    "partition": "columns",
    "log_level": "INFO",
    "output_directory": "output",
}

INITIAL_STATES = ("zeros", "domain-wall")


class SimulationScript:
    """
    Base class for simulator commands.

    Handles common functionality:
    - Argument parsing
    - Logger setup
    - Configuration loading and setting precedence
    - Mapping failures to exit codes

    Usage:
        class MyScript(SimulationScript):
            def setup_arguments(self, parser):
                parser.add_argument('--graph', required=True, help='Graph JSON file')

            def execute(self):
                graph = load_graph(self.args.graph)
                self.logger.info("Loaded %d qubits", graph.n)

        def main():
            return MyScript('my_script', 'Description of my script').run()
    """

    def __init__(self, name: str, description: str, config_path: Optional[str] = None):
        """
        Initialize the script.

        Args:
            name: Script name (used for logging)
            description: Script description (shown in help)
            config_path: Config file used when --config is not given
                (defaults to config/config.json in the project root)
        """
        self.name = name
        self.description = description
        self.config_path = config_path

        self.parser: Optional[argparse.ArgumentParser] = None
        self.args: Optional[argparse.Namespace] = None
        self.logger = None
        self.config: Dict[str, Any] = {}

    def create_parser(self) -> argparse.ArgumentParser:
        """
        Create argument parser with common arguments.

        Returns:
            ArgumentParser instance
        """
        parser = argparse.ArgumentParser(
            prog=self.name.replace("_", "-"),
            description=self.description,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )

        # Common arguments
        parser.add_argument("--config", default=None, help="Path to config file (default: config/config.json if present)")
        parser.add_argument(
            "--log-level",
            default=None,
            choices=["DEBUG", "INFO", "WARNING", "ERROR"],
            help="Logging level",
        )
        parser.add_argument("--log-file", default=None, help="Also write the log to this file ('auto' for logs/)")
        parser.add_argument("--dry-run", action="store_true", help="Validate inputs without writing outputs")
        parser.add_argument("--threads", type=int, default=None, help="Worker threads for BP sweeps and sampling")
        parser.add_argument("--seed", type=int, default=None, help="Random seed")

        return parser

    def setup_arguments(self, parser: argparse.ArgumentParser):
        """
        Add script-specific arguments to parser.

        Override this method in subclasses to add custom arguments.
        """
        pass

    def validate_arguments(self):
        """
        Validate parsed arguments.

        Override this method in subclasses to add custom validation.

        Raises:
            ValidationError: If arguments are invalid
        """
        pass

    def setup(self):
        """Setup hook called before execute()."""
        pass

    def execute(self):
        """
        Main script logic.

        Raises:
            NotImplementedError: If not implemented by subclass
        """
        raise NotImplementedError("Subclass must implement execute() method")

    def cleanup(self):
        """Cleanup hook called after execute() (even if it fails)."""
        pass

    def setting(self, key: str) -> Any:
        """Command-line value, else config file value, else built-in default."""
        value = getattr(self.args, key, None) if self.args is not None else None
        if value is not None:
            return value
        if key in self.config:
            return self.config[key]
        return DEFAULT_SETTINGS.get(key)

    def _load_config(self) -> Dict[str, Any]:
        explicit = self.args.config
        path = explicit or self.config_path
        try:
            return load_config(path)
        except FileNotFoundError:
            if explicit is None:
                self.logger.debug("Config file %s not found; using built-in defaults", path or "config/config.json")
                return {}
            raise ValidationError(f"Configuration file not found: {path}")
        except (json.JSONDecodeError, ValueError) as e:
            raise ValidationError(f"Failed to load configuration {path}: {e}") from e

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """
        Run the script with full lifecycle management.

        Returns:
            Exit code: 0 success, 2 configuration error, 3 numerical failure,
            1 any other failure, 130 interrupted
        """
        try:
            # Parse arguments
            self.parser = self.create_parser()
            self.setup_arguments(self.parser)
            self.args = self.parser.parse_args(argv)

            # Setup logger (level from flag or default until the config is read)
            log_file = get_default_log_file(self.name) if self.args.log_file == "auto" else self.args.log_file
            self.logger = setup_logger(self.name, log_file=log_file, level=self.args.log_level or "INFO")

            self.config = self._load_config()
            if self.args.log_level is None and self.setting("log_level") != "INFO":
                self.logger = setup_logger(self.name, log_file=log_file, level=self.setting("log_level"))

            if self.args.dry_run:
                self.logger.warning("DRY RUN MODE - no files will be written")

            self.validate_arguments()
            self.setup()

            self.logger.debug("Starting %s...", self.name)
            self.execute()
            self.logger.info("%s completed", self.name)
            return EXIT_OK

        except KeyboardInterrupt:
            if self.logger:
                self.logger.warning("Interrupted by user")
            return EXIT_INTERRUPTED

        except (ValidationError, FileNotFoundError) as e:
            self._report("Configuration error", e)
            return EXIT_CONFIG

        except NumericalError as e:
            self._report("Numerical failure", e)
            return EXIT_NUMERICAL

        except Exception as e:
            self._report("Script failed", e)
            return EXIT_FAILURE

        finally:
            # Always run cleanup
            try:
                self.cleanup()
            except Exception as e:
                if self.logger:
                    self.logger.warning("Cleanup failed: %s", e)

    def _report(self, what: str, error: Exception):
        if self.logger:
            self.logger.error("%s: %s", what, error)
            self.logger.debug("Exception details:", exc_info=True)
        else:
            print(f"{what}: {error}", file=sys.stderr)

    def dry_run_check(self, operation: str) -> bool:
        """
        Check if we're in dry-run mode and log the operation.

        Returns:
            True if this is a dry run (operation should be skipped), False otherwise

        Example:
            if self.dry_run_check(f"Would write state to {path}"):
                return
        """
        if self.args.dry_run:
            self.logger.info(f"[DRY RUN] {operation}")
            return True
        return False

    def output_path(self, filename: str) -> Path:
        """Path for an output file: --out if given, else under output_directory."""
        explicit = getattr(self.args, "out", None)
        if explicit:
            return Path(explicit)
        return Path(self.setting("output_directory")) / filename

    # Shared argument groups

    @staticmethod
    def add_engine_arguments(parser: argparse.ArgumentParser):
        group = parser.add_argument_group("gate application")
        group.add_argument("--chi", type=int, default=None, help="Maximum bond dimension")
        group.add_argument("--cutoff", type=float, default=None, help="SVD cutoff on normalized squared singular values")
        group.add_argument("--reg-cutoff", dest="reg_cutoff", type=float, default=None,
                           help="Relative eigenvalue cutoff for inverse message roots")
        group.add_argument("--bp-policy", dest="bp_policy", choices=["per-layer", "per-gate", "never"], default=None,
                           help="When to re-converge BP")
        group.add_argument("--bp-tol", dest="bp_tol", type=float, default=None, help="BP convergence tolerance")
        group.add_argument("--bp-max-iters", dest="bp_max_iters", type=int, default=None, help="BP iteration cap")
        group.add_argument("--bp-schedule", dest="bp_schedule", choices=["synchronous", "sequential"], default=None,
                           help="BP update schedule")

    @staticmethod
    def add_circuit_arguments(parser: argparse.ArgumentParser):
        group = parser.add_argument_group("circuit")
        source = group.add_mutually_exclusive_group()
        source.add_argument("--circuit", help="Circuit JSON file")
        source.add_argument("--heisenberg", action="store_true", help="Heisenberg Trotter circuit on the graph edges")
        group.add_argument("--layers", type=int, default=1, help="Trotter steps for --heisenberg")
        group.add_argument("--dt", type=float, default=0.1, help="Trotter time step")
        group.add_argument("--J", dest="coupling", type=float, default=1.0, help="Heisenberg coupling")

    @staticmethod
    def add_initial_state_arguments(parser: argparse.ArgumentParser):
        group = parser.add_argument_group("initial state")
        start = group.add_mutually_exclusive_group()
        start.add_argument("--initial", choices=INITIAL_STATES, default="zeros", help="Initial product state")
        start.add_argument("--bits", help="Initial bitstring, qubit 0 first")

    @staticmethod
    def add_boundary_arguments(parser: argparse.ArgumentParser):
        group = parser.add_argument_group("boundary MPS")
        group.add_argument("--partition", choices=["columns", "rows", "diagonal"], default=None,
                           help="Line partition strategy")
        group.add_argument("--fit-sweeps", dest="fit_sweeps", type=int, default=None, help="Maximum fitting sweeps")
        group.add_argument("--fit-tol", dest="fit_tol", type=float, default=None, help="Fitting convergence tolerance")

    def initial_bits(self, graph: NetworkGraph) -> List[int]:
        if getattr(self.args, "bits", None):
            return list(as_bitstring(self.args.bits, graph.n))
        if getattr(self.args, "initial", "zeros") == "domain-wall":
            return list(domain_wall(graph))
        return [0] * graph.n

    def prepare_initial_state(self, graph: NetworkGraph) -> TensorNetworkState:
        return product_state(graph, self.initial_bits(graph))

    def prepare_circuit(self, graph: NetworkGraph) -> Circuit:
        """Circuit from --circuit, --heisenberg, or the empty circuit."""
        if getattr(self.args, "circuit", None):
            return load_circuit(self.args.circuit)
        if getattr(self.args, "heisenberg", False):
            if self.args.layers < 0:
                raise ValidationError(f"--layers must be >= 0, got {self.args.layers}")
            return heisenberg_trotter_circuit(graph, self.args.coupling, self.args.dt, self.args.layers)
        return Circuit(n=graph.n, layers=())

    def load_graph_argument(self, path: str) -> NetworkGraph:
        graph = load_graph(path)
        self.logger.info("Graph %s: %d qubits, %d edges", graph.name, graph.n, len(graph.edges))
        return graph
