#!/usr/bin/env python3
"""
Apply a circuit to a product state with BP-gauged truncated SVD updates
Writes the final state and a metrics JSON with per-gate errors and the fidelity estimate
"""

import sys
from pathlib import Path

# Add lib directory to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from lib.engine import run_circuit
from lib.network import format_bits, magnetization_sector, memory_footprint
from lib.script_base import SimulationScript
from lib.state_io import save_state
from lib.utils import format_bytes, format_duration, save_to_json
from lib.validators import ValidationError


class RunCircuitScript(SimulationScript):
    """Evolve a tensor network state through a circuit file or a Heisenberg Trotter circuit"""

    def setup_arguments(self, parser):
        """Add script-specific arguments"""
        parser.add_argument('--graph', required=True, help='Graph JSON file')
        self.add_circuit_arguments(parser)
        self.add_initial_state_arguments(parser)
        self.add_engine_arguments(parser)
        parser.add_argument('--out', help='Output state file (default: <output_directory>/<graph>.tns)')
        parser.add_argument('--metrics', help='Metrics JSON (default: next to the state file)')

    def validate_arguments(self):
        """Validate numeric flags"""
        if self.setting('chi') < 1:
            raise ValidationError(f"--chi must be >= 1, got {self.setting('chi')}")
        if self.setting('threads') < 1:
            raise ValidationError("--threads must be >= 1")

    def execute(self):
        """Main script logic"""
        graph = self.load_graph_argument(self.args.graph)
        circuit = self.prepare_circuit(graph).validate_for(graph)
        bits = self.initial_bits(graph)
        state = self.prepare_initial_state(graph)
        self.logger.info(
            f"Circuit: {circuit.num_gates} gates in {circuit.depth} layers; initial bits {format_bits(bits)}"
        )

        output_file = self.output_path(f"{graph.name}.tns")
        metrics_file = Path(self.args.metrics) if self.args.metrics else output_file.with_suffix('.metrics.json')
        if self.dry_run_check(f"Run circuit at chi={self.setting('chi')}, write {output_file} and {metrics_file}"):
            return

        state, log = run_circuit(
            state,
            circuit,
            chi=self.setting('chi'),
            cutoff=self.setting('cutoff'),
            bp_policy=self.setting('bp_policy'),
            bp_tol=self.setting('bp_tol'),
            bp_max_iters=self.setting('bp_max_iters'),
            bp_schedule=self.setting('bp_schedule'),
            reg_cutoff=self.setting('reg_cutoff'),
            workers=self.setting('threads'),
        )

        footprint = memory_footprint(state)
        metadata = {
            'graph': graph.name,
            'initial_bits': format_bits(bits),
            'chi': self.setting('chi'),
            'fidelity': log.fidelity,
            'circuit_depth': circuit.depth,
        }
        if circuit.conserves_magnetization():
            metadata['magnetization_sector'] = magnetization_sector(bits)

        save_state(state, output_file, metadata)
        metrics = {
            **log.to_dict(),
            'chi': self.setting('chi'),
            'max_bond_dimension': state.max_bond_dimension(),
            'memory_footprint_bytes': footprint,
            'state_file': str(output_file),
        }
        save_to_json(metrics, metrics_file)

        print(f"\nFidelity estimate f = {log.fidelity:.12f}")
        print(f"Max gate error:       {log.max_error:.3e}")
        print(f"Max bond dimension:   {state.max_bond_dimension()}")
        print(f"Memory footprint:     {format_bytes(footprint)}")
        print(f"Wall time:            {format_duration(log.wall_time)}")
        self.logger.info(f"State written to {output_file}, metrics to {metrics_file}")


def main(argv=None):
    script = RunCircuitScript(
        name='run_circuit',
        description='Apply a circuit to a tensor network state and log per-gate errors'
    )
    return script.run(argv)


if __name__ == '__main__':
    sys.exit(main())
