#!/usr/bin/env python3
"""
Per-loop BP error report
Either for a saved state, or for every Trotter step while a circuit is applied (--per-layer)
"""

import sys
from pathlib import Path

# Add lib directory to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from lib.belief_propagation import loop_error, run_bp
from lib.engine import run_circuit
from lib.network import primitive_loops
from lib.script_base import SimulationScript
from lib.state_io import load_state
from lib.trotter import edge_coloring
from lib.utils import print_table, save_to_json
from lib.validators import ValidationError


class BPErrorScript(SimulationScript):
    """Report 1 - |lambda_1| / sum |lambda_i| for every primitive loop"""

    def setup_arguments(self, parser):
        """Add script-specific arguments"""
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--state', help='State file written by the run command')
        source.add_argument('--graph', help='Graph JSON file (evolve a circuit with --per-layer)')
        parser.add_argument('--per-layer', action='store_true',
                            help='Report the error after every Trotter step (every layer for circuit files)')
        self.add_circuit_arguments(parser)
        self.add_initial_state_arguments(parser)
        self.add_engine_arguments(parser)
        parser.add_argument('--out', help='Report JSON (default: <output_directory>/<name>_bp_error.json)')

    def validate_arguments(self):
        """--per-layer needs a graph to evolve on"""
        if self.args.per_layer and not self.args.graph:
            raise ValidationError("--per-layer needs --graph and a circuit")

    def _bp(self, state):
        return run_bp(
            state,
            tol=self.setting('bp_tol'),
            max_iters=self.setting('bp_max_iters'),
            schedule=self.setting('bp_schedule'),
            workers=self.setting('threads'),
        )

    def execute(self):
        """Main script logic"""
        if self.args.state:
            state, _ = load_state(self.args.state)
            name = Path(self.args.state).stem
            reports = [{'step': None, **loop_error(state, self._bp(state)).to_dict()}]
        else:
            graph = self.load_graph_argument(self.args.graph)
            name = graph.name
            state = self.prepare_initial_state(graph)
            circuit = self.prepare_circuit(graph)
            loops = primitive_loops(graph)
            stride = len(edge_coloring(graph)) if self.args.heisenberg else 1
            reports = []

            def after_layer(layer_index, current, env):
                if (layer_index + 1) % stride == 0:
                    report = loop_error(current, self._bp(current), loops)
                    reports.append({'step': (layer_index + 1) // stride, **report.to_dict()})
                    self.logger.info(f"Step {(layer_index + 1) // stride}: mean BP error {report.mean_error:.3e}")

            if self.args.per_layer:
                run_circuit(
                    state,
                    circuit,
                    chi=self.setting('chi'),
                    cutoff=self.setting('cutoff'),
                    bp_policy=self.setting('bp_policy'),
                    bp_tol=self.setting('bp_tol'),
                    bp_max_iters=self.setting('bp_max_iters'),
                    bp_schedule=self.setting('bp_schedule'),
                    reg_cutoff=self.setting('reg_cutoff'),
                    callback=after_layer,
                    workers=self.setting('threads'),
                )
            else:
                state, _ = run_circuit(
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
                reports.append({'step': None, **loop_error(state, self._bp(state), loops).to_dict()})

        print_table([
            {'step': r['step'] if r['step'] is not None else '-', 'loops': r['n_loops'],
             'mean_error': r['mean_error'], 'max_error': r['max_error']}
            for r in reports
        ])

        output_file = self.output_path(f"{name}_bp_error.json")
        if not self.dry_run_check(f"Write BP error report to {output_file}"):
            save_to_json(reports[0] if len(reports) == 1 and not self.args.per_layer else {'steps': reports},
                         output_file)
            self.logger.info(f"Report written to {output_file}")


def main(argv=None):
    script = BPErrorScript(
        name='bp_error',
        description='Per-loop belief-propagation error report'
    )
    return script.run(argv)


if __name__ == '__main__':
    sys.exit(main())
