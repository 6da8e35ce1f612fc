#!/usr/bin/env python3
"""
Write a first-order Heisenberg Trotter circuit for a graph
"""

import sys
from pathlib import Path

# Add lib directory to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from lib.circuit import save_circuit
from lib.script_base import SimulationScript
from lib.trotter import edge_coloring, heisenberg_trotter_circuit
from lib.utils import print_table


class TrotterCircuitScript(SimulationScript):
    """Colour the edges and emit L Trotter steps of exp(-i dt J (XX+YY+ZZ))"""

    def setup_arguments(self, parser):
        """Add script-specific arguments"""
        parser.add_argument('--graph', required=True, help='Graph JSON file')
        parser.add_argument('--layers', type=int, default=1, help='Number of Trotter steps L')
        parser.add_argument('--dt', type=float, default=0.1, help='Time step')
        parser.add_argument('--J', dest='coupling', type=float, default=1.0, help='Coupling constant')
        parser.add_argument('--out', help='Output circuit JSON')

    def execute(self):
        """Main script logic"""
        graph = self.load_graph_argument(self.args.graph)
        colours = edge_coloring(graph)
        print_table([{'colour': i, 'edges': len(group)} for i, group in enumerate(colours)])

        circuit = heisenberg_trotter_circuit(graph, self.args.coupling, self.args.dt, self.args.layers)
        self.logger.info(
            f"{self.args.layers} Trotter steps x {len(colours)} colours = {circuit.depth} layers, "
            f"{circuit.num_gates} gates"
        )

        output_file = self.output_path(f"{graph.name}_heisenberg_L{self.args.layers}.json")
        if not self.dry_run_check(f"Write circuit to {output_file}"):
            save_circuit(circuit, output_file)
            self.logger.info(f"Circuit written to {output_file}")


def main(argv=None):
    script = TrotterCircuitScript(
        name='trotter_circuit',
        description='Write a Heisenberg Trotter circuit (one layer per edge colour)'
    )
    return script.run(argv)


if __name__ == '__main__':
    sys.exit(main())
