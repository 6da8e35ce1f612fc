#!/usr/bin/env python3
"""
Build a qubit connectivity graph and write it as graph JSON
"""

import sys
from collections import Counter
from pathlib import Path

# Add lib directory to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from lib.lattices import PRESETS, build_lattice
from lib.network import primitive_loops, save_graph
from lib.script_base import SimulationScript
from lib.utils import print_table
from lib.validators import ValidationError, parse_dimensions


class BuildLatticeScript(SimulationScript):
    """Write chain, grid, heavy-hex, custom or preset graphs"""

    def setup_arguments(self, parser):
        """Add script-specific arguments"""
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--kind', choices=['chain', 'heavy-hex', 'rotated-square', 'custom-adjacency'],
                            help='Lattice family')
        source.add_argument('--preset', choices=sorted(PRESETS), help='Published device layout')
        parser.add_argument('--n', type=int, help='Number of qubits (chain)')
        parser.add_argument('--rows', type=int, help='Rows (rotated-square)')
        parser.add_argument('--cols', type=int, help='Columns (rotated-square)')
        parser.add_argument('--cells', help='Heavy-hex cells as ROWSxCOLS, e.g. 2x2')
        parser.add_argument('--adjacency', help='Adjacency JSON file (custom-adjacency)')
        parser.add_argument('--out', help='Output graph JSON (default: <output_directory>/<name>.json)')

    def validate_arguments(self):
        """Check the parameters each lattice kind needs"""
        kind = self.args.kind
        if kind == 'chain' and self.args.n is None:
            raise ValidationError("--kind chain needs --n")
        if kind == 'rotated-square' and (self.args.rows is None or self.args.cols is None):
            raise ValidationError("--kind rotated-square needs --rows and --cols")
        if kind == 'heavy-hex' and self.args.cells is None:
            raise ValidationError("--kind heavy-hex needs --cells ROWSxCOLS")
        if kind == 'custom-adjacency' and self.args.adjacency is None:
            raise ValidationError("--kind custom-adjacency needs --adjacency FILE")

    def execute(self):
        """Main script logic"""
        if self.args.preset:
            graph = build_lattice('preset', {'name': self.args.preset})
        elif self.args.kind == 'heavy-hex':
            rows, cols = parse_dimensions(self.args.cells, 'cells')
            graph = build_lattice('heavy-hex', {'rows': rows, 'cols': cols})
        else:
            params = {
                'n': self.args.n,
                'rows': self.args.rows,
                'cols': self.args.cols,
                'adjacency': self.args.adjacency,
            }
            graph = build_lattice(self.args.kind, {k: v for k, v in params.items() if v is not None})

        loops = primitive_loops(graph)
        lengths = Counter(len(loop) for loop in loops)
        print_table([{
            'name': graph.name,
            'qubits': graph.n,
            'edges': len(graph.edges),
            'z': graph.coordination_number,
            'loops': len(loops),
            'loop_lengths': ", ".join(f"{size}x{count}" for size, count in sorted(lengths.items())) or "-",
        }])

        output_file = self.output_path(f"{graph.name}.json")
        if not self.dry_run_check(f"Write graph {graph.name} to {output_file}"):
            save_graph(graph, output_file)
            self.logger.info(f"Graph written to {output_file}")


def main(argv=None):
    script = BuildLatticeScript(
        name='build_lattice',
        description='Build a qubit connectivity graph (chain, rotated-square, heavy-hex, custom, preset)'
    )
    return script.run(argv)


if __name__ == '__main__':
    sys.exit(main())
