#!/usr/bin/env python3
"""
Pauli-string expectation values by boundary-MPS contraction at one or more ranks
"""

import sys
from pathlib import Path

# Add lib directory to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from lib.boundary_mps import expectation, norm_environments, norm_value
from lib.observables import PauliString
from lib.partitioning import partition_line
from lib.script_base import SimulationScript
from lib.state_io import load_state
from lib.utils import print_table, save_to_json
from lib.validators import validate_ranks


class ExpectScript(SimulationScript):
    """Evaluate <O> for each observable at each boundary rank (a convergence table)"""

    def setup_arguments(self, parser):
        """Add script-specific arguments"""
        parser.add_argument('--state', required=True, help='State file written by the run command')
        parser.add_argument('--observable', '-O', dest='observables', action='append', required=True,
                            help="Pauli string such as 'Z5' or 'Z5 Z6' (repeatable)")
        parser.add_argument('--R', dest='ranks', type=int, nargs='+', help='Boundary rank(s)')
        self.add_boundary_arguments(parser)
        parser.add_argument('--out', help='Values JSON (default: <output_directory>/<state>_expect.json)')

    def validate_arguments(self):
        """Parse observables and ranks up front"""
        self.observables = [PauliString.parse(text) for text in self.args.observables]
        self.ranks = validate_ranks(self.args.ranks or [self.setting('boundary_rank')], 'R')

    def execute(self):
        """Main script logic"""
        state, _ = load_state(self.args.state)
        for observable in self.observables:
            observable.check_sites(state.n_qubits)
        partitioning = partition_line(state, self.setting('partition'))
        sweeps, tol = self.setting('fit_sweeps'), self.setting('fit_tol')

        rows = []
        for rank in self.ranks:
            env = norm_environments(state, partitioning, rank, sweeps, tol, both_directions=True)
            norm = norm_value(state, partitioning, env)
            for observable in self.observables:
                value = expectation(state, observable, partitioning, rank, env, sweeps, tol)
                rows.append({'observable': observable.label, 'R': rank, 'value': value, 'norm': norm})
                self.logger.debug(f"<{observable.label}> at R={rank}: {value:.12f}")

        print_table(rows)

        output_file = self.output_path(f"{Path(self.args.state).stem}_expect.json")
        if not self.dry_run_check(f"Write {len(rows)} values to {output_file}"):
            save_to_json({'partition': partitioning.strategy, 'values': rows}, output_file)
            self.logger.info(f"Values written to {output_file}")


def main(argv=None):
    script = ExpectScript(
        name='expect',
        description='Pauli-string expectation values from boundary-MPS contraction'
    )
    return script.run(argv)


if __name__ == '__main__':
    sys.exit(main())
