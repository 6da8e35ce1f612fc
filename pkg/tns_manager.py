#!/usr/bin/env python3
"""
Command dispatcher for the planar TNS simulator
Usage: tns_manager.py <command> [options]   (tns_manager.py <command> --help for details)
"""

import importlib
import sys
from pathlib import Path

# Add lib directory to path
sys.path.insert(0, str(Path(__file__).parent))

# command -> (module, summary)
COMMANDS = {
    'build-lattice': ('scripts.lattice.build_lattice', 'Build a chain, grid, heavy-hex, custom or preset graph'),
    'trotter-circuit': ('scripts.simulation.trotter_circuit', 'Write a Heisenberg Trotter circuit for a graph'),
    'run': ('scripts.simulation.run_circuit', 'Apply a circuit with BP-gauged truncation; save state + metrics'),
    'sample': ('scripts.sampling.sample', 'Boundary-MPS bitstring sampling with p(x) verification'),
    'expect': ('scripts.analysis.expect', 'Pauli-string expectation values at one or more ranks'),
    'bp-error': ('scripts.analysis.bp_error', 'Per-loop BP error report, optionally per Trotter step'),
}


class TNSManagerCLI:
    """Dispatch a subcommand to its script"""

    def print_header(self):
        """Print application header"""
        print("\n" + "=" * 60)
        print("  PLANAR TNS SIMULATOR")
        print("=" * 60 + "\n")

    def print_usage(self):
        """Print the command list"""
        self.print_header()
        print("Usage: tns <command> [options]\n")
        print("Commands:")
        width = max(len(name) for name in COMMANDS)
        for name, (_, summary) in COMMANDS.items():
            print(f"  {name.ljust(width)}  {summary}")
        print("\nRun 'tns <command> --help' for the options of a command.")

    def run(self, argv):
        """Run a command and return its exit code"""
        if not argv or argv[0] in ('-h', '--help', 'help'):
            self.print_usage()
            return 0
        command, rest = argv[0], argv[1:]
        if command not in COMMANDS:
            print(f"Unknown command: {command}\n", file=sys.stderr)
            self.print_usage()
            return 2
        module = importlib.import_module(COMMANDS[command][0])
        return module.main(rest)


def main(argv=None):
    """Main entry point"""
    return TNSManagerCLI().run(sys.argv[1:] if argv is None else list(argv))


if __name__ == '__main__':
    sys.exit(main())
