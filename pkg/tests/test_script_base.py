"""
Tests for SimulationScript base class
"""

from pathlib import Path
from unittest.mock import Mock, patch

import pytest

from lib.lattices import chain
from lib.script_base import (
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_INTERRUPTED,
    EXIT_NUMERICAL,
    EXIT_OK,
    SimulationScript,
)
from lib.tensor_core import NumericalError
from lib.validators import ValidationError


class DummyScript(SimulationScript):
    """Test script for testing base class"""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.execute_called = False
        self.setup_called = False
        self.cleanup_called = False

    def setup_arguments(self, parser):
        parser.add_argument('--test-arg', default='test', help='Test argument')
        self.add_engine_arguments(parser)
        self.add_circuit_arguments(parser)
        self.add_initial_state_arguments(parser)
        parser.add_argument('--out', default=None)

    def setup(self):
        self.setup_called = True

    def execute(self):
        self.execute_called = True
        self.logger.info("Script executed")

    def cleanup(self):
        self.cleanup_called = True


class FailingScript(SimulationScript):
    """Script that raises a configurable error during execution"""

    def __init__(self, error, *args, **kwargs):
        super().__init__('failing_script', 'Fails', *args, **kwargs)
        self.error = error
        self.cleanup_called = False

    def execute(self):
        raise self.error

    def cleanup(self):
        self.cleanup_called = True


class TestArgumentParsing:
    """Test argument parsing"""

    def test_common_arguments(self):
        """Common flags are present on every script"""
        parser = DummyScript('test_script', 'Test Description').create_parser()
        args = parser.parse_args(['--dry-run', '--log-level', 'DEBUG', '--seed', '5', '--threads', '2'])
        assert args.dry_run is True
        assert args.log_level == 'DEBUG'
        assert args.seed == 5
        assert args.threads == 2
        assert parser.prog == 'test-script'

    def test_custom_arguments(self):
        """Subclass arguments are added"""
        script = DummyScript('test_script', 'Test Description')
        parser = script.create_parser()
        script.setup_arguments(parser)
        args = parser.parse_args(['--test-arg', 'custom', '--chi', '8', '--bp-policy', 'never'])
        assert args.test_arg == 'custom'
        assert args.chi == 8
        assert args.bp_policy == 'never'


@patch('lib.script_base.setup_logger', return_value=Mock())
class TestScriptLifecycle:
    """Test script lifecycle management"""

    @patch('lib.script_base.load_config', return_value={})
    def test_successful_run(self, mock_load_config, mock_logger):
        """Hooks run in order and exit 0"""
        script = DummyScript('test_script', 'Test Description')
        assert script.run([]) == EXIT_OK
        assert script.setup_called and script.execute_called and script.cleanup_called

    @pytest.mark.parametrize('error,code', [
        (ValidationError('bad chi'), EXIT_CONFIG),
        (FileNotFoundError('graph.json'), EXIT_CONFIG),
        (NumericalError('all singular values below cutoff'), EXIT_NUMERICAL),
        (RuntimeError('boom'), EXIT_FAILURE),
        (KeyboardInterrupt(), EXIT_INTERRUPTED),
    ])
    @patch('lib.script_base.load_config', return_value={})
    def test_exit_codes(self, mock_load_config, mock_logger, error, code):
        """Failures map to exit codes and cleanup always runs"""
        script = FailingScript(error)
        assert script.run([]) == code
        assert script.cleanup_called

    @patch('lib.script_base.load_config', return_value={})
    def test_bad_arguments(self, mock_load_config, mock_logger):
        """argparse errors exit with status 2"""
        with pytest.raises(SystemExit) as excinfo:
            DummyScript('test_script', 'Test').run(['--chi', 'many'])
        assert excinfo.value.code == 2

    def test_missing_explicit_config(self, mock_logger, tmp_path):
        """A missing --config file is a configuration error"""
        script = DummyScript('test_script', 'Test')
        assert script.run(['--config', str(tmp_path / 'absent.json')]) == EXIT_CONFIG
        assert not script.execute_called

    def test_missing_default_config(self, mock_logger, tmp_path):
        """A missing default config falls back to built-in settings"""
        script = DummyScript('test_script', 'Test', config_path=str(tmp_path / 'absent.json'))
        assert script.run([]) == EXIT_OK
        assert script.config == {}

    def test_invalid_config(self, mock_logger, tmp_path):
        """Unparseable config files are configuration errors"""
        path = tmp_path / 'config.json'
        path.write_text('{"chi": ')
        assert DummyScript('test_script', 'Test').run(['--config', str(path)]) == EXIT_CONFIG


@patch('lib.script_base.setup_logger', return_value=Mock())
class TestSettings:
    """Test setting precedence and shared helpers"""

    def test_precedence(self, mock_logger, temp_config_file):
        """Command line beats config file beats defaults"""
        script = DummyScript('test_script', 'Test')
        assert script.run(['--config', str(temp_config_file), '--chi', '12']) == EXIT_OK
        assert script.setting('chi') == 12
        assert script.setting('seed') == 7
        assert script.setting('bp_policy') == 'per-layer'
        assert script.setting('unknown') is None

    def test_output_path(self, mock_logger, temp_config_file, tmp_path):
        """--out wins over output_directory"""
        script = DummyScript('test_script', 'Test')
        script.run(['--config', str(temp_config_file)])
        assert script.output_path('state.tns') == Path('output') / 'state.tns'
        script.run(['--config', str(temp_config_file), '--out', str(tmp_path / 'x.tns')])
        assert script.output_path('state.tns') == tmp_path / 'x.tns'

    def test_dry_run_check(self, mock_logger):
        """Dry runs skip the operation"""
        script = DummyScript('test_script', 'Test', config_path='/nonexistent/config.json')
        script.run(['--dry-run'])
        assert script.dry_run_check('write state') is True
        script.run([])
        assert script.dry_run_check('write state') is False

    def test_initial_bits(self, mock_logger):
        """Initial states come from --bits, --initial or zeros"""
        graph = chain(4)
        script = DummyScript('test_script', 'Test', config_path='/nonexistent/config.json')
        script.run([])
        assert script.initial_bits(graph) == [0, 0, 0, 0]
        script.run(['--initial', 'domain-wall'])
        assert script.initial_bits(graph) == [0, 0, 1, 1]
        script.run(['--bits', '1010'])
        assert script.initial_bits(graph) == [1, 0, 1, 0]

    def test_prepare_circuit(self, mock_logger):
        """--heisenberg builds a Trotter circuit; nothing gives the empty circuit"""
        graph = chain(4)
        script = DummyScript('test_script', 'Test', config_path='/nonexistent/config.json')
        script.run([])
        assert script.prepare_circuit(graph).depth == 0
        script.run(['--heisenberg', '--layers', '2', '--dt', '0.05'])
        circuit = script.prepare_circuit(graph)
        assert circuit.depth == 4
        assert all(gate.params == (1.0, 0.05) for gate in circuit.gates())
        script.run(['--heisenberg', '--layers', '-1'])
        with pytest.raises(ValidationError):
            script.prepare_circuit(graph)
