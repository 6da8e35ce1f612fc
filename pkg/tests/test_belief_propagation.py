"""
Tests for belief propagation, the BP norm and per-loop BP errors
"""

import logging

import numpy as np
import pytest

from lib.belief_propagation import bp_norm, initial_environment, loop_error, run_bp
from lib.engine import run_circuit
from lib.lattices import heavy_hex, rotated_square
from lib.network import bond_label, domain_wall, exact_norm, product_state, to_dense
from lib.tensor_core import IndexedTensor, contract
from lib.trotter import heisenberg_trotter_circuit
from lib.validators import ValidationError


class TestRunBP:
    """Test message iteration"""

    def test_tree_converges(self, chain4, make_state):
        """BP on a tree converges to Hermitian, unit-norm messages"""
        state = make_state(chain4, bond_dim=3, seed=1)
        env = run_bp(state)
        assert env.converged
        assert env.residual <= 1e-10
        for message in env.messages.values():
            matrix = message.data
            np.testing.assert_allclose(matrix, matrix.conj().T, atol=1e-12)
            assert np.linalg.norm(matrix) == pytest.approx(1.0)
            assert np.linalg.eigvalsh(matrix).min() > -1e-10

    @pytest.mark.parametrize('schedule', ['synchronous', 'sequential'])
    def test_norm_exact_on_tree(self, chain4, make_state, schedule):
        """The BP norm is exact on trees for both schedules"""
        state = make_state(chain4, bond_dim=2, seed=2)
        env = run_bp(state, schedule=schedule)
        assert bp_norm(state, env).value == pytest.approx(exact_norm(state), rel=1e-8)

    def test_threaded_sweeps(self, grid_2x3, make_state):
        """Threaded synchronous sweeps give the same messages"""
        state = make_state(grid_2x3, bond_dim=2, seed=3)
        serial = run_bp(state, max_iters=5)
        threaded = run_bp(state, max_iters=5, workers=3)
        for key, message in serial.messages.items():
            np.testing.assert_allclose(threaded.messages[key].data, message.data, atol=1e-12)

    def test_warm_start(self, grid_2x3, make_state):
        """Converged messages are a fixed point"""
        state = make_state(grid_2x3, bond_dim=2, seed=4)
        cold = run_bp(state, tol=1e-12, max_iters=500)
        warm = run_bp(state, tol=1e-8, initial=cold)
        assert warm.converged
        assert warm.iterations <= 2

    def test_incompatible_warm_start(self, grid_2x3, make_state):
        """Messages with stale dimensions are replaced by identities"""
        small = run_bp(make_state(grid_2x3, bond_dim=1, seed=5))
        env = run_bp(make_state(grid_2x3, bond_dim=2, seed=5), initial=small)
        assert env.is_compatible(make_state(grid_2x3, bond_dim=2, seed=5))

    def test_not_converged(self, grid_2x3, make_state, caplog):
        """Exhausting max_iters is reported, not raised"""
        state = make_state(grid_2x3, bond_dim=2, seed=6)
        with caplog.at_level(logging.WARNING):
            env = run_bp(state, tol=1e-15, max_iters=1)
        assert not env.converged
        assert env.iterations == 1
        assert 'did not converge' in caplog.text

    def test_invalid_arguments(self, chain4, zero_state):
        """Unknown schedules and empty iteration budgets are rejected"""
        state = zero_state(chain4)
        with pytest.raises(ValidationError):
            run_bp(state, schedule='random')
        with pytest.raises(ValidationError):
            run_bp(state, max_iters=0)

    def test_initial_environment(self, grid_2x3, make_state):
        """Initial messages are normalized identities"""
        env = initial_environment(make_state(grid_2x3, bond_dim=2))
        np.testing.assert_allclose(env.message(0, 1).data, np.eye(2) / np.sqrt(2))


class TestLoopError:
    """Test per-loop BP error reports"""

    def test_product_state_has_no_error(self, grid_2x3, zero_state):
        """Unit bonds leave nothing for the loops to correct"""
        state = zero_state(grid_2x3)
        report = loop_error(state, run_bp(state))
        assert len(report.per_loop) == 2
        assert report.max_error == pytest.approx(0.0, abs=1e-12)

    def test_random_state(self, grid_2x3, make_state):
        """Errors lie in [0, 1) and every loop reports its cut edge"""
        state = make_state(grid_2x3, bond_dim=2, seed=7)
        report = loop_error(state, run_bp(state))
        assert [loop.cut_edge for loop in report.per_loop] == [(0, 1), (1, 2)]
        for loop in report.per_loop:
            assert 0.0 <= loop.error < 1.0
            assert loop.spectrum_size == 4
        assert report.mean_error <= report.max_error

    def test_tree_report_is_empty(self, chain4, make_state):
        """Trees have no loops to report"""
        state = make_state(chain4)
        report = loop_error(state, run_bp(state))
        assert report.to_dict()['n_loops'] == 0
        assert report.mean_error == 0.0

    @pytest.mark.parametrize('bond_dim,seed', [(2, 7), (3, 9), (4, 10)])
    def test_error_bound(self, grid_3x3, make_state, bond_dim, seed):
        """Each loop error stays below 1 - 1/chi^2 for the chi of its cut edge"""
        state = make_state(grid_3x3, bond_dim=bond_dim, seed=seed)
        for loop in loop_error(state, run_bp(state)).per_loop:
            chi = state.bond_dimension(*loop.cut_edge)
            assert loop.spectrum_size == chi ** 2
            assert 0.0 <= loop.error <= 1.0 - 1.0 / chi ** 2 + 1e-12

    def test_grid_loops_exceed_heavy_hex_loop(self):
        """Heisenberg dynamics builds more loop error on a 12-qubit grid than on a 12-qubit heavy-hex cell"""
        mean_errors = {}
        for graph in (rotated_square(3, 4), heavy_hex(1, 1)):
            state = product_state(graph, domain_wall(graph))
            step = heisenberg_trotter_circuit(graph, coupling=1.0, layers=1)
            per_depth = []
            for _ in range(3):
                state, _ = run_circuit(state, step, chi=256)
                env = run_bp(state)
                report = loop_error(state, env)
                for loop in report.per_loop:
                    assert loop.error <= 1.0 - 1.0 / state.bond_dimension(*loop.cut_edge) ** 2 + 1e-12
                per_depth.append(report.mean_error)
            mean_errors[graph.name] = per_depth

        grid, cell = mean_errors['rotated_square_3x4'], mean_errors['heavy_hex_1x1']
        for depth in (2, 3):
            assert grid[depth - 1] > cell[depth - 1]


class TestBPNorm:
    """Test the BP norm estimate"""

    def test_gauge_invariance(self, grid_2x3, make_state):
        """A matrix and its inverse inserted on a bond leave the BP norm unchanged"""
        state = make_state(grid_2x3, bond_dim=2, seed=8)
        u, v = 1, 4
        label = bond_label(u, v)
        rng = np.random.default_rng(8)
        gauge = 2.0 * np.eye(2) + rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        left = contract(state.tensor(u), IndexedTensor.from_array([label, '#g'], gauge)).relabel({'#g': label})
        right = contract(IndexedTensor.from_array(['#g', label], np.linalg.inv(gauge)), state.tensor(v))
        gauged = state.replace({u: left, v: right.relabel({'#g': label})})
        np.testing.assert_allclose(to_dense(gauged), to_dense(state), atol=1e-10)

        before = bp_norm(state, run_bp(state, tol=1e-12, max_iters=1000))
        after = bp_norm(gauged, run_bp(gauged, tol=1e-12, max_iters=1000))
        assert after.value == pytest.approx(before.value, rel=1e-8)
