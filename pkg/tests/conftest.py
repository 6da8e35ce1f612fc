"""
Test configuration and fixtures for pytest
"""

import json
import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from lib.lattices import chain, heavy_hex, rotated_square
from lib.network import product_state
from oracle import random_state


@pytest.fixture
def chain4():
    """Four qubits on a line"""
    return chain(4)


@pytest.fixture
def grid_2x2():
    """2x2 square grid: one loop of four"""
    return rotated_square(2, 2)


@pytest.fixture
def grid_2x3():
    """2x3 square grid: two loops of four"""
    return rotated_square(2, 3)


@pytest.fixture
def grid_3x3():
    """3x3 square grid: four loops, coordination number 4"""
    return rotated_square(3, 3)


@pytest.fixture
def heavy_hex_cell():
    """Single heavy-hex cell: 12 qubits on one loop"""
    return heavy_hex(1, 1)


@pytest.fixture
def zero_state():
    """Factory for |0...0> on a graph"""
    return lambda graph: product_state(graph, [0] * graph.n)


@pytest.fixture
def make_state():
    """Factory for random complex states: make_state(graph, bond_dim=2, seed=0)"""
    return random_state


@pytest.fixture
def temp_config_file(tmp_path):
    """Temporary config file overriding a few defaults"""
    config = {
        'chi': 4,
        'boundary_rank': 6,
        'n_samples': 10,
        'seed': 7,
        'log_level': 'WARNING',
    }
    path = tmp_path / 'config.json'
    path.write_text(json.dumps(config))
    return path
