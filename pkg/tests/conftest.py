"""
Shared fixtures for the witnesslab test suite.
"""
import pytest

from state_engine import GraphSpec, SystemSpec, build_example_states, build_he_state


@pytest.fixture
def he2():
    """HE system with two DOFs (four qubits)."""
    return SystemSpec.he(2)


@pytest.fixture
def xi2():
    """|Xi> for n = 2."""
    return build_he_state(2)


@pytest.fixture
def example_states():
    """(psi1, psi2, rho_prime)"""
    return build_example_states()


@pytest.fixture
def graph_systems():
    """Path, star and ring graph systems up to ten vertices."""
    graphs = [GraphSpec.path(n) for n in range(2, 11)]
    graphs += [GraphSpec.star(n) for n in range(2, 11)]
    graphs += [GraphSpec.ring(n) for n in range(3, 11)]
    return [SystemSpec.of_graph(g) for g in graphs]
