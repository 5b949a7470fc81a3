import pytest

from calsat.backend import SolverBackend


@pytest.fixture(scope="session")
def backend():
    """One shared solver process for the whole test run."""
    b = SolverBackend()
    yield b
    b.close()
