"""Shared fixtures: the expensive trajectories are session-scoped.

The "paper" configuration (JC coupling, omega_E = 0.9 omega_S, g = 0.1,
beta = 1, p_e = 0.25, p_eg = 0.1i, t <= 100) is the ModelConfig default.
"""

import numpy as np
import pytest

from qtledger.model import CouplingKind, ModelConfig
from qtledger.propagation import evolve, generator_from_map, map_series
from qtledger import frameworks as fw


@pytest.fixture(scope="session")
def jc_cfg():
    return ModelConfig().resolve()


@pytest.fixture(scope="session")
def jc_traj(jc_cfg):
    return evolve(jc_cfg)


@pytest.fixture(scope="session")
def jc_gen(jc_cfg):
    """Coarse-grid generator (the trajectory dt, no refinement)."""
    return generator_from_map(map_series(jc_cfg), jc_cfg.dt)


@pytest.fixture(scope="session")
def jc_d(jc_cfg):
    """(refined framework-D ledger, fine GeneratorSeries)."""
    return fw.minimal_dissipation_run(jc_cfg)


@pytest.fixture(scope="session")
def jc_ledgers(jc_traj, jc_d):
    return {
        "A": fw.lembas_ledger(jc_traj),
        "B": fw.nonlocal_ledger(jc_traj),
        "C": fw.decomposition_ledger(jc_traj),
        "D": jc_d[0],
    }


@pytest.fixture(scope="session")
def displaced_traj():
    return evolve(ModelConfig(coupling=CouplingKind.DISPLACED).resolve())


@pytest.fixture(scope="session")
def dispersive_traj():
    return evolve(ModelConfig(coupling=CouplingKind.DISPERSIVE).resolve())


@pytest.fixture(scope="session")
def displaced_d():
    return fw.minimal_dissipation_run(ModelConfig(coupling=CouplingKind.DISPLACED))


@pytest.fixture(scope="session")
def dispersive_d():
    return fw.minimal_dissipation_run(ModelConfig(coupling=CouplingKind.DISPERSIVE))


@pytest.fixture(scope="session")
def resonance_traj():
    return evolve(ModelConfig(omega_e=1.0).resolve())


@pytest.fixture(scope="session")
def diagonal_traj():
    return evolve(ModelConfig(p_eg=0.0).resolve())


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240917)


def random_density_matrix(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)
