"""Unit tests for Hamiltonian construction, states and truncation."""

import numpy as np
import pytest

from qtledger import linalg
from qtledger.model import (
    ConfigError,
    CouplingKind,
    ModelConfig,
    NUMBER_QUBIT,
    SIGMA_MINUS,
    SIGMA_PLUS,
    build_hamiltonians,
    choose_truncation,
    initial_state,
    lowering,
    qubit_state,
    thermal_state,
)


def comm(a, b):
    return a @ b - b @ a


class TestCouplingKind:
    def test_parse(self):
        assert CouplingKind.parse("jc") is CouplingKind.JAYNES_CUMMINGS
        assert CouplingKind.parse("Displaced") is CouplingKind.DISPLACED
        with pytest.raises(ConfigError):
            CouplingKind.parse("rabi")


class TestHamiltonians:
    def test_all_hermitian(self):
        for kind in CouplingKind:
            cfg = ModelConfig(coupling=kind, n_osc=12)
            for h in build_hamiltonians(cfg):
                assert linalg.hermiticity_defect(h) < 1e-13

    def test_jc_commutator(self):
        # [H_SE, H_S] = g omega_S (sigma a^dag - sigma^dag a)
        cfg = ModelConfig(n_osc=12)
        h_s, _, h_se, _ = build_hamiltonians(cfg)
        a = lowering(12)
        expected = cfg.g * cfg.omega_s * (
            np.kron(SIGMA_MINUS, a.conj().T) - np.kron(SIGMA_PLUS, a)
        )
        assert np.abs(comm(h_se, h_s) - expected).max() < 1e-13

    def test_displaced_partially_commuting(self):
        cfg = ModelConfig(coupling=CouplingKind.DISPLACED, n_osc=12)
        h_s, h_e, h_se, _ = build_hamiltonians(cfg)
        assert np.abs(comm(h_se, h_s)).max() < 1e-13
        assert np.abs(comm(h_se, h_e)).max() > 1e-3

    def test_dispersive_fully_commuting(self):
        cfg = ModelConfig(coupling=CouplingKind.DISPERSIVE, n_osc=12)
        h_s, h_e, h_se, _ = build_hamiltonians(cfg)
        assert np.abs(comm(h_se, h_s)).max() < 1e-13
        assert np.abs(comm(h_se, h_e)).max() < 1e-13

    def test_jc_conserves_excitation_number(self):
        for omega_e in (0.9, 1.0, 0.5):
            cfg = ModelConfig(omega_e=omega_e, n_osc=10)
            _, _, _, h = build_hamiltonians(cfg)
            a = lowering(10)
            n_tot = np.kron(NUMBER_QUBIT, np.eye(10)) + np.kron(np.eye(2), a.conj().T @ a)
            assert np.abs(comm(h, n_tot)).max() < 1e-13


class TestThermalState:
    def test_zero_temperature_limit(self):
        rho = thermal_state(1.0, 50.0, 10)
        assert np.isclose(rho[0, 0].real, 1.0, atol=1e-15)
        assert np.abs(np.diag(rho)[1:]).max() < 1e-20

    def test_mean_occupation(self):
        rho = thermal_state(0.9, 1.0, 40)
        nbar = np.sum(np.arange(40) * np.diag(rho).real)
        assert np.isclose(nbar, 1.0 / np.expm1(0.9), atol=1e-6)

    def test_truncation_tail(self):
        p = np.exp(-0.9 * np.arange(40))
        p /= 1.0 / (1.0 - np.exp(-0.9))  # untruncated normalization
        assert 1.0 - p.sum() < 1e-10

    def test_commutes_with_h_e(self):
        rho = thermal_state(0.9, 1.0, 8)
        h_e = 0.9 * np.diag(np.arange(8)).astype(complex)
        assert np.abs(comm(rho, h_e)).max() == 0.0


class TestChooseTruncation:
    def test_paper_value(self):
        assert choose_truncation(1.0, 0.9) == 36

    def test_near_ground_state(self):
        assert choose_truncation(50.0, 1.0) == 11

    def test_monotone_in_eps(self):
        assert choose_truncation(0.5, 1.0, 1e-14) > choose_truncation(0.5, 1.0, 1e-10)


class TestStates:
    def test_paper_initial_state(self):
        cfg = ModelConfig(p_e=0.25, p_eg=0.1j).resolve()
        rho = initial_state(cfg)
        assert np.isclose(np.trace(rho), 1.0)
        assert np.linalg.eigvalsh(rho).min() > -1e-12

    def test_pure_excited(self):
        rho = initial_state(ModelConfig(p_e=1.0, p_eg=0.0, n_osc=8))
        rho_s = linalg.partial_trace(rho, 2, 8, "S")
        assert np.allclose(rho_s, np.diag([1.0, 0.0]))

    def test_psd_boundary(self):
        qubit_state(0.5, 0.5)  # boundary accepted
        with pytest.raises(ConfigError):
            qubit_state(0.5, 0.51)

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            ModelConfig(beta=-1.0).validate()
        with pytest.raises(ConfigError):
            ModelConfig(p_e=1.5).validate()
        with pytest.raises(ConfigError):
            ModelConfig(p_e=0.25, p_eg=0.6).validate()

    def test_resolve_defaults(self):
        cfg = ModelConfig().resolve()
        assert cfg.n_osc == 36
        assert np.isclose(cfg.dt, 0.005 * 2 * np.pi)
