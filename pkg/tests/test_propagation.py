"""Unit tests for exact evolution, the map matrix and its generator."""

import numpy as np
import pytest

from qtledger import linalg
from qtledger.model import CouplingKind, ModelConfig, thermal_state
from qtledger.propagation import (
    PAULI_NORM,
    dynamical_map_matrix,
    evolve,
    generator_from_map,
    map_series,
    _grid_derivative,
)
from qtledger.frameworks import _jc_amplitudes


class TestTrajectoryInvariants:
    def test_traces(self, jc_traj):
        assert np.abs(jc_traj.trace - 1.0).max() < 1e-10
        assert np.abs(np.einsum("mii->m", jc_traj.rho_s) - 1.0).max() < 1e-10
        assert np.abs(np.einsum("mii->m", jc_traj.rho_e) - 1.0).max() < 1e-10

    def test_energy_conserved(self, jc_traj):
        assert np.abs(jc_traj.energy - jc_traj.energy[0]).max() < 1e-10

    def test_chi_partial_traces_vanish(self, jc_traj):
        n = jc_traj.n_osc
        for i in (0, 57, len(jc_traj.times) - 1):
            chi = jc_traj.chi(i)
            assert np.abs(linalg.partial_trace(chi, 2, n, "S")).max() < 1e-10
            assert np.abs(linalg.partial_trace(chi, 2, n, "E")).max() < 1e-10

    def test_chi_zero_initially(self, jc_traj):
        assert np.abs(jc_traj.chi(0)).max() < 1e-13

    def test_exact_derivative(self, jc_traj):
        # rho_dot_s must agree with grid differences of rho_s to O(dt^2)
        cd = _grid_derivative(jc_traj.rho_s, jc_traj.cfg.dt)
        assert np.abs(cd - jc_traj.rho_dot_s)[1:-1].max() < 1e-3
        assert np.abs(cd - jc_traj.rho_dot_s)[1:-1].max() > 0.0

    def test_uncoupled(self):
        traj = evolve(ModelConfig(g=0.0, n_osc=8, t_max=5.0))
        pops = np.einsum("mii->mi", traj.rho_s).real
        assert np.abs(pops - pops[0]).max() < 1e-13
        assert np.abs(traj.chi(len(traj.times) - 1)).max() < 1e-13

    @pytest.mark.parametrize("kind", [CouplingKind.DISPLACED, CouplingKind.DISPERSIVE])
    def test_commuting_couplings_freeze_populations(self, kind, displaced_traj, dispersive_traj):
        traj = displaced_traj if kind is CouplingKind.DISPLACED else dispersive_traj
        pops = np.einsum("mii->mi", traj.rho_s).real
        assert np.abs(pops - pops[0]).max() < 1e-12


class TestMapMatrix:
    def test_identity_at_t0(self):
        cfg = ModelConfig(n_osc=8)
        assert np.abs(dynamical_map_matrix(cfg, 0.0) - np.eye(4)).max() < 1e-12

    def test_trace_preserving_row(self, jc_gen):
        f = jc_gen.f
        assert np.abs(f[:, 0, 0] - 1.0).max() < 1e-12
        assert np.abs(f[:, 0, 1:]).max() < 1e-12

    def test_series_matches_single_time(self):
        cfg = ModelConfig(n_osc=10, t_max=2.0).resolve()
        fs = map_series(cfg)
        i = 37
        assert np.abs(fs.f[i] - dynamical_map_matrix(cfg, fs.times[i])).max() < 1e-11

    def test_map_vs_state_consistency(self, jc_cfg, jc_traj, jc_gen):
        v0 = np.einsum("kij,ji->k", PAULI_NORM, jc_traj.rho_s[0]).real
        rho_from_map = np.einsum("mk,kij->mij", jc_gen.f @ v0, PAULI_NORM)
        assert np.abs(rho_from_map - jc_traj.rho_s).max() < 1e-9

    def test_jc_det_formula(self):
        # det F = |gamma|^2 (kappa + eta - 1) with the thermal series
        cfg = ModelConfig(t_max=10.0).resolve()
        fs = map_series(cfg)
        p = np.diag(thermal_state(cfg.omega_e, cfg.beta, cfg.n_osc)).real
        c, _ = _jc_amplitudes(cfg.omega_s - cfg.omega_e, cfg.g, cfg.n_osc, fs.times)
        w = p[:, None]
        gamma = (w * c[:-1] * c[1:]).sum(axis=0)
        eta = (w * np.abs(c[:-1]) ** 2).sum(axis=0)
        kappa = (w * np.abs(c[1:]) ** 2).sum(axis=0)
        expected = np.abs(gamma) ** 2 * (kappa + eta - 1.0)
        assert np.abs(np.linalg.det(fs.f) - expected).max() < 1e-10


class TestGenerator:
    def test_first_row_zero(self, jc_gen):
        ok = ~jc_gen.singular
        assert np.abs(jc_gen.l[ok][:, 0, :]).max() < 1e-8

    def test_structure_matches_pattern(self, jc_gen):
        ok = ~jc_gen.singular
        assert jc_gen.structure_defect()[ok].max() < 1e-7

    def test_g_zero_closed_system_generator(self):
        # only the B entries survive, equal to -/+ omega_S
        cfg = ModelConfig(g=0.0, n_osc=4, t_max=5.0).resolve()
        gen = generator_from_map(map_series(cfg), cfg.dt)
        a, b, x, y = gen.entry_rates()
        inner = slice(1, -1)
        # cd of a pure omega_S rotation biases Im by omega^3 dt^2 / 6 ~ 1.6e-4
        assert np.abs(b[inner] + cfg.omega_s).max() < 5e-4
        for series in (a, x, y):
            assert np.abs(series[inner]).max() < 1e-6
        assert gen.structure_defect()[inner].max() < 1e-10

    def test_singular_flagging_and_gaps(self):
        fs_f = np.stack([np.eye(4)] * 7)
        fs_f[3] *= 1e-3  # det = 1e-12 at one sample
        from qtledger.propagation import MapSeries

        times = np.arange(7) * 0.1
        gen = generator_from_map(MapSeries(times=times, f=fs_f, max_imag=0.0), 0.1)
        assert gen.singular.tolist() == [False, False, False, True, False, False, False]
        assert np.isnan(gen.l[3]).all()
        assert gen.gaps == [(pytest.approx(0.3), pytest.approx(0.3))]

    def test_leak_warning(self):
        from qtledger.propagation import TruncationLeakWarning

        cfg = ModelConfig(n_osc=3, t_max=2.0)
        with pytest.warns(TruncationLeakWarning):
            evolve(cfg)
