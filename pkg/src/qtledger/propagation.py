"""Exact composite evolution, reduced states, map matrix and generator.

The composite Hamiltonian is static, so the trajectory comes from a single
spectral decomposition of H: rho(t) = V E(t) (V^dag rho0 V) E(t)^dag V^dag
with E(t) = diag(exp(-i w t)).  The same machinery propagates the four
Pauli basis operators that define the map matrix F(t).

During the sweep we also collect the handful of scalar series the
accounting frameworks need (interaction traces against the correlation
operator chi = rho - rho_S x rho_E), so that the frameworks never have to
re-propagate the composite state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .model import (
    ModelConfig,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    build_hamiltonians,
    initial_state,
    thermal_state,
)

CHUNK = 256
LEAK_TOL = 1e-8
DELTA_SING = 1e-6

# Fixed qubit operator basis {I, sx, sy, sz}/sqrt(2), in this order.
PAULI = np.stack([np.eye(2, dtype=complex), SIGMA_X, SIGMA_Y, SIGMA_Z])
PAULI_NORM = PAULI / np.sqrt(2.0)


class TruncationLeakWarning(UserWarning):
    pass


def _time_grid(cfg: ModelConfig) -> np.ndarray:
    m = int(round(cfg.t_max / cfg.dt))
    return np.arange(m + 1) * cfg.dt


@dataclass
class Trajectory:
    """Exact trajectory samples plus the reduced data the ledgers consume.

    Composite-state matrices are reconstructed on demand (``composite``,
    ``chi``) rather than stored for every sample.
    """

    cfg: ModelConfig
    times: np.ndarray
    rho_s: np.ndarray        # (M, 2, 2)
    rho_dot_s: np.ndarray    # (M, 2, 2), exact -i Tr_E[H, rho]
    rho_e: np.ndarray        # (M, N, N)
    h_corr: np.ndarray       # (M, 2, 2)  H_S'(t) = Tr_E(H_SE (I x rho_E))
    h_corr_dot: np.ndarray   # (M, 2, 2)  exact d/dt H_S'
    comm_s: np.ndarray       # (M, 4)   -i Tr([P_j x I, H_SE] chi), P_j in PAULI
    comm_e: np.ndarray       # (M, 5)   -i Tr([I x O_k, H_SE] chi), O_k in {H_E, E_0..E_3}
    e_vals: np.ndarray       # (M, 4)   Tr(E_j rho_E) with E_j = Tr_S(H_SE (P_j x I))
    h_e_exp: np.ndarray      # (M,)     Tr(H_E rho_E)
    c: np.ndarray            # (M,)     Tr(H_SE (rho_S x rho_E))
    c_dot: np.ndarray        # (M,)
    u_chi: np.ndarray        # (M,)     Tr(H_SE chi)
    energy: np.ndarray       # (M,)     Tr(H rho)
    trace: np.ndarray        # (M,)     Tr(rho)
    leak: np.ndarray         # (M,)     population of the top two oscillator levels
    h_s: np.ndarray          # embedded bare Hamiltonians (2N x 2N)
    h_e: np.ndarray
    h_se: np.ndarray
    h: np.ndarray
    e_ops: np.ndarray        # (4, N, N) the E_j above
    _v: np.ndarray = field(repr=False, default=None)
    _w: np.ndarray = field(repr=False, default=None)
    _b0: np.ndarray = field(repr=False, default=None)

    @property
    def n_osc(self) -> int:
        return self.rho_e.shape[1]

    @property
    def h_s_qubit(self) -> np.ndarray:
        """Bare qubit Hamiltonian as a 2x2 matrix."""
        return self.cfg.omega_s * np.diag([1.0, 0.0]).astype(complex)

    def composite(self, i: int) -> np.ndarray:
        """rho(t_i) on the full 2N-dimensional space."""
        phases = np.exp(-1j * self._w * self.times[i])
        w = phases[:, None] * self._b0 * phases.conj()[None, :]
        return self._v @ w @ self._v.conj().T

    def chi(self, i: int) -> np.ndarray:
        """Correlation operator chi(t_i) = rho - rho_S x rho_E."""
        return self.composite(i) - np.kron(self.rho_s[i], self.rho_e[i])

    def composite_chunks(self, chunk: int = CHUNK):
        """Yield (slice, rho_batch) over the grid without storing everything."""
        m = len(self.times)
        for lo in range(0, m, chunk):
            sl = slice(lo, min(lo + chunk, m))
            phases = np.exp(-1j * np.outer(self.times[sl], self._w))
            w = phases[:, :, None] * self._b0[None, :, :] * phases.conj()[:, None, :]
            yield sl, self._v @ w @ self._v.conj().T


def _env_contraction(h_se4: np.ndarray, ops: np.ndarray) -> np.ndarray:
    """E_j = Tr_S(H_SE (P_j x I)) for a stack of 2x2 operators P_j."""
    return np.einsum("snSm,jSs->jnm", h_se4, ops)


def evolve(cfg: ModelConfig, chunk: int = CHUNK) -> Trajectory:
    """Propagate the composite state over the whole time grid.

    Emits a TruncationLeakWarning when the top two oscillator levels ever
    hold more than 1e-8 combined population.
    """
    cfg = cfg.resolve()
    n = cfg.n_osc
    h_s, h_e, h_se, h = build_hamiltonians(cfg)
    rho0 = initial_state(cfg)
    times = _time_grid(cfg)
    m = len(times)

    es = linalg.hermitian_eig(h)
    v, w = es.eigenvectors, es.eigenvalues
    b0 = v.conj().T @ rho0 @ v
    gap = -1j * (w[:, None] - w[None, :])  # rho_dot in the eigenbasis

    h_se4 = h_se.reshape(2, n, 2, n)
    e_ops = _env_contraction(h_se4, PAULI)
    h_e_bare = linalg.partial_trace(h_e, 2, n, keep="E") / 2.0

    eye_e = np.eye(n, dtype=complex)
    comm_s_ops = np.stack(
        [-1j * (np.kron(p, eye_e) @ h_se - h_se @ np.kron(p, eye_e)) for p in PAULI]
    )
    eye_s = np.eye(2, dtype=complex)
    env_ops = [h_e_bare] + list(e_ops)
    comm_e_ops = np.stack(
        [-1j * (np.kron(eye_s, o) @ h_se - h_se @ np.kron(eye_s, o)) for o in env_ops]
    )

    out = {
        "rho_s": np.empty((m, 2, 2), complex),
        "rho_dot_s": np.empty((m, 2, 2), complex),
        "rho_e": np.empty((m, n, n), complex),
        "h_corr": np.empty((m, 2, 2), complex),
        "h_corr_dot": np.empty((m, 2, 2), complex),
        "comm_s": np.empty((m, 4)),
        "comm_e": np.empty((m, 5)),
        "e_vals": np.empty((m, 4)),
        "h_e_exp": np.empty(m),
        "c": np.empty(m),
        "c_dot": np.empty(m),
        "u_chi": np.empty(m),
        "energy": np.empty(m),
        "trace": np.empty(m),
        "leak": np.empty(m),
    }

    for lo in range(0, m, chunk):
        sl = slice(lo, min(lo + chunk, m))
        phases = np.exp(-1j * np.outer(times[sl], w))
        wmat = phases[:, :, None] * b0[None, :, :] * phases.conj()[:, None, :]
        rho = v @ wmat @ v.conj().T
        rho_dot = v @ (gap[None, :, :] * wmat) @ v.conj().T

        r4 = rho.reshape(-1, 2, n, 2, n)
        rd4 = rho_dot.reshape(-1, 2, n, 2, n)
        rho_s = np.einsum("bsnSn->bsS", r4)
        rho_e = np.einsum("bsnsm->bnm", r4)
        rho_dot_s = np.einsum("bsnSn->bsS", rd4)
        rho_dot_e = np.einsum("bsnsm->bnm", rd4)
        chi = rho - np.einsum("bsS,bnm->bsnSm", rho_s, rho_e).reshape(rho.shape)

        h_corr = np.einsum("snSm,bmn->bsS", h_se4, rho_e)
        h_corr_dot = np.einsum("snSm,bmn->bsS", h_se4, rho_dot_e)

        out["rho_s"][sl] = rho_s
        out["rho_dot_s"][sl] = rho_dot_s
        out["rho_e"][sl] = rho_e
        out["h_corr"][sl] = h_corr
        out["h_corr_dot"][sl] = h_corr_dot
        out["comm_s"][sl] = np.einsum("jik,bki->bj", comm_s_ops, chi).real
        out["comm_e"][sl] = np.einsum("jik,bki->bj", comm_e_ops, chi).real
        out["e_vals"][sl] = np.einsum("jnm,bmn->bj", e_ops, rho_e).real
        out["h_e_exp"][sl] = np.einsum("nm,bmn->b", h_e_bare, rho_e).real
        out["c"][sl] = np.einsum("bsS,bSs->b", h_corr, rho_s).real
        out["c_dot"][sl] = (
            np.einsum("bsS,bSs->b", h_corr_dot, rho_s)
            + np.einsum("bsS,bSs->b", h_corr, rho_dot_s)
        ).real
        out["u_chi"][sl] = np.einsum("ik,bki->b", h_se, chi).real
        out["energy"][sl] = np.einsum("i,bii->b", w, wmat).real
        out["trace"][sl] = np.einsum("bii->b", wmat).real
        out["leak"][sl] = np.einsum("bnn->bn", rho_e.real)[:, -2:].sum(axis=1)

    if out["leak"].max() > LEAK_TOL:
        warnings.warn(
            f"truncation leak: top two oscillator levels reach "
            f"{out['leak'].max():.3e} population (tolerance {LEAK_TOL:.0e}); "
            f"increase the truncation",
            TruncationLeakWarning,
        )

    return Trajectory(
        cfg=cfg, times=times, h_s=h_s, h_e=h_e, h_se=h_se, h=h,
        e_ops=e_ops, _v=v, _w=w, _b0=b0, **out,
    )


# ---------------------------------------------------------------------------
# Dynamical map in the Pauli basis and its time-local generator
# ---------------------------------------------------------------------------

def dynamical_map_matrix(cfg: ModelConfig, t: float) -> np.ndarray:
    """4x4 map matrix F_kl(t) = Tr(X_k Tr_E(U (X_l x rho_E(0)) U^dag)).

    The basis X_k = {I, sx, sy, sz}/sqrt(2) is fixed; F is real because the
    map preserves Hermiticity and the basis is Hermitian.
    """
    cfg = cfg.resolve()
    _, _, _, h = build_hamiltonians(cfg)
    rho_e0 = thermal_state(cfg.omega_e, cfg.beta, cfg.n_osc)
    f = np.empty((4, 4))
    for l in range(4):
        evolved = linalg.unitary_evolution(h, np.kron(PAULI_NORM[l], rho_e0), t)
        reduced = linalg.partial_trace(evolved, 2, cfg.n_osc, keep="S")
        col = np.einsum("kij,ji->k", PAULI_NORM, reduced)
        if np.abs(col.imag).max() > 1e-10:
            raise linalg.LinalgError(f"map matrix has imaginary part {np.abs(col.imag).max():.3e}")
        f[:, l] = col.real
    return f


@dataclass
class MapSeries:
    """F(t) on the trajectory grid; F[0] = identity."""

    times: np.ndarray
    f: np.ndarray          # (M, 4, 4) real
    max_imag: float        # largest imaginary residue dropped when projecting


def map_series(cfg: ModelConfig, chunk: int = CHUNK) -> MapSeries:
    """F(t) for every grid time, by propagating the four basis operators."""
    cfg = cfg.resolve()
    n = cfg.n_osc
    _, _, _, h = build_hamiltonians(cfg)
    rho_e0 = thermal_state(cfg.omega_e, cfg.beta, n)
    times = _time_grid(cfg)
    m = len(times)

    es = linalg.hermitian_eig(h)
    v, w = es.eigenvectors, es.eigenvalues

    f = np.empty((m, 4, 4))
    max_imag = 0.0
    for l in range(4):
        b0 = v.conj().T @ np.kron(PAULI_NORM[l], rho_e0) @ v
        for lo in range(0, m, chunk):
            sl = slice(lo, min(lo + chunk, m))
            phases = np.exp(-1j * np.outer(times[sl], w))
            wmat = phases[:, :, None] * b0[None, :, :] * phases.conj()[:, None, :]
            evolved = v @ wmat @ v.conj().T
            reduced = np.einsum("bsnSn->bsS", evolved.reshape(-1, 2, n, 2, n))
            col = np.einsum("kij,bji->bk", PAULI_NORM, reduced)
            max_imag = max(max_imag, float(np.abs(col.imag).max()))
            f[sl, :, l] = col.real
    return MapSeries(times=times, f=f, max_imag=max_imag)


@dataclass
class GeneratorSeries:
    """Time-local generator L = Fdot F^-1 with singularity bookkeeping.

    Samples where |det F| drops below ``delta_sing`` carry no generator
    (rows of ``l`` are NaN there) and are reported as [t_a, t_b] gaps.
    """

    times: np.ndarray
    f: np.ndarray           # (M, 4, 4)
    f_dot: np.ndarray       # (M, 4, 4) central differences, one-sided ends
    l: np.ndarray           # (M, 4, 4), NaN on singular samples
    det_f: np.ndarray       # (M,)
    singular: np.ndarray    # (M,) bool
    delta_sing: float

    @property
    def gaps(self) -> list[tuple[float, float]]:
        """Flagged windows as [t_a, t_b] intervals."""
        out = []
        idx = np.flatnonzero(self.singular)
        if idx.size == 0:
            return out
        start = prev = idx[0]
        for i in idx[1:]:
            if i != prev + 1:
                out.append((float(self.times[start]), float(self.times[prev])))
                start = i
            prev = i
        out.append((float(self.times[start]), float(self.times[prev])))
        return out

    def entry_rates(self):
        """(A, B, X, Y) read off the generator matrix, NaN where singular."""
        a = 0.5 * (self.l[:, 1, 1] + self.l[:, 2, 2])
        b = 0.5 * (self.l[:, 1, 2] - self.l[:, 2, 1])
        x = self.l[:, 3, 0]
        y = self.l[:, 3, 3]
        return a, b, x, y

    def structure_defect(self) -> np.ndarray:
        """Largest off-pattern entry per sample (should vanish)."""
        resid = self.l.copy()
        resid[:, 1, 1] = resid[:, 2, 2] = 0.0
        resid[:, 1, 2] = resid[:, 2, 1] = 0.0
        resid[:, 3, 0] = resid[:, 3, 3] = 0.0
        resid[:, 0, :] = 0.0
        return np.abs(resid).reshape(len(self.times), -1).max(axis=1)


def _grid_derivative(series: np.ndarray, dt: float) -> np.ndarray:
    """Second-order derivative on a uniform grid (central, one-sided ends)."""
    d = np.empty_like(series)
    d[1:-1] = (series[2:] - series[:-2]) / (2.0 * dt)
    d[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / (2.0 * dt)
    d[-1] = (3.0 * series[-1] - 4.0 * series[-2] + series[-3]) / (2.0 * dt)
    return d


def generator_from_map(fs: MapSeries, dt: float, delta_sing: float = DELTA_SING) -> GeneratorSeries:
    """L(t) = Fdot(t) F(t)^-1 with singular samples flagged, never inverted."""
    f = fs.f
    f_dot = _grid_derivative(f, dt)
    det_f = np.linalg.det(f)
    singular = np.abs(det_f) < delta_sing

    l = np.full_like(f, np.nan)
    ok = ~singular
    if ok.any():
        # L F = Fdot  <=>  F^T L^T = Fdot^T
        lt = np.linalg.solve(np.transpose(f[ok], (0, 2, 1)), np.transpose(f_dot[ok], (0, 2, 1)))
        l[ok] = np.transpose(lt, (0, 2, 1))
    return GeneratorSeries(
        times=fs.times, f=f, f_dot=f_dot, l=l, det_f=det_f,
        singular=singular, delta_sing=delta_sing,
    )
