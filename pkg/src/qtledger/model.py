"""Hamiltonians, initial states and truncation for the spin-oscillator system.

Units: energies in multiples of the qubit frequency omega_S, times in
1/omega_S, hbar = k_B = 1.  The qubit basis is ordered (excited, ground),
so sigma = |g><e| is the lower-left corner of a 2x2 matrix.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .linalg import kron

DEFAULT_EPS_TAIL = 1e-10
DEFAULT_HEADROOM = 10


class ConfigError(ValueError):
    pass


class CouplingKind(enum.Enum):
    JAYNES_CUMMINGS = "jc"
    DISPLACED = "displaced"
    DISPERSIVE = "dispersive"

    @classmethod
    def parse(cls, name: str) -> "CouplingKind":
        key = str(name).strip().lower()
        for kind in cls:
            if key in (kind.value, kind.name.lower()):
                return kind
        raise ConfigError(f"unknown coupling {name!r}; use jc, displaced or dispersive")


# qubit operators, basis (|e>, |g>)
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
NUMBER_QUBIT = SIGMA_PLUS @ SIGMA_MINUS  # sigma^dag sigma = |e><e|


def lowering(n: int) -> np.ndarray:
    """Truncated bosonic annihilation operator on n levels."""
    return np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)


def choose_truncation(
    beta: float,
    omega_e: float,
    eps_tail: float = DEFAULT_EPS_TAIL,
    headroom: int = DEFAULT_HEADROOM,
) -> int:
    """Smallest N with untruncated thermal tail below eps_tail, plus headroom.

    For the geometric Boltzmann distribution the tail above level N is
    exactly exp(-beta omega_E N), so N0 = ceil(-ln(eps)/(beta omega_E)).
    """
    if not 0.0 < eps_tail < 1.0:
        raise ConfigError("eps_tail must be in (0, 1)")
    if beta <= 0.0 or omega_e <= 0.0:
        raise ConfigError("beta and omega_E must be positive")
    n0 = math.ceil(-math.log(eps_tail) / (beta * omega_e))
    return max(2, n0 + headroom)


@dataclass(frozen=True)
class ModelConfig:
    """Physical parameters of one simulation run.

    p_eg is the initial qubit coherence <e|rho_S|g>; alpha_s the gauge
    parameter of the non-local accounting (alpha_E = 1 - alpha_S).
    n_osc / dt left as None are resolved by ``resolve()``.
    """

    omega_s: float = 1.0
    omega_e: float = 0.9
    g: float = 0.1
    beta: float = 1.0
    coupling: CouplingKind = CouplingKind.JAYNES_CUMMINGS
    p_e: float = 0.25
    p_eg: complex = 0.1j
    n_osc: int | None = None
    dt: float | None = None
    t_max: float = 100.0
    alpha_s: float = 0.0

    def validate(self) -> None:
        if self.omega_s < 0 or self.omega_e < 0 or self.g < 0:
            raise ConfigError("omega_S, omega_E and g must be non-negative")
        if self.beta <= 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if not 0.0 <= self.p_e <= 1.0:
            raise ConfigError(f"p_e must lie in [0, 1], got {self.p_e}")
        # PSD of [[p_e, p_eg], [p_eg*, 1-p_e]]
        if abs(self.p_eg) ** 2 > self.p_e * (1.0 - self.p_e) + 1e-12:
            raise ConfigError(
                f"initial qubit state not PSD: |p_eg|^2 = {abs(self.p_eg) ** 2:.6g} "
                f"> p_e(1-p_e) = {self.p_e * (1.0 - self.p_e):.6g}"
            )
        if self.n_osc is not None and self.n_osc < 2:
            raise ConfigError("oscillator truncation N must be >= 2")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.t_max <= 0:
            raise ConfigError("t_max must be positive")

    def resolve(self) -> "ModelConfig":
        """Fill in derived defaults (truncation and time step) and validate."""
        self.validate()
        cfg = self
        if cfg.n_osc is None:
            cfg = replace(cfg, n_osc=choose_truncation(cfg.beta, cfg.omega_e))
        if cfg.dt is None:
            cfg = replace(cfg, dt=0.005 * 2.0 * math.pi / cfg.omega_s)
        return cfg


def thermal_state(omega_e: float, beta: float, n: int) -> np.ndarray:
    """Truncated thermal oscillator state, renormalized to unit trace."""
    if beta <= 0:
        raise ConfigError("beta must be positive")
    if n < 2:
        raise ConfigError("need at least 2 oscillator levels")
    p = np.exp(-beta * omega_e * np.arange(n))
    p /= p.sum()
    return np.diag(p).astype(complex)


def qubit_state(p_e: float, p_eg: complex) -> np.ndarray:
    rho = np.array([[p_e, p_eg], [np.conj(p_eg), 1.0 - p_e]], dtype=complex)
    if abs(p_eg) ** 2 > p_e * (1.0 - p_e) + 1e-12:
        raise ConfigError("qubit state not PSD")
    return rho


def initial_state(cfg: ModelConfig) -> np.ndarray:
    """rho(0) = rho_S(0) x rho_E(0), a product of qubit and thermal mode."""
    cfg = cfg.resolve()
    return kron(qubit_state(cfg.p_e, cfg.p_eg), thermal_state(cfg.omega_e, cfg.beta, cfg.n_osc))


def build_hamiltonians(cfg: ModelConfig):
    """Embedded (H_S, H_E, H_SE, H) on the 2N-dimensional composite space.

    H_S = omega_S sigma^dag sigma, H_E = omega_E a^dag a, and H_SE is one of
    g(sigma a^dag + sigma^dag a), g sigma_z (a + a^dag), g sigma_z a^dag a.
    """
    cfg = cfg.resolve()
    n = cfg.n_osc
    eye_e = np.eye(n, dtype=complex)
    eye_s = np.eye(2, dtype=complex)
    a = lowering(n)
    ad = a.conj().T

    h_s = kron(cfg.omega_s * NUMBER_QUBIT, eye_e)
    h_e = kron(eye_s, cfg.omega_e * (ad @ a))
    if cfg.coupling is CouplingKind.JAYNES_CUMMINGS:
        h_se = cfg.g * (kron(SIGMA_MINUS, ad) + kron(SIGMA_PLUS, a))
    elif cfg.coupling is CouplingKind.DISPLACED:
        h_se = cfg.g * kron(SIGMA_Z, a + ad)
    else:
        h_se = cfg.g * kron(SIGMA_Z, ad @ a)
    return h_s, h_e, h_se, h_s + h_e + h_se
