"""Exact spin-oscillator simulator with four work/heat accounting schemes."""

from .model import CouplingKind, ModelConfig
from .propagation import Trajectory, evolve, generator_from_map, map_series
from .frameworks import (
    EnergyLedger,
    analytic_rates,
    decomposition_generator,
    decomposition_ledger,
    lembas_ledger,
    minimal_dissipation_ledger,
    nonlocal_ledger,
    spectral_track,
)
from .observables import EntropyRecord, entropy_record

__version__ = "0.1.0"

__all__ = [
    "CouplingKind", "ModelConfig", "Trajectory", "evolve", "map_series",
    "generator_from_map", "EnergyLedger", "lembas_ledger", "nonlocal_ledger",
    "spectral_track", "decomposition_ledger", "decomposition_generator",
    "minimal_dissipation_ledger", "analytic_rates", "EntropyRecord",
    "entropy_record", "__version__",
]
