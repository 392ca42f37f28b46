"""Read-only loaders for a run directory's CSV/JSON interface."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

LEDGER_COLUMNS = (
    "t", "framework", "U", "W_flux", "Q_flux", "W_cum", "Q_cum", "detF", "singular",
)
ENTROPY_COLUMNS = (
    "t", "S_S", "S_E", "I_SE", "dS_S", "Sigma_A", "Sigma_B", "Sigma_C", "Sigma_D",
)


class MissingColumnsError(ValueError):
    """A CSV lacks required columns; the message lists every one."""

    def __init__(self, path, missing):
        self.path = Path(path)
        self.missing = sorted(missing)
        super().__init__(f"{self.path}: missing column(s) {', '.join(self.missing)}")


@dataclass
class LedgerSeries:
    """One framework's rows of ledger.csv as float arrays."""

    framework: str
    t: np.ndarray
    u: np.ndarray
    w_flux: np.ndarray
    q_flux: np.ndarray
    w_cum: np.ndarray
    q_cum: np.ndarray
    det_f: np.ndarray
    singular: np.ndarray  # bool

    @property
    def delta_u(self) -> np.ndarray:
        return self.u - self.u[0]

    def singular_windows(self) -> list[tuple[float, float]]:
        """Contiguous flagged stretches as (t_start, t_end) intervals."""
        out = []
        idx = np.flatnonzero(self.singular)
        if idx.size == 0:
            return out
        start = prev = idx[0]
        for i in idx[1:]:
            if i != prev + 1:
                out.append((float(self.t[start]), float(self.t[prev])))
                start = i
            prev = i
        out.append((float(self.t[start]), float(self.t[prev])))
        return out


@dataclass
class RunData:
    """Everything the renderer needs from one run directory."""

    ledgers: dict[str, LedgerSeries]
    entropy: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    @property
    def coupling(self) -> str | None:
        return self.meta.get("parameters", {}).get("coupling")

    def singular_windows(self) -> list[tuple[float, float]]:
        windows = self.meta.get("singular_windows")
        if windows is not None:
            return [(float(a), float(b)) for a, b in windows]
        merged = []
        for led in self.ledgers.values():
            merged.extend(led.singular_windows())
        return sorted(merged)


def _read_rows(path: Path, required) -> tuple[list[str], list[dict]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = set(required) - set(header)
        if missing:
            raise MissingColumnsError(path, missing)
        return header, list(reader)


def load_ledger(path) -> dict[str, LedgerSeries]:
    path = Path(path)
    _, rows = _read_rows(path, LEDGER_COLUMNS)
    out = {}
    for label in sorted({r["framework"] for r in rows}):
        sel = [r for r in rows if r["framework"] == label]
        col = lambda name: np.array([float(r[name]) for r in sel])
        out[label] = LedgerSeries(
            framework=label, t=col("t"), u=col("U"),
            w_flux=col("W_flux"), q_flux=col("Q_flux"),
            w_cum=col("W_cum"), q_cum=col("Q_cum"), det_f=col("detF"),
            singular=np.array([r["singular"].strip() not in ("0", "", "False") for r in sel]),
        )
    return out


def load_entropy(path) -> dict[str, np.ndarray]:
    path = Path(path)
    _, rows = _read_rows(path, ENTROPY_COLUMNS)
    return {
        name: np.array([float(r[name]) for r in rows]) for name in ENTROPY_COLUMNS
    }


def load_run_dir(run_dir) -> RunData:
    """Load ledger.csv, entropy.csv and meta.json from a run directory."""
    run_dir = Path(run_dir)
    ledger_path = run_dir / "ledger.csv"
    entropy_path = run_dir / "entropy.csv"
    if not ledger_path.is_file() or not entropy_path.is_file():
        raise FileNotFoundError(
            f"{run_dir} is not a completed run directory: expected ledger.csv and "
            f"entropy.csv (produce them with `qtl run <config> --out {run_dir}`)"
        )
    meta_path = run_dir / "meta.json"
    meta = json.loads(meta_path.read_text()) if meta_path.is_file() else {}
    return RunData(
        ledgers=load_ledger(ledger_path),
        entropy=load_entropy(entropy_path),
        meta=meta,
    )
