"""Figure rendering: integrated fluxes per framework and the entropy panel."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .reader import RunData, load_run_dir

STYLE_FILE = Path(__file__).with_name("style.mplstyle")
FRAMEWORKS = ("A", "B", "C", "D")
FORMATS = ("svg", "png")
SHADE = {"color": "0.55", "alpha": 0.25, "linewidth": 0, "zorder": 0}


@dataclass
class FigureSpec:
    """What to render: input files, coupling label, outputs, panels."""

    ledger_csv: Path
    entropy_csv: Path
    coupling: str
    out_dir: Path
    panels: tuple[str, ...] = ("flux", "entropy")
    formats: tuple[str, ...] = FORMATS


def _shade_singular(ax, windows, dt_hint: float) -> None:
    """Grey out flagged windows; zero-length windows get one grid step."""
    half = 0.5 * dt_hint
    for a, b in windows:
        ax.axvspan(a - half, b + half, **SHADE)


def _grid_step(t) -> float:
    return float(t[1] - t[0]) if len(t) > 1 else 1.0


def _save(fig, out_dir: Path, stem: str, formats) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for fmt in formats:
        path = out_dir / f"{stem}.{fmt}"
        fig.savefig(path)
        paths.append(path)
    plt.close(fig)
    return paths


def render_flux_figure(run: RunData, coupling: str, out_dir: Path,
                       formats=FORMATS) -> list[Path]:
    """Three stacked panels: dU, W_cum, Q_cum, one labelled line A-D each."""
    windows = run.singular_windows()
    with plt.style.context(str(STYLE_FILE)):
        fig, axes = plt.subplots(3, 1, sharex=True)
        panels = [
            ("delta_u", r"$\Delta U$"),
            ("w_cum", r"$W$"),
            ("q_cum", r"$Q$"),
        ]
        for ax, (attr, ylabel) in zip(axes, panels):
            for label in FRAMEWORKS:
                led = run.ledgers.get(label)
                if led is None:
                    continue
                ax.plot(led.t, getattr(led, attr), label=label)
                _shade_singular(ax, windows, _grid_step(led.t))
            ax.set_ylabel(ylabel)
        axes[0].set_title(f"Integrated energy fluxes ({coupling})")
        axes[0].legend(loc="upper right", ncol=len(FRAMEWORKS), title="framework")
        axes[-1].set_xlabel(r"$t\,\omega_S$")
        return _save(fig, out_dir, f"flux_{coupling}", formats)


def render_entropy_figure(run: RunData, coupling: str, out_dir: Path,
                          formats=FORMATS) -> list[Path]:
    """Local entropy change / mutual information and entropy production."""
    ent = run.entropy
    windows = run.singular_windows()
    step = _grid_step(ent["t"])
    with plt.style.context(str(STYLE_FILE)):
        fig, (top, bottom) = plt.subplots(2, 1, sharex=True)
        top.plot(ent["t"], ent["dS_S"], color="k", label=r"$\Delta S_S$")
        top.plot(ent["t"], ent["I_SE"], color="0.45", linestyle="--",
                 label=r"$I_{SE}$")
        top.set_ylabel("nats")
        top.set_title(f"Local entropy and correlations ({coupling})")
        _shade_singular(top, windows, step)
        top.legend(loc="upper right")

        for label in FRAMEWORKS:
            bottom.plot(ent["t"], ent[f"Sigma_{label}"], label=label)
        _shade_singular(bottom, windows, step)
        bottom.set_ylabel(r"$\Sigma_S$ (nats)")
        bottom.set_xlabel(r"$t\,\omega_S$")
        bottom.legend(loc="upper right", ncol=len(FRAMEWORKS), title="framework")
        return _save(fig, out_dir, f"entropy_{coupling}", formats)


def render(spec: FigureSpec) -> list[Path]:
    """Render the panels selected by a FigureSpec; returns the written paths."""
    from .reader import load_entropy, load_ledger, RunData as _RunData

    run = _RunData(ledgers=load_ledger(spec.ledger_csv),
                   entropy=load_entropy(spec.entropy_csv))
    written = []
    if "flux" in spec.panels:
        written += render_flux_figure(run, spec.coupling, spec.out_dir, spec.formats)
    if "entropy" in spec.panels:
        written += render_entropy_figure(run, spec.coupling, spec.out_dir, spec.formats)
    return written


def render_run(run_dir, out_dir, coupling: str | None = None) -> list[Path]:
    """Render every panel of one run directory; returns the written paths."""
    run = load_run_dir(run_dir)
    coupling = coupling or run.coupling or "run"
    out_dir = Path(out_dir)
    written = render_flux_figure(run, coupling, out_dir)
    written += render_entropy_figure(run, coupling, out_dir)
    return written
