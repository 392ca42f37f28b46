"""Command-line front end: config parsing, runs, sweeps, file output.

Config files are a flat TOML subset; the complex initial coherence is
written as ``p_eg = [re, im]``.  An optional ``[sweep]`` table holds lists
of values for any scalar model parameter; the sweep runs the cross
product.  Output is ledger.csv / entropy.csv / meta.json per run.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import itertools
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import frameworks as fw
from . import observables as obs
from .linalg import LinalgError
from .model import ConfigError, CouplingKind, ModelConfig
from .propagation import TruncationLeakWarning, evolve

ALL_FRAMEWORKS = ("A", "B", "C", "D")
MODEL_KEYS = (
    "omega_s", "omega_e", "g", "beta", "coupling", "p_e", "p_eg",
    "n_osc", "dt", "t_max", "alpha_s",
)
SWEEPABLE = tuple(k for k in MODEL_KEYS if k not in ("coupling", "p_eg"))

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2


def _fmt(x) -> str:
    """Shortest round-trip decimal for floats; NaN spelled 'nan'."""
    return repr(float(x))


def _parse_p_eg(raw) -> complex:
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2:
            raise ConfigError(f"p_eg must be [re, im], got {raw!r}")
        return complex(float(raw[0]), float(raw[1]))
    if isinstance(raw, (int, float)):
        return complex(raw)
    raise ConfigError(f"p_eg must be [re, im] or a real number, got {raw!r}")


def model_from_dict(d: dict) -> ModelConfig:
    """Build a ModelConfig from the flat key-value config mapping."""
    kwargs = {}
    for key in MODEL_KEYS:
        if key not in d or d[key] is None:
            continue
        if key == "coupling":
            kwargs[key] = CouplingKind.parse(d[key])
        elif key == "p_eg":
            kwargs[key] = _parse_p_eg(d[key])
        elif key == "n_osc":
            kwargs[key] = int(d[key])
        else:
            kwargs[key] = float(d[key])
    cfg = ModelConfig(**kwargs)
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")
    unknown = set(data) - set(MODEL_KEYS) - {"frameworks", "sweep", "out"}
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    fws = data.get("frameworks", list(ALL_FRAMEWORKS))
    if isinstance(fws, str):
        fws = [fws]
    fws = [str(f).upper() for f in fws]
    bad = [f for f in fws if f not in ALL_FRAMEWORKS]
    if bad or not fws:
        raise ConfigError(f"frameworks must be a non-empty subset of A-D, got {fws}")
    data["frameworks"] = [f for f in ALL_FRAMEWORKS if f in fws]
    sweep = data.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("[sweep] must be a table of parameter lists")
    for key, vals in sweep.items():
        if key not in SWEEPABLE:
            raise ConfigError(f"cannot sweep over {key!r}; allowed: {SWEEPABLE}")
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"sweep axis {key!r} must be a non-empty list")
    return data


# ---------------------------------------------------------------------------
# single run
# ---------------------------------------------------------------------------

def compute_run(cfg: ModelConfig, selected=ALL_FRAMEWORKS):
    """Evolve one config and build the requested ledgers plus entropies.

    Returns (ledgers dict, EntropyRecord, meta dict fragments).
    """
    cfg = cfg.resolve()
    leak_warned = False
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationLeakWarning)
        traj = evolve(cfg)
        leak_warned = any(issubclass(w.category, TruncationLeakWarning) for w in caught)

    ledgers = {}
    gen = None
    if "A" in selected:
        ledgers["A"] = fw.lembas_ledger(traj)
    if "B" in selected:
        ledgers["B"] = fw.nonlocal_ledger(traj)
    if "C" in selected:
        ledgers["C"] = fw.decomposition_ledger(traj)
    if "D" in selected:
        ledgers["D"], gen = fw.minimal_dissipation_run(cfg)

    record = obs.entropy_record(traj, ledgers)
    extra = {
        "max_leak": float(traj.leak.max()),
        "leak_warned": leak_warned,
        "singular_windows": [list(g) for g in (gen.gaps if gen is not None else [])],
        "n_singular": int(gen.singular.sum()) if gen is not None else 0,
    }
    return ledgers, record, extra


def write_ledger_csv(path: Path, ledgers: dict) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,framework,U,W_flux,Q_flux,W_cum,Q_cum,detF,singular\n")
        for label in ALL_FRAMEWORKS:
            if label not in ledgers:
                continue
            led = ledgers[label]
            det = led.det_f if led.det_f is not None else np.full(len(led.times), np.nan)
            sing = led.singular if led.singular is not None else np.zeros(len(led.times), bool)
            for i, t in enumerate(led.times):
                fh.write(
                    f"{_fmt(t)},{label},{_fmt(led.u[i])},{_fmt(led.w_flux[i])},"
                    f"{_fmt(led.q_flux[i])},{_fmt(led.w_cum[i])},{_fmt(led.q_cum[i])},"
                    f"{_fmt(det[i])},{int(sing[i])}\n"
                )


def write_entropy_csv(path: Path, record) -> None:
    nan = np.full(len(record.times), np.nan)
    sig = {f: record.sigma.get(f, nan) for f in ALL_FRAMEWORKS}
    with open(path, "w", newline="") as fh:
        fh.write("t,S_S,S_E,I_SE,dS_S,Sigma_A,Sigma_B,Sigma_C,Sigma_D\n")
        for i, t in enumerate(record.times):
            cols = [t, record.s_s[i], record.s_e[i], record.i_se[i], record.ds_s[i]]
            cols += [sig[f][i] for f in ALL_FRAMEWORKS]
            fh.write(",".join(_fmt(c) for c in cols) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_one(cfg: ModelConfig, selected, out_dir: Path) -> dict:
    """Execute one run and write ledger.csv, entropy.csv, meta.json."""
    cfg = cfg.resolve()
    out_dir.mkdir(parents=True, exist_ok=True)
    ledgers, record, extra = compute_run(cfg, selected)

    ledger_path = out_dir / "ledger.csv"
    entropy_path = out_dir / "entropy.csv"
    write_ledger_csv(ledger_path, ledgers)
    write_entropy_csv(entropy_path, record)

    meta = {
        "parameters": {
            "omega_s": cfg.omega_s, "omega_e": cfg.omega_e, "g": cfg.g,
            "beta": cfg.beta, "coupling": cfg.coupling.value,
            "p_e": cfg.p_e, "p_eg": [cfg.p_eg.real, cfg.p_eg.imag],
            "n_osc": cfg.n_osc, "dt": cfg.dt, "t_max": cfg.t_max,
            "alpha_s": cfg.alpha_s,
        },
        "frameworks": list(selected),
        "n_samples": len(record.times),
        "units": {"energy": "omega_S", "time": "1/omega_S", "entropy": "nats"},
        "displaced_rate_variant": fw.DEFAULT_DISPLACED_VARIANT,
        "truncation_leak": {"max": extra["max_leak"], "warned": extra["leak_warned"]},
        "singular_windows": extra["singular_windows"],
        "n_singular_samples": extra["n_singular"],
        "checksums": {
            "ledger.csv": _sha256(ledger_path),
            "entropy.csv": _sha256(entropy_path),
        },
    }
    with open(out_dir / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _point_label(overrides: dict) -> str:
    return "_".join(f"{k}={overrides[k]:g}" for k in sorted(overrides)) or "base"


def _sweep_point(args):
    base, overrides, selected, out_root = args
    out_dir = Path(out_root) / _point_label(overrides)
    d = dict(base)
    d.update(overrides)
    try:
        cfg = model_from_dict(d)
        meta = run_one(cfg, selected, out_dir)
        return overrides, "ok", meta
    except Exception as exc:  # isolate per-point failures
        return overrides, f"error: {type(exc).__name__}: {exc}", None


def run_sweep(data: dict, selected, out_root: Path, workers: int) -> int:
    sweep = data.get("sweep", {})
    base = {k: v for k, v in data.items() if k in MODEL_KEYS}
    axes = sorted(sweep)
    points = [dict(zip(axes, combo)) for combo in itertools.product(*(sweep[k] for k in axes))]
    if not points:
        points = [{}]
    print(f"sweep: {len(points)} grid point(s) over axes {axes or '(none)'}")

    jobs = [(base, p, tuple(selected), str(out_root)) for p in points]
    if workers > 1 and len(points) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]

    out_root.mkdir(parents=True, exist_ok=True)
    failures = 0
    with open(out_root / "sweep_summary.csv", "w", newline="") as fh:
        head = ["point", "status"]
        head += [f"{c}_{f}" for f in ALL_FRAMEWORKS for c in ("U", "W", "Q")]
        head += ["n_singular_windows"]
        fh.write(",".join(head) + "\n")
        for overrides, status, meta in results:
            label = _point_label(overrides)
            if meta is None:
                failures += 1
                print(f"  {label}: {status}", file=sys.stderr)
                fh.write(f"{label},{status.split(':')[0]}" + ",nan" * 12 + ",0\n")
                continue
            finals = _final_row(Path(out_root) / label / "ledger.csv")
            row = [label, "ok"]
            for f in ALL_FRAMEWORKS:
                row += [_fmt(v) for v in finals.get(f, (np.nan,) * 3)]
            row.append(str(len(meta["singular_windows"])))
            fh.write(",".join(row) + "\n")
    return EXIT_NUMERIC if failures == len(points) else EXIT_OK


def _final_row(ledger_path: Path) -> dict:
    """Final-time (U, W_cum, Q_cum) per framework from a written ledger."""
    out = {}
    with open(ledger_path) as fh:
        next(fh)
        for line in fh:
            parts = line.rstrip("\n").split(",")
            out[parts[1]] = (float(parts[2]), float(parts[5]), float(parts[6]))
    return out


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtl", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("run", "sweep", "validate"):
        p = sub.add_parser(verb)
        p.add_argument("config")
        p.add_argument("--out", default=None, help="output directory (default $QTL_OUT or .)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--dt", type=float, default=None, help="override time step")
        p.add_argument("--tmax", type=float, default=None, help="override horizon")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_root = Path(args.out or os.environ.get("QTL_OUT", "."))

    try:
        data = load_config(args.config)
        if args.dt is not None:
            data["dt"] = args.dt
        if args.tmax is not None:
            data["t_max"] = args.tmax
        selected = data["frameworks"]
        cfg = model_from_dict(data)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.verb == "validate":
        rcfg = cfg.resolve()
        m = int(round(rcfg.t_max / rcfg.dt)) + 1
        dim = 2 * rcfg.n_osc
        print(f"config OK: coupling={rcfg.coupling.value}, N={rcfg.n_osc}, dt={rcfg.dt:.6g}")
        print(f"grid: {m} samples to t_max={rcfg.t_max:g}")
        print(f"memory: {16 * dim * dim} bytes per composite matrix ({dim}x{dim})")
        print(f"initial qubit PSD: |p_eg|^2={abs(rcfg.p_eg) ** 2:.6g} "
              f"<= p_e(1-p_e)={rcfg.p_e * (1 - rcfg.p_e):.6g}")
        return EXIT_OK

    try:
        if args.verb == "run":
            meta = run_one(cfg, selected, out_root)
            if meta["truncation_leak"]["warned"]:
                print("warning: truncation leak recorded in meta.json", file=sys.stderr)
            print(f"wrote {out_root / 'ledger.csv'}")
            return EXIT_OK
        return run_sweep(data, selected, out_root, max(1, args.workers))
    except (LinalgError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
