"""Synthetic, schema-conforming run directories for renderer tests."""

import json

import numpy as np
import pytest

M = 40
DT = 0.25


def make_run_dir(root, coupling="jc", with_meta=True, drop_column=None):
    t = np.arange(M) * DT
    lines = ["t,framework,U,W_flux,Q_flux,W_cum,Q_cum,detF,singular"]
    for k, label in enumerate("ABCD"):
        u = 0.1 * np.sin(t + k)
        w = 0.05 * np.cos(t + k)
        q = u - u[0] - w
        det = np.abs(np.cos(0.3 * t)) + 1e-8
        singular = (label == "D") & (np.abs(t - 5.0) < 0.3)
        for i in range(M):
            w_flux = float("nan") if singular[i] else 0.05 * float(np.cos(t[i]))
            vals = [u[i], w_flux, q[i], w[i], q[i], det[i]]
            lines.append(
                f"{float(t[i])!r},{label},"
                + ",".join(repr(float(v)) for v in vals)
                + f",{int(singular[i])}"
            )
    header = "t,S_S,S_E,I_SE,dS_S,Sigma_A,Sigma_B,Sigma_C,Sigma_D"
    if drop_column:
        cols = header.split(",")
        cols.remove(drop_column)
        header = ",".join(cols)
    ent_lines = [header]
    for i in range(M):
        vals = [t[i], 0.3 + 0.01 * i, 0.5, 0.02 * i, 0.01 * i] + [0.01 * i + j for j in range(4)]
        if drop_column:
            vals = vals[: len(header.split(","))]
        ent_lines.append(",".join(repr(float(v)) for v in vals))

    root.mkdir(parents=True, exist_ok=True)
    (root / "ledger.csv").write_text("\n".join(lines) + "\n")
    (root / "entropy.csv").write_text("\n".join(ent_lines) + "\n")
    if with_meta:
        meta = {
            "parameters": {"coupling": coupling},
            "singular_windows": [[4.75, 5.25]],
        }
        (root / "meta.json").write_text(json.dumps(meta))
    return root


@pytest.fixture
def run_dir(tmp_path):
    return make_run_dir(tmp_path / "run")
