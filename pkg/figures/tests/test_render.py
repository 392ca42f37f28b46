"""Rendering tests: file outputs, labels, shading, idempotence."""

from qtlfigs import render, reader

from conftest import make_run_dir


def out_names(paths):
    return sorted(p.name for p in paths)


def test_render_run_writes_four_files(run_dir, tmp_path):
    written = render.render_run(run_dir, tmp_path / "figs")
    assert out_names(written) == [
        "entropy_jc.png", "entropy_jc.svg", "flux_jc.png", "flux_jc.svg",
    ]
    for p in written:
        assert p.stat().st_size > 0


def test_framework_labels_in_svg(run_dir, tmp_path):
    written = render.render_run(run_dir, tmp_path / "figs")
    svg = next(p for p in written if p.name == "flux_jc.svg").read_text()
    for label in "ABCD":
        assert f">{label}<" in svg or f">{label} <" in svg


def test_singular_windows_shaded(run_dir, tmp_path):
    import matplotlib.pyplot as plt

    run = reader.load_run_dir(run_dir)
    with_patches = []

    orig = plt.Axes.axvspan

    def spy(self, *a, **k):
        with_patches.append((a[0], a[1]))
        return orig(self, *a, **k)

    plt.Axes.axvspan = spy
    try:
        render.render_flux_figure(run, "jc", tmp_path / "figs")
    finally:
        plt.Axes.axvspan = orig
    assert with_patches, "no singular window was shaded"
    a, b = with_patches[0]
    assert a < 5.0 < b


def test_coupling_label_override(tmp_path):
    run = make_run_dir(tmp_path / "r", with_meta=False)
    written = render.render_run(run, tmp_path / "figs", coupling="dispersive")
    assert out_names(written) == [
        "entropy_dispersive.png", "entropy_dispersive.svg",
        "flux_dispersive.png", "flux_dispersive.svg",
    ]


def test_rerender_idempotent(run_dir, tmp_path):
    first = render.render_run(run_dir, tmp_path / "figs")
    ledger_before = (run_dir / "ledger.csv").read_bytes()
    second = render.render_run(run_dir, tmp_path / "figs")
    assert out_names(first) == out_names(second)
    # inputs untouched, PNG output byte-stable
    assert (run_dir / "ledger.csv").read_bytes() == ledger_before
    png = tmp_path / "figs" / "flux_jc.png"
    assert png.stat().st_size > 0


def test_figure_spec_panel_selection(run_dir, tmp_path):
    spec = render.FigureSpec(
        ledger_csv=run_dir / "ledger.csv",
        entropy_csv=run_dir / "entropy.csv",
        coupling="jc",
        out_dir=tmp_path / "figs",
        panels=("flux",),
        formats=("svg",),
    )
    written = render.render(spec)
    assert out_names(written) == ["flux_jc.svg"]
