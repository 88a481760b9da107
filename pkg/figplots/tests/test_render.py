import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest
from PIL import Image

from emwalk_figs import MissingFile, PlotSpec, SchemaMismatch, render
from emwalk_figs.cli import main as cli_main


def write_csv(path, header, rows):
    lines = [header] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture
def convergence_csv(tmp_path):
    path = tmp_path / "convergence.csv"
    rows = []
    for level, scale in (("+1", 1.0), ("+2", 2.0)):
        for k in range(4, 8):
            eps = 2.0 ** -k
            rows.append((level, 0.0, eps, scale * eps ** 2))
    write_csv(path, "level,beta,eps,delta", rows)
    return path


@pytest.fixture
def bloch_csv(tmp_path):
    path = tmp_path / "bloch.csv"
    rows = []
    import math
    for e in (0.1, 0.2):
        for j in range(60):
            rows.append((e, j, -0.5 + 0.5 * math.cos(e * j)))
    write_csv(path, "epsA_E,j,p_mean", rows)
    return path


@pytest.fixture
def density_csv(tmp_path):
    path = tmp_path / "drift_density.csv"
    rows = []
    for e in (0.0, 0.01):
        for p in range(-3, 4):
            for q in range(-4, 5):
                rows.append((e, p, q, 0.01 * (5 - abs(p)) * (5 - abs(q))))
    write_csv(path, "epsA_E,p,q,P", rows)
    return path


@pytest.fixture
def scan_csv(tmp_path):
    path = tmp_path / "spread_vs_e.csv"
    rows = []
    for b in (0.16, 1.0):
        for j in (100, 500):
            for i in range(8):
                e = i / 100
                rows.append((b, e, j, 10 + 100 * e * j / 500))
    write_csv(path, "epsA_B,epsA_E,j,q_spread", rows)
    return path


def spec_dict(csv_path, kind, out_path, **extra):
    d = {"input_csv": str(csv_path), "figure_kind": kind, "output": str(out_path)}
    d.update(extra)
    return d


def test_render_all_kinds(convergence_csv, bloch_csv, density_csv, scan_csv, tmp_path):
    cases = [
        (convergence_csv, "loglog"),
        (bloch_csv, "timeseries"),
        (density_csv, "heatmap_grid"),
        (scan_csv, "scan"),
    ]
    for csv_path, kind in cases:
        out = tmp_path / f"{kind}.png"
        result = render(PlotSpec.from_dict(spec_dict(csv_path, kind, out)))
        assert result == out and out.exists()
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_rendering_is_deterministic(bloch_csv, tmp_path):
    out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
    render(PlotSpec.from_dict(spec_dict(bloch_csv, "timeseries", out1)))
    render(PlotSpec.from_dict(spec_dict(bloch_csv, "timeseries", out2)))
    assert out1.read_bytes() == out2.read_bytes()


def test_svg_output_is_deterministic(scan_csv, tmp_path):
    out1, out2 = tmp_path / "a.svg", tmp_path / "b.svg"
    render(PlotSpec.from_dict(spec_dict(scan_csv, "scan", out1)))
    render(PlotSpec.from_dict(spec_dict(scan_csv, "scan", out2)))
    body1, body2 = out1.read_bytes(), out2.read_bytes()
    assert body1 == body2
    assert b"input-sha256:" in body1
    assert b"dc:date" not in body1


def test_checksum_embedded_in_png(bloch_csv, tmp_path):
    import hashlib
    out = tmp_path / "bloch.png"
    render(PlotSpec.from_dict(spec_dict(bloch_csv, "timeseries", out)))
    digest = hashlib.sha256(bloch_csv.read_bytes()).hexdigest()
    assert Image.open(out).info.get("input-sha256") == digest


def test_input_csv_not_mutated(bloch_csv, tmp_path):
    before = bloch_csv.read_bytes()
    render(PlotSpec.from_dict(spec_dict(bloch_csv, "timeseries", tmp_path / "x.png")))
    assert bloch_csv.read_bytes() == before


def test_timeseries_groups_by_the_varying_sweep_column(tmp_path):
    """localization layout: epsA_E is constant, epsA_B sweeps."""
    path = tmp_path / "localization.csv"
    rows = []
    for b in (0.16, 0.7854):
        for j in range(30):
            rows.append((b, 1.5708, j, 0.1 * j * (1 + b)))
    write_csv(path, "epsA_B,epsA_E,j,q_spread", rows)
    from emwalk_figs.specs import load_table
    spec = PlotSpec.from_dict(spec_dict(path, "timeseries", tmp_path / "x.png"))
    _, roles = load_table(spec)
    assert roles["group"] == ("epsA_B",)
    render(spec)


def test_missing_column_names_the_offender(tmp_path):
    bad = tmp_path / "bad.csv"
    write_csv(bad, "epsA_E,j,wrong", [(0.1, 0, 1.0)])
    with pytest.raises(SchemaMismatch, match="value column"):
        render(PlotSpec.from_dict(spec_dict(bad, "timeseries", tmp_path / "x.png")))
    bad2 = tmp_path / "bad2.csv"
    write_csv(bad2, "level,beta,eps", [("+1", 0.0, 0.1)])
    with pytest.raises(SchemaMismatch, match="delta"):
        render(PlotSpec.from_dict(spec_dict(bad2, "loglog", tmp_path / "x.png")))


def test_empty_csv_is_schema_mismatch(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaMismatch):
        render(PlotSpec.from_dict(spec_dict(empty, "timeseries", tmp_path / "x.png")))
    header_only = tmp_path / "header.csv"
    header_only.write_text("epsA_E,j,p_mean\n")
    with pytest.raises(SchemaMismatch, match="no data rows"):
        render(PlotSpec.from_dict(spec_dict(header_only, "timeseries", tmp_path / "x.png")))


def test_missing_file_errors(tmp_path):
    with pytest.raises(MissingFile):
        render(PlotSpec.from_dict(spec_dict(tmp_path / "nope.csv", "scan", tmp_path / "x.png")))
    with pytest.raises(MissingFile):
        PlotSpec.from_file(tmp_path / "nospec.json")


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(SchemaMismatch, match="figure_kind"):
        PlotSpec.from_dict({"input_csv": "a.csv", "figure_kind": "pie", "output": "x.png"})


def test_cli_render(bloch_csv, tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    out = tmp_path / "out.png"
    spec_path.write_text(json.dumps(spec_dict(bloch_csv, "timeseries", out,
                                              labels={"title": "mean position"})))
    assert cli_main(["render", "--spec", str(spec_path)]) == 0
    assert out.exists()
    bad = tmp_path / "badspec.json"
    bad.write_text(json.dumps(spec_dict(tmp_path / "nope.csv", "scan", out)))
    assert cli_main(["render", "--spec", str(bad)]) == 1


@pytest.mark.skipif(shutil.which("emwalk") is None, reason="primary CLI not installed")
def test_renders_real_experiment_output(tmp_path):
    """Drive the primary package through its CLI and render its CSV."""
    run_dir = tmp_path / "run"
    subprocess.run(
        ["emwalk", "bloch", "--out-dir", str(run_dir),
         "--override", "epsA_E=[0.5]", "--override", "steps=40"],
        check=True, capture_output=True, text=True,
    )
    out = tmp_path / "bloch.png"
    render(PlotSpec.from_dict(spec_dict(run_dir / "bloch.csv", "timeseries", out)))
    assert out.exists()
