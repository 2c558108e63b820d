import json

import pytest

from negcurv_plots import FigureSpec, PlotsError, render
from negcurv_plots.cli import run as plots_run

# the primary CLI is used only to produce the serialized artifacts the
# figures consume; the renderer itself never touches negcurv
from negcurv.cli import run as negcurv_run


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("artifacts")
    runs = {
        "linear": ["solve-linear", "--set", "grid.nx=33", "--set", "grid.leaves=8"],
        "newton": [
            "solve-nonlinear",
            "--set",
            "grid.nx=64",
            "--set",
            "grid.leaves=13",
            "--set",
            "bump.amplitude=0.005",
        ],
        "instability": ["instability", "--set", "run.delta=0.05"],
        "localization": ["localization", "--set", "run.samples=4"],
        "convergence": [
            "convergence",
            "--set",
            "run.check=curvature-fd",
            "--set",
            "run.levels=8,16",
        ],
    }
    for name, argv in runs.items():
        out = root / name
        code = negcurv_run(argv + ["--out", str(out)])
        assert code == 0, f"artifact run {name} failed"
    return root


def spec_file(tmp_path, inputs, kind, output):
    path = tmp_path / f"{kind}.json"
    path.write_text(
        json.dumps({"inputs": [str(p) for p in inputs], "kind": kind, "output": str(output)})
    )
    return path


def test_energy_figure(artifacts, tmp_path):
    out = tmp_path / "energy.png"
    spec = FigureSpec((str(artifacts / "linear" / "report.json"),), "energy", str(out))
    assert render(spec) == out
    assert out.stat().st_size > 0


def test_growth_figure(artifacts, tmp_path):
    out = tmp_path / "growth.png"
    spec = FigureSpec(
        (str(artifacts / "instability" / "nullgrid.csv"),), "growth", str(out)
    )
    render(spec)
    assert out.exists()


def test_residuals_figure(artifacts, tmp_path):
    out = tmp_path / "residuals.png"
    spec = FigureSpec(
        (str(artifacts / "newton" / "report.json"),), "residuals", str(out)
    )
    render(spec)
    assert out.exists()
    # the consumed history is monotone decreasing on a converged run
    rep = json.loads((artifacts / "newton" / "report.json").read_text())
    res = rep["residuals"]
    assert all(a > b for a, b in zip(res, res[1:]))


def test_order_figure(artifacts, tmp_path):
    out = tmp_path / "order.png"
    spec = FigureSpec(
        (str(artifacts / "convergence" / "convergence.json"),), "order", str(out)
    )
    render(spec)
    assert out.exists()


def test_masks_figure(artifacts, tmp_path):
    loc = artifacts / "localization"
    inputs = [
        loc / "domain_mask.csv",
        loc / "future_mask.csv",
        loc / "diamond_mask.csv",
        loc / "support_mask.csv",
    ]
    out = tmp_path / "masks.png"
    spec = FigureSpec(tuple(str(p) for p in inputs), "masks", str(out))
    render(spec)
    assert out.exists()


def test_cli_render(artifacts, tmp_path):
    out = tmp_path / "cli_energy.png"
    spec = spec_file(tmp_path, [artifacts / "linear" / "report.json"], "energy", out)
    assert plots_run(["render", "--spec", str(spec)]) == 0
    assert out.exists()


# ---------------------------------------------------------------------------
# failure modes


def test_unknown_kind(artifacts, tmp_path):
    spec = FigureSpec(
        (str(artifacts / "linear" / "report.json"),), "pie", str(tmp_path / "x.png")
    )
    with pytest.raises(PlotsError, match="unknown figure kind"):
        render(spec)


def test_missing_input(tmp_path):
    spec = FigureSpec((str(tmp_path / "nope.csv"),), "growth", str(tmp_path / "x.png"))
    with pytest.raises(PlotsError, match="not found"):
        render(spec)


def test_empty_csv_rejected(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    spec = FigureSpec((str(empty),), "growth", str(tmp_path / "x.png"))
    with pytest.raises(PlotsError, match="empty"):
        render(spec)


def test_header_only_csv_rejected(tmp_path):
    p = tmp_path / "header.csv"
    p.write_text("zbar,z,v\n")
    spec = FigureSpec((str(p),), "growth", str(tmp_path / "x.png"))
    with pytest.raises(PlotsError, match="no data rows"):
        render(spec)


def test_malformed_csv_rejected(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("zbar,z,v\n1.0,2.0,banana\n")
    spec = FigureSpec((str(p),), "growth", str(tmp_path / "x.png"))
    with pytest.raises(PlotsError, match="malformed"):
        render(spec)


def test_wrong_columns_rejected(tmp_path):
    p = tmp_path / "cols.csv"
    p.write_text("a,b\n1,2\n")
    spec = FigureSpec((str(p),), "growth", str(tmp_path / "x.png"))
    with pytest.raises(PlotsError, match="expected columns"):
        render(spec)


def test_cli_bad_spec_exits_nonzero(tmp_path):
    missing = tmp_path / "missing.json"
    assert plots_run(["render", "--spec", str(missing)]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert plots_run(["render", "--spec", str(bad)]) == 1
    incomplete = tmp_path / "incomplete.json"
    incomplete.write_text(json.dumps({"kind": "energy"}))
    assert plots_run(["render", "--spec", str(incomplete)]) == 1


def test_cli_empty_csv_exits_nonzero(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    spec = spec_file(tmp_path, [empty], "growth", tmp_path / "x.png")
    assert plots_run(["render", "--spec", str(spec)]) == 1
