"""Figure builders for each artifact kind.

energy     solve-linear report.json         weighted leaf energies E_a(t)
growth     instability nullgrid.csv         v at z = 1 vs the cubic bound
residuals  solve-nonlinear report.json      Newton residual history
order      convergence convergence.json     log-log error vs spacing
masks      localization *_mask.csv          causal/support mask overlay
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class PlotsError(Exception):
    """Missing, empty, or malformed input artifact, or a bad figure spec."""


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[str, ...]
    kind: str
    output: str

    @classmethod
    def from_json(cls, path) -> "FigureSpec":
        path = Path(path)
        if not path.exists():
            raise PlotsError(f"spec file not found: {path}")
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise PlotsError(f"malformed spec {path}: {exc}") from exc
        for key in ("inputs", "kind", "output"):
            if key not in d:
                raise PlotsError(f"spec {path} is missing the {key!r} field")
        inputs = d["inputs"]
        if isinstance(inputs, str):
            inputs = [inputs]
        return cls(tuple(str(p) for p in inputs), str(d["kind"]), str(d["output"]))


def _load_json(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise PlotsError(f"input artifact not found: {p}")
    text = p.read_text()
    if not text.strip():
        raise PlotsError(f"input artifact is empty: {p}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlotsError(f"malformed JSON artifact {p}: {exc}") from exc


def _load_csv(path: str, expected_columns: list[str] | None = None):
    p = Path(path)
    if not p.exists():
        raise PlotsError(f"input artifact not found: {p}")
    with p.open() as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotsError(f"input CSV is empty: {p}") from None
        if expected_columns is not None and not set(expected_columns) <= set(header):
            raise PlotsError(
                f"CSV {p} lacks expected columns {expected_columns}; header is {header}"
            )
        try:
            rows = [[float(x) for x in row] for row in reader if row]
        except ValueError as exc:
            raise PlotsError(f"malformed CSV {p}: {exc}") from exc
    if not rows:
        raise PlotsError(f"input CSV has a header but no data rows: {p}")
    widths = {len(r) for r in rows}
    if widths != {len(header)}:
        raise PlotsError(f"ragged CSV {p}: header has {len(header)} columns")
    data = np.asarray(rows)
    return header, data


def _column(header, data, name):
    return data[:, header.index(name)]


# ---------------------------------------------------------------------------
# figure kinds


def _fig_energy(inputs, ax):
    rep = _load_json(inputs[0])
    try:
        trace = rep["energy_trace"]
        t = np.asarray(trace["leaf_times"])
        e = np.asarray(trace["values"])
        a = trace["a"]
    except (KeyError, TypeError) as exc:
        raise PlotsError(f"{inputs[0]} is not a solve-linear report: {exc}") from exc
    ax.plot(t, e, "o-", label=f"$E_a(t)$, a = {a:g}")
    est = rep.get("energy_estimate", {})
    if est.get("stabilized"):
        ax.axhline(
            est["c_emp_at_stabilized"] * (e[0] + trace["source"]),
            linestyle="--",
            color="gray",
            label=f"$C_{{emp}}(E_0 + S)$ at a = {est['stabilized_a']:g}",
        )
    ax.set_xlabel("normalized leaf time")
    ax.set_ylabel("weighted energy")
    ax.set_title("leaf energies under the exponential weight")
    ax.legend()


def _fig_growth(inputs, ax):
    header, data = _load_csv(inputs[0], ["zbar", "z", "v"])
    zb = _column(header, data, "zbar")
    z = _column(header, data, "z")
    v = _column(header, data, "v")
    zs = np.unique(z)
    target = zs[np.argmin(np.abs(zs - 1.0))]
    sel = z == target
    if not sel.any():
        raise PlotsError(f"no lattice column near z = 1 in {inputs[0]}")
    order = np.argsort(zb[sel])
    zbs = zb[sel][order]
    ax.plot(zbs, v[sel][order], label=f"$v(\\bar\\zeta, {target:g})$")
    ax.plot(zbs, zbs**2 / 3.0, "--", label="$\\bar\\zeta^2/3$")
    ax.set_xlabel("$\\bar\\zeta$")
    ax.set_ylabel("v")
    ax.set_title("characteristic growth vs the cubic lower bound")
    ax.legend()


def _fig_residuals(inputs, ax):
    rep = _load_json(inputs[0])
    res = rep.get("residuals")
    if not isinstance(res, list) or not res:
        raise PlotsError(f"{inputs[0]} carries no residual history")
    ax.semilogy(range(len(res)), res, "o-")
    ax.set_xlabel("Newton iteration")
    ax.set_ylabel("residual sup-norm")
    ax.set_title(
        "Newton residuals"
        + (" (converged)" if rep.get("converged") else " (not converged)")
    )


def _fig_order(inputs, ax):
    rep = _load_json(inputs[0])
    try:
        hs = np.asarray(rep["spacings"], dtype=float)
        errs = np.asarray(rep["errors"], dtype=float)
        order = rep["order"]
        check = rep["check"]
    except (KeyError, TypeError) as exc:
        raise PlotsError(f"{inputs[0]} is not a convergence report: {exc}") from exc
    if (errs <= 0).all():
        raise PlotsError(f"{inputs[0]} has no positive errors to plot")
    ax.loglog(hs, np.maximum(errs, 1e-300), "o-", label="measured error")
    label = "exact" if order == "exact" else f"order {order:.2f}"
    ref = errs.max() * (hs / hs.max()) ** 2
    ax.loglog(hs, ref, "--", color="gray", label="$h^2$ reference")
    ax.set_xlabel("grid spacing h")
    ax.set_ylabel("error")
    ax.set_title(f"{check}: {label}")
    ax.legend()


_MASK_STYLE = {
    "domain": dict(color="0.85", marker="s", s=12, label="domain"),
    "future": dict(color="tab:blue", marker="s", s=8, label="causal future"),
    "diamond": dict(color="tab:orange", marker="s", s=6, label="causal diamond"),
    "support": dict(color="tab:red", marker="o", s=10, label="support"),
}


def _fig_masks(inputs, ax):
    drew = False
    for path in inputs:
        name = Path(path).name
        key = next((k for k in _MASK_STYLE if k in name), None)
        if key is None:
            raise PlotsError(f"cannot infer mask role from file name {name!r}")
        header, data = _load_csv(path, ["x0", "x1"])
        ax.scatter(
            _column(header, data, "x1"),
            _column(header, data, "x0"),
            **_MASK_STYLE[key],
        )
        drew = True
    if not drew:
        raise PlotsError("masks figure needs at least one mask CSV input")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title("domain, causal and support masks")
    ax.legend(loc="upper right", fontsize=8)


FIGURE_KINDS = {
    "energy": _fig_energy,
    "growth": _fig_growth,
    "residuals": _fig_residuals,
    "order": _fig_order,
    "masks": _fig_masks,
}


def render(spec: FigureSpec) -> Path:
    """Render the figure described by ``spec``; returns the output path."""
    if spec.kind not in FIGURE_KINDS:
        raise PlotsError(
            f"unknown figure kind {spec.kind!r}; known: {sorted(FIGURE_KINDS)}"
        )
    if not spec.inputs:
        raise PlotsError("figure spec lists no inputs")
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=130)
    try:
        FIGURE_KINDS[spec.kind](list(spec.inputs), ax)
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.tight_layout()
        fig.savefig(out)
    finally:
        plt.close(fig)
    return out
