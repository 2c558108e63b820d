"""Command-line entry point: every experiment as a subcommand.

Configs are INI files overlaid on per-subcommand defaults, with repeatable
``--set section.key=value`` overrides; unknown sections or keys are
rejected.  Every run writes its artifacts under ``--out`` plus a
``manifest.json`` listing the effective config, library versions, wall
clock, sha256 of each output file, and the key scalar results.

Exit codes: 0 success, 1 validation/config failure, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, geometry, localization
from ._kernels import BACKEND
from .errors import (
    CFLViolation,
    NegcurvError,
    NotLorentzian,
    NotSpacelike,
    SignatureLost,
    SingularHessian,
    SingularMetric,
    StepTooLarge,
    UnknownCheck,
)
from .foliation import Direction, build_slab_domain, causal_cone, causal_diamond, validate_spacelike
from .grid import GridSpec, ScalarField, write_field_csv, write_mask_csv
from .instability import CutoffSpec, solve_double_null, to_txcoords, verify_growth_bound
from .linear_solver import (
    CauchyData,
    manufactured_linear,
    solve_linear,
    verify_energy_estimate,
)
from .nonlinear_solver import NonlinearProblem, solve_nonlinear
from .surfaces import (
    GraphSurface,
    PerturbedParaboloid,
    SeparableBump,
    hyperbolic_paraboloid,
)

_NUMERICAL_ERRORS = (
    CFLViolation,
    StepTooLarge,
    SignatureLost,
    SingularHessian,
    SingularMetric,
    NotLorentzian,
    NotSpacelike,
)

DEFAULTS: dict[str, dict[str, dict[str, str]]] = {
    "curvature": {
        "surface": {"id": "hyperbolic-paraboloid", "n": "2"},
        "grid": {"lo": "-1.0", "hi": "1.0", "points": "64"},
        "run": {"path": "analytic", "seed": "0"},
    },
    "linearize-check": {
        "grid": {"lo": "0.1", "hi": "0.6", "points": "33"},
        "run": {"seed": "0", "npolys": "3", "degree": "4"},
    },
    "solve-linear": {
        "grid": {"t0": "0.0", "x0": "-1.0", "x1": "1.0", "nx": "65", "leaves": "16"},
        "run": {"a_grid": "1,2,4,8,16,32,64,128,256", "weight_a": "4.0", "seed": "0"},
    },
    "solve-nonlinear": {
        "grid": {"t0": "0.0", "x0": "-3.0", "x1": "3.0", "nx": "128", "leaves": "26"},
        "bump": {
            "center_t": "0.64",
            "center_x": "0.0",
            "width_t": "0.55",
            "width_x": "1.2",
            "amplitude": "0.01",
            "profile": "poly",
        },
        "run": {"max_iters": "12", "tol": "0.0", "admissibility": "1.0", "seed": "0"},
    },
    "instability": {
        "run": {
            "delta": "0.02",
            "z_extent": "4.0",
            "zbar_extent": "8.0",
            "tol": "0.01",
            "seed": "0",
        }
    },
    "localization": {
        "grid": {"t0": "0.0", "x0": "-1.0", "x1": "1.0", "nx": "65", "leaves": "17"},
        "bump": {
            "center_t": "0.22",
            "center_x": "0.0",
            "width_t": "0.12",
            "width_x": "0.3",
            "amplitude": "1.0",
            "profile": "exp",
        },
        "run": {"variant": "tautological", "samples": "32", "seed": "0"},
    },
    "convergence": {
        "run": {"check": "conformal-identity", "levels": "16,32,64", "seed": "0"}
    },
}


class ConfigError(NegcurvError):
    pass


def load_config(subcommand: str, path: str | None, overrides: list[str]) -> dict:
    cfg = {s: dict(kv) for s, kv in DEFAULTS[subcommand].items()}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for section in parser.sections():
            if section not in cfg:
                raise ConfigError(f"unknown config section [{section}]")
            for key, value in parser.items(section):
                if key not in cfg[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                cfg[section][key] = value
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        loc, value = item.split("=", 1)
        section, key = loc.split(".", 1)
        if section not in cfg or key not in cfg[section]:
            raise ConfigError(f"unknown config key {section}.{key}")
        cfg[section][key] = value
    return cfg


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _finish(out: Path, subcommand: str, cfg: dict, started: float, key_results: dict) -> None:
    outputs = sorted(p for p in out.iterdir() if p.is_file() and p.name != "manifest.json")
    manifest = {
        "subcommand": subcommand,
        "config": cfg,
        "backend": BACKEND,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "package": __version__,
        },
        "wall_clock_s": time.time() - started,
        "outputs": {p.name: _sha256(p) for p in outputs},
        "key_results": key_results,
    }
    _write_json(out / "manifest.json", manifest)


# ---------------------------------------------------------------------------
# shared builders


def _slab(cfg: dict) -> tuple[GridSpec, GraphSurface]:
    g = cfg["grid"]
    x0, x1, nx = float(g["x0"]), float(g["x1"]), int(g["nx"])
    h = (x1 - x0) / (nx - 1)
    grid = GridSpec((float(g["t0"]), x0), h, (int(g["leaves"]), nx))
    return grid, GraphSurface.from_catalog(grid, hyperbolic_paraboloid(2))


def _bump(cfg: dict) -> SeparableBump:
    b = cfg["bump"]
    return SeparableBump(
        (float(b["center_t"]), float(b["center_x"])),
        (float(b["width_t"]), float(b["width_x"])),
        float(b["amplitude"]),
        b["profile"],
    )


def _closed_form_curvature(grid: GridSpec) -> np.ndarray:
    n = grid.dim
    r2 = sum(c * c for c in grid.meshgrid())
    return -((1.0 + r2) ** (-(n + 2) / 2))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_curvature(cfg: dict, out: Path) -> dict:
    n = int(cfg["surface"]["n"])
    if cfg["surface"]["id"] != "hyperbolic-paraboloid":
        raise ConfigError(f"unknown surface id {cfg['surface']['id']!r}")
    g = cfg["grid"]
    grid = GridSpec.cube(float(g["lo"]), float(g["hi"]), int(g["points"]), n)
    path = cfg["run"]["path"]
    if path == "analytic":
        u = GraphSurface.from_catalog(grid, hyperbolic_paraboloid(n))
    elif path == "fd":
        cat = GraphSurface.from_catalog(grid, hyperbolic_paraboloid(n))
        u = GraphSurface.from_values(grid, cat.values)
    else:
        raise ConfigError(f"run.path must be analytic or fd, got {path!r}")
    k = geometry.psi(u)
    write_field_csv(k, out / "curvature.csv")
    dev = float(np.abs(k.values - _closed_form_curvature(grid)).max())
    _write_json(out / "report.json", {"max_closed_form_deviation": dev, "path": path})
    return {"max_closed_form_deviation": dev}


def _random_polynomials(grid: GridSpec, count: int, degree: int, seed: int):
    rng = np.random.default_rng(seed)
    coords = grid.meshgrid()
    dim = grid.dim
    polys = []
    exps = [
        e
        for e in np.ndindex(*((degree + 1,) * dim))
        if sum(e) <= degree
    ]
    for _ in range(count):
        coeffs = rng.uniform(-1, 1, size=len(exps))
        vals = np.zeros(grid.shape)
        for c, e in zip(coeffs, exps):
            term = np.full(grid.shape, c)
            for ax, p in enumerate(e):
                if p:
                    term = term * coords[ax] ** p
            vals += term
        polys.append(ScalarField(grid, vals))
    return polys


def conformal_identity_defect(
    grid: GridSpec, v: ScalarField, margin_frac: float = 0.25
) -> float:
    """max interior |box_g v - f * L_u v| for the paraboloid, n >= 3.

    The interior excludes a fixed physical fraction of each side (at least
    two cells) so the measured region does not creep toward the boundary
    under refinement.
    """
    u = GraphSurface.from_catalog(grid, hyperbolic_paraboloid(grid.dim))
    g = geometry.lorentzian_metric(u)
    lhs = geometry.apply_box(g, v).values
    rhs = geometry.conformal_factor(u).values * geometry.apply_linearized(u, v).values
    keep = np.ones(grid.shape, dtype=bool)
    for ax in range(grid.dim):
        c = grid.axis_coords(ax)
        pad = max(margin_frac * (c[-1] - c[0]), 2 * grid.spacing)
        inside = (c >= c[0] + pad - 1e-12) & (c <= c[-1] - pad + 1e-12)
        shape = [1] * grid.dim
        shape[ax] = len(c)
        keep &= inside.reshape(shape)
    return float(np.abs(lhs - rhs)[keep].max())


def _cmd_linearize_check(cfg: dict, out: Path) -> dict:
    g = cfg["grid"]
    grid = GridSpec.cube(float(g["lo"]), float(g["hi"]), int(g["points"]), 3)
    polys = _random_polynomials(
        grid, int(cfg["run"]["npolys"]), int(cfg["run"]["degree"]), int(cfg["run"]["seed"])
    )
    defects = [conformal_identity_defect(grid, v) for v in polys]
    _write_json(
        out / "report.json",
        {"defects": defects, "max_defect": max(defects), "spacing": grid.spacing},
    )
    return {"max_defect": max(defects)}


def _cmd_solve_linear(cfg: dict, out: Path) -> dict:
    grid, u = _slab(cfg)
    dom = build_slab_domain(grid, u.hessian())
    u, F, data, v_exact = manufactured_linear(dom)
    rep = solve_linear(u, F, data, dom, weight_a=float(cfg["run"]["weight_a"]))
    a_grid = [float(a) for a in cfg["run"]["a_grid"].split(",")]
    est = verify_energy_estimate(rep, a_grid)
    err = float(np.abs(rep.v.values - v_exact.values)[dom.mask_full()].max())
    write_field_csv(rep.v, out / "v.csv")
    report = {
        "manufactured_error": err,
        "cfl_ratio": rep.cfl_ratio,
        "substeps": rep.substeps,
        "c_emp": rep.c_emp,
        "energy_trace": {
            "a": rep.trace.a,
            "leaf_times": rep.trace.leaf_times.tolist(),
            "values": rep.trace.values.tolist(),
            "source": rep.trace.source,
        },
        "energy_estimate": est,
        "spacelike": validate_spacelike(dom, u.hessian()).to_json(),
    }
    _write_json(out / "report.json", report)
    return {"manufactured_error": err, "stabilized_a": est["stabilized_a"]}


def _cmd_solve_nonlinear(cfg: dict, out: Path) -> dict:
    grid, u_S = _slab(cfg)
    dom = build_slab_domain(grid, u_S.hessian())
    bump = _bump(cfg)
    u_star = GraphSurface.from_catalog(grid, PerturbedParaboloid(2, bump))
    eta = ScalarField(grid, geometry.psi(u_star).values - geometry.psi(u_S).values)
    problem = NonlinearProblem(
        u_S,
        eta,
        dom,
        tol=float(cfg["run"]["tol"]),
        max_iters=int(cfg["run"]["max_iters"]),
        admissibility=float(cfg["run"]["admissibility"]),
    )
    rep = solve_nonlinear(problem)
    write_field_csv(rep.surface.scalar(), out / "surface.csv")
    err = float(np.abs(rep.surface.values - u_star.values)[dom.mask_full()].max())
    report = rep.to_json()
    report["manufactured_error"] = err
    report["spacing"] = grid.spacing
    _write_json(out / "report.json", report)
    if not rep.converged:
        raise CFLViolation("Newton iteration did not converge")  # exit 2 path
    return {"residuals": rep.residuals, "manufactured_error": err}


def _cmd_instability(cfg: dict, out: Path) -> dict:
    r = cfg["run"]
    grid = solve_double_null(
        CutoffSpec(),
        float(r["delta"]),
        float(r["z_extent"]),
        float(r["zbar_extent"]),
    )
    with (out / "nullgrid.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["zbar", "z", "v"])
        zb, z = grid.zbar, grid.z
        for i in range(grid.values.shape[0]):
            for j in range(grid.values.shape[1]):
                w.writerow([f"{zb[i]:.17e}", f"{z[j]:.17e}", f"{grid.values[i, j]:.17e}"])
    tx = to_txcoords(grid)
    write_field_csv(tx.field, out / "txgrid.csv")
    with (out / "sup_growth.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "sup_abs_v"])
        for t, s in zip(tx.t, tx.sup_abs):
            w.writerow([f"{t:.17e}", f"{s:.17e}"])
    bound = verify_growth_bound(grid, float(r["tol"]))
    bound["sup_increasing_1_to_4"] = tx.sup_increasing(1.0, 4.0)
    bound["cubic_growth"] = tx.cubic_growth_holds()
    _write_json(out / "report.json", bound)
    return {"bound_holds": bound["bound_holds"], "corner_value": bound["corner_value"]}


def _cmd_localization(cfg: dict, out: Path) -> dict:
    grid, u = _slab(cfg)
    dom = build_slab_domain(grid, u.hessian())
    bump = _bump(cfg)
    phi = ScalarField(grid, bump.value(grid.meshgrid()))
    variant = cfg["run"]["variant"]
    if variant == "tautological":
        eta = localization.tautological_eta(u, phi)
    elif variant == "positive-bump":
        eta = phi
    else:
        raise ConfigError(f"run.variant must be tautological or positive-bump, got {variant!r}")
    rows = localization.pairing_table(
        eta, u, dom, int(cfg["run"]["samples"]), int(cfg["run"]["seed"])
    )
    with (out / "pairings.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample", "value", "normalization", "relative"])
        for row in rows:
            w.writerow(
                [
                    row["sample"],
                    f"{row['value']:.17e}",
                    f"{row['normalization']:.17e}",
                    f"{row['relative']:.17e}",
                ]
            )
    h = grid.spacing
    masses = localization.check_support_localization(eta, u, dom, tol=5 * h * h)
    _write_json(out / "masses.json", masses)
    metric = u.hessian()
    seed_mask = (np.abs(eta.values) > 1e-13 * np.abs(eta.values).max()) & dom.mask_full()
    write_mask_csv(grid, dom.mask_full(), out / "domain_mask.csv")
    write_mask_csv(grid, seed_mask, out / "support_mask.csv")
    write_mask_csv(
        grid,
        causal_cone(metric, seed_mask, Direction.FUTURE, dom.time_axis, 1.0).membership,
        out / "future_mask.csv",
    )
    write_mask_csv(grid, causal_diamond(metric, seed_mask, dom.time_axis, 1.0), out / "diamond_mask.csv")
    max_rel = max(abs(r["relative"]) for r in rows)
    return {"max_relative_pairing": max_rel, "outside_diamond_mass": masses["outside_diamond_mass"]}


# ---------------------------------------------------------------------------
# convergence harness


def _check_conformal_identity(level: int, seed: int) -> float:
    # h = 1/level on the cube [0.1, 0.6]^3
    grid = GridSpec.cube(0.1, 0.6, round(0.5 * level) + 1, 3)
    polys = _random_polynomials(grid, 3, 4, seed)
    return max(conformal_identity_defect(grid, v) for v in polys)


def _check_curvature_fd(level: int, seed: int) -> float:
    # finite differences are exact on the quadratic model surface, so the
    # truncation error is measured on a perturbed surface whose derivatives
    # are still available in closed form; interior only (composed one-sided
    # stencils lose an order in the outermost rows)
    grid = GridSpec.cube(-1.0, 1.0, 2 * level + 1, 2)
    bump = SeparableBump((0.0, 0.0), (0.7, 0.7), 0.1, profile="poly")
    cat = PerturbedParaboloid(2, bump)
    exact = geometry.psi(GraphSurface.from_catalog(grid, cat)).values
    fd = geometry.psi(GraphSurface.from_values(grid, cat.value(grid.meshgrid()))).values
    inner = (slice(2, -2),) * 2
    return float(np.abs(fd - exact)[inner].max())


def _check_linear_manufactured(level: int, seed: int) -> float:
    nx = 2 * level + 1
    h = 2.0 / (nx - 1)
    grid = GridSpec((0.0, -1.0), h, (max(3, nx // 4), nx))
    u = GraphSurface.from_catalog(grid, hyperbolic_paraboloid(2))
    dom = build_slab_domain(grid, u.hessian())
    u, F, data, v_exact = manufactured_linear(dom)
    rep = solve_linear(u, F, data, dom)
    return float(np.abs(rep.v.values - v_exact.values)[dom.mask_full()].max())


def _check_zero(level: int, seed: int) -> float:
    return 0.0


CHECKS = {
    "conformal-identity": _check_conformal_identity,
    "curvature-fd": _check_curvature_fd,
    "linear-manufactured": _check_linear_manufactured,
    "zero": _check_zero,
}


def convergence_harness(check_id: str, levels: list[int], seed: int = 0) -> dict:
    """Run a registered invariant over refinement levels and fit the order."""
    if check_id not in CHECKS:
        raise UnknownCheck(f"unknown check {check_id!r}; known: {sorted(CHECKS)}")
    fn = CHECKS[check_id]
    errors = [fn(level, seed) for level in levels]
    hs = [1.0 / level for level in levels]
    if max(errors) < 1e-14:
        order: float | str = "exact"
    else:
        slope = np.polyfit(np.log(hs), np.log(np.maximum(errors, 1e-300)), 1)[0]
        order = float(slope)
    return {
        "check": check_id,
        "levels": levels,
        "spacings": hs,
        "errors": errors,
        "order": order,
    }


def _cmd_convergence(cfg: dict, out: Path) -> dict:
    r = cfg["run"]
    levels = [int(x) for x in r["levels"].split(",")]
    result = convergence_harness(r["check"], levels, int(r["seed"]))
    _write_json(out / "convergence.json", result)
    return {"order": result["order"], "errors": result["errors"]}


_COMMANDS = {
    "curvature": _cmd_curvature,
    "linearize-check": _cmd_linearize_check,
    "solve-linear": _cmd_solve_linear,
    "solve-nonlinear": _cmd_solve_nonlinear,
    "instability": _cmd_instability,
    "localization": _cmd_localization,
    "convergence": _cmd_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="negcurv",
        description="Numerical experiments for hyperbolic prescribed-curvature surfaces",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override a config value (repeatable)",
        )
        p.add_argument("--out", default=".", help="output directory")
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    started = time.time()
    try:
        cfg = load_config(args.subcommand, args.config, args.overrides)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        key_results = _COMMANDS[args.subcommand](cfg, out)
        _finish(out, args.subcommand, cfg, started, key_results)
        return 0
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (NegcurvError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:  # console-script entry point
    raise SystemExit(run())
