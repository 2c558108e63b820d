"""End-to-end acceptance checks, one per headline capability.

Each test prints a single pass/fail line (collected in the terminal
summary) and then asserts.  Tolerances are frozen here and must not be
loosened to make a failing check pass.
"""

import time

import numpy as np

from negcurv import (
    CauchyData,
    Direction,
    GraphSurface,
    GridSpec,
    NonlinearProblem,
    PerturbedParaboloid,
    ScalarField,
    SeparableBump,
    build_slab_domain,
    causal_cone,
    hyperbolic_paraboloid,
    psi,
    solve_double_null,
    solve_linear,
    solve_nonlinear,
    to_txcoords,
    verify_energy_estimate,
    verify_growth_bound,
)
from negcurv.cli import convergence_harness
from negcurv.linear_solver import manufactured_linear

from conftest import record_acceptance


def check(name, ok, detail):
    record_acceptance(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_acceptance_conformal_identity():
    # box_g v = f * L_u v on the n=3 model surface: interior defect <= 60 h^2
    # with fitted order >= 1.8 over h in {1/16, 1/32, 1/64}; runtime < 10 s
    start = time.perf_counter()
    out = convergence_harness("conformal-identity", [16, 32, 64], seed=0)
    elapsed = time.perf_counter() - start
    errs = np.array(out["errors"])
    hs = np.array(out["spacings"])
    bound_ok = bool((errs <= 60 * hs**2).all())
    order_ok = out["order"] >= 1.8
    time_ok = elapsed < 10.0
    check(
        "conformal-identity",
        bound_ok and order_ok and time_ok,
        f"order={out['order']:.2f} (>=1.8), max C={np.max(errs / hs**2):.1f} "
        f"(<=60), runtime={elapsed:.1f}s (<10)",
    )


def test_acceptance_curvature_closed_form():
    # analytic path within 1e-12 of -(1+|x|^2+t^2)^{-(n+2)/2} on 64^n grids;
    # FD path converges at order >= 1.8
    devs = {}
    for n in (2, 3):
        grid = GridSpec.cube(-1.0, 1.0, 64, n)
        u = GraphSurface.from_catalog(grid, hyperbolic_paraboloid(n))
        r2 = sum(c * c for c in grid.meshgrid())
        closed = -((1.0 + r2) ** (-(n + 2) / 2))
        devs[n] = float(np.abs(psi(u).values - closed).max())
    fd = convergence_harness("curvature-fd", [8, 16, 32], seed=0)
    analytic_ok = max(devs.values()) <= 1e-12
    fd_ok = fd["order"] >= 1.8
    check(
        "curvature-closed-form",
        analytic_ok and fd_ok,
        f"analytic dev n=2: {devs[2]:.1e}, n=3: {devs[3]:.1e} (<=1e-12); "
        f"fd order={fd['order']:.2f} (>=1.8)",
    )


def test_acceptance_instability_growth():
    # at delta = 1/200 the double-null solution dominates 0.99 * z*zb^2/3 on
    # [0,1]x[0,8], v(zb=8, z=1) >= 0.99*64/3, and sup_x |v(t,.)| strictly
    # increases on t in [1, 4]; runtime < 30 s
    start = time.perf_counter()
    grid = solve_double_null(delta=1.0 / 200.0, z_extent=4.0, zbar_extent=8.0)
    bound = verify_growth_bound(grid, tol=1e-2)
    tx = to_txcoords(grid)
    sup_ok = tx.sup_increasing(1.0, 4.0)
    elapsed = time.perf_counter() - start
    corner_ok = bound["corner_value"] >= 0.99 * 64.0 / 3.0
    ok = bound["bound_holds"] and corner_ok and sup_ok and elapsed < 30.0
    check(
        "instability-growth",
        ok,
        f"bound_holds={bound['bound_holds']}, v(8,1)={bound['corner_value']:.2f} "
        f"(>={0.99 * 64 / 3:.2f}), sup increasing on [1,4]={sup_ok}, "
        f"runtime={elapsed:.1f}s (<30)",
    )


def test_acceptance_nonlinear_solve():
    # manufactured u* = u_S + 0.01 * interior bump on a 26 x 128 slab:
    # >= 10x residual contraction per pre-floor Newton step, recovery within
    # 0.5 h^2, and the imposed Cauchy data untouched (<= 1e-14)
    grid = GridSpec((0.0, -3.0), 6.0 / 127.0, (26, 128))
    base = GraphSurface.from_catalog(grid, hyperbolic_paraboloid(2))
    bump = SeparableBump((0.64, 0.0), (0.55, 1.2), 0.01, profile="poly")
    star = GraphSurface.from_catalog(grid, PerturbedParaboloid(2, bump))
    dom = build_slab_domain(grid, base.hessian())
    eta = ScalarField(grid, psi(star).values - psi(base).values)
    rep = solve_nonlinear(NonlinearProblem(base, eta, dom, admissibility=1.0))

    r = rep.residuals
    h = grid.spacing
    floor_level = 10 * h * h
    # contraction counts only for steps started above the h^2 floor; once
    # the residual sits at the discretization floor Newton cannot improve it
    ratios = [
        r[i] / r[i + 1] for i in range(len(r) - 1) if r[i] > floor_level
    ]
    contraction_ok = len(ratios) >= 1 and min(ratios) >= 10.0
    floor_ok = r[-1] <= floor_level
    err = float(np.abs(rep.surface.values - star.values)[dom.mask_full()].max())
    recovery_ok = err <= 0.5 * h * h
    data_defect = float(np.abs(rep.surface.values[0] - base.values[0]).max())
    data_ok = data_defect <= 1e-14
    ok = rep.converged and contraction_ok and floor_ok and recovery_ok and data_ok
    check(
        "nonlinear-solve",
        ok,
        f"contraction={min(ratios) if ratios else 0:.1f}x (>=10), "
        f"final residual={r[-1]:.2e} (<= 10 h^2 = {floor_level:.2e}), "
        f"recovery err={err:.2e} (<= 0.5 h^2 = {0.5 * h * h:.2e}), "
        f"data defect={data_defect:.1e} (<=1e-14)",
    )


def test_acceptance_energy_estimate():
    # C_emp at the stabilized weight varies by < 2x across h in
    # {1/32, 1/64, 1/128} for the manufactured linear problem
    vals = []
    for nx in (65, 129, 257):
        h = 2.0 / (nx - 1)
        grid = GridSpec((0.0, -1.0), h, (nx // 4, nx))
        u = GraphSurface.from_catalog(grid, hyperbolic_paraboloid(2))
        dom = build_slab_domain(grid, u.hessian())
        _, F, data, _ = manufactured_linear(dom)
        rep = solve_linear(u, F, data, dom)
        est = verify_energy_estimate(rep, [2.0**j for j in range(9)])
        assert est["stabilized"], f"weight failed to stabilize at nx={nx}"
        vals.append(est["c_emp_at_stabilized"])
    ratio = max(vals) / min(vals)
    check(
        "energy-estimate",
        ratio < 2.0,
        f"C_emp across resolutions: {[f'{v:.3f}' for v in vals]}, "
        f"ratio={ratio:.2f} (<2)",
    )


def test_acceptance_localization():
    # tautological eta = L_u phi: all 32 kernel pairings <= 5 h^2 relative
    # and outside-diamond mass <= 5 h^2; a signed bump eta breaks the
    # pairing threshold by > 10x
    from negcurv import check_support_localization, pairing_table, tautological_eta

    grid = GridSpec((0.0, -1.0), 1.0 / 32.0, (17, 65))
    u = GraphSurface.from_catalog(grid, hyperbolic_paraboloid(2))
    dom = build_slab_domain(grid, u.hessian())
    h = grid.spacing
    tol = 5 * h * h
    phi = ScalarField(
        grid, SeparableBump((0.22, 0.0), (0.12, 0.3), 1.0).value(grid.meshgrid())
    )
    eta = tautological_eta(u, phi)
    rows = pairing_table(eta, u, dom, count=32, seed=0)
    worst = max(abs(r["relative"]) for r in rows)
    masses = check_support_localization(eta, u, dom, tol=tol)
    pos = ScalarField(grid, 0.05 * phi.values)
    pos_rows = pairing_table(pos, u, dom, count=32, seed=0)
    pos_worst = max(abs(r["relative"]) for r in pos_rows)
    ok = worst <= tol and masses["diamond_pass"] and pos_worst > 10 * tol
    check(
        "localization",
        ok,
        f"tautological max |pairing|={worst:.1e} (<= {tol:.1e}), "
        f"outside-diamond={masses['outside_diamond_mass']:.1e} (<= {tol:.1e}), "
        f"positive-bump max |pairing|={pos_worst:.2f} (> {10 * tol:.1e})",
    )


def test_acceptance_finite_speed():
    # F = 0 with data in a 4-cell blob: relative squared mass outside the
    # one-cell-dilated causal future of the blob <= 1e-10
    grid = GridSpec((0.0, -1.0), 1.0 / 32.0, (17, 65))
    u = GraphSurface.from_catalog(grid, hyperbolic_paraboloid(2))
    dom = build_slab_domain(grid, u.hessian())
    v1 = np.zeros(dom.spatial_shape)
    v1[30:34] = 1.0  # 4-cell blob
    rep = solve_linear(u, ScalarField.zeros(grid), CauchyData(v1, np.zeros_like(v1)), dom)
    seed = np.zeros(grid.shape, dtype=bool)
    seed[0, 30:34] = True
    cone = causal_cone(u.hessian(), seed, Direction.FUTURE, dom.time_axis, 1.0)
    mask = dom.mask_full()
    v2 = rep.v.values**2
    total = v2[mask].sum()
    outside = v2[mask & ~cone.membership].sum() / total
    check(
        "finite-speed",
        outside <= 1e-10,
        f"relative mass outside dilated cone = {outside:.2e} (<=1e-10)",
    )
