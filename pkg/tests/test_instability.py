import numpy as np
import pytest

from negcurv import (
    CauchyData,
    CutoffSpec,
    GraphSurface,
    GridSpec,
    ScalarField,
    StepTooLarge,
    build_slab_domain,
    cutoff_chi,
    hyperbolic_paraboloid,
    solve_double_null,
    solve_linear,
    to_txcoords,
    verify_growth_bound,
)


@pytest.fixture(scope="module")
def null_grid():
    return solve_double_null(delta=1.0 / 200.0, z_extent=4.0, zbar_extent=8.0)


# ---------------------------------------------------------------------------
# cutoff


def test_cutoff_plateaus_and_transition():
    assert cutoff_chi(0.5) == 1.0
    assert cutoff_chi(1.0) == 1.0
    assert cutoff_chi(2.0) == 0.0
    assert cutoff_chi(3.0) == 0.0
    mid = cutoff_chi(1.5)
    assert 0.0 < mid < 1.0
    xs = np.linspace(0.9, 2.1, 241)
    vals = cutoff_chi(xs)
    assert (np.diff(vals) <= 1e-15).all()  # monotone nonincreasing


def test_cutoff_custom_window():
    spec = CutoffSpec(inner=2.0, outer=5.0)
    assert cutoff_chi(2.0, spec) == 1.0
    assert cutoff_chi(5.0, spec) == 0.0
    with pytest.raises(ValueError):
        CutoffSpec(inner=2.0, outer=1.0)


# ---------------------------------------------------------------------------
# double-null march


def test_characteristic_data_is_imposed_exactly(null_grid):
    z = null_grid.z
    np.testing.assert_array_equal(null_grid.values[:, 0], 0.0)
    np.testing.assert_allclose(null_grid.values[0], z * cutoff_chi(z), atol=0)
    # chi = 1 on [0, 1]: the data there is exactly z
    jmax = round(1.0 / null_grid.delta)
    np.testing.assert_array_equal(null_grid.values[0, : jmax + 1], z[: jmax + 1])


def test_growth_bound_holds(null_grid):
    out = verify_growth_bound(null_grid, tol=1e-2)
    assert out["bound_holds"]
    assert out["dz_bound_holds"]
    assert out["dz_nonnegative"]
    assert out["dzb_nonnegative"]
    assert out["min_margin"] >= 0.0
    assert out["corner_value"] >= out["corner_bound"]
    # the corner bound itself is macroscopic: (1-tol) * 8^2 / 3
    assert out["corner_bound"] == pytest.approx(0.99 * 64.0 / 3.0)


def test_growth_bound_margin_improves_with_resolution():
    coarse = solve_double_null(delta=1.0 / 50.0, z_extent=2.0, zbar_extent=4.0)
    fine = solve_double_null(delta=1.0 / 100.0, z_extent=2.0, zbar_extent=4.0)
    m_c = verify_growth_bound(coarse, tol=0.0)["min_margin"]
    m_f = verify_growth_bound(fine, tol=0.0)["min_margin"]
    # the scheme over-satisfies the continuum bound; the defect, where
    # negative, shrinks under refinement
    assert m_f >= m_c - 1e-12


def test_step_too_large():
    with pytest.raises(StepTooLarge):
        solve_double_null(delta=1.5, z_extent=6.0, zbar_extent=6.0)


# ---------------------------------------------------------------------------
# resampling to (t, x)


def test_txresample_sup_growth(null_grid):
    tx = to_txcoords(null_grid)
    assert tx.sup_increasing(1.0, 4.0)
    growth = tx.cubic_growth_holds(tol=1e-2)
    assert growth["holds"]
    assert growth["points_checked"] > 0


def test_txresample_traces_data(null_grid):
    tx = to_txcoords(null_grid)
    # along t = x (z = 0) the solution vanishes
    t = tx.t
    x = tx.field.grid.axis_coords(1)
    diag = [np.abs(tx.field.values[i, np.argmin(np.abs(x - t[i]))]) for i in range(40)]
    assert max(diag) < 1e-12


def test_txresample_inside_mask(null_grid):
    tx = to_txcoords(null_grid, spacing=0.1)
    T, X = tx.field.grid.meshgrid()
    zb, z = T + X, T - X
    expected = (zb >= -1e-12) & (zb <= 8 + 1e-12) & (z >= -1e-12) & (z <= 4 + 1e-12)
    np.testing.assert_array_equal(tx.inside, expected)
    np.testing.assert_array_equal(tx.field.values[~tx.inside], 0.0)


def test_cross_check_against_leapfrog_solver(null_grid):
    # restart the leapfrog Cauchy solver from a resampled slice of the
    # double-null solution and compare downstream: same equation (L_u v = 0
    # around the model surface), two independent discretizations
    h = 0.05
    tx = to_txcoords(null_grid, spacing=h)
    t0, x0, x1 = 1.5, -1.0, 1.4
    K, nx = 5, round((x1 - x0) / h) + 1
    grid = GridSpec((t0, x0), h, (K, nx))
    u = GraphSurface.from_catalog(grid, hyperbolic_paraboloid(2))
    dom = build_slab_domain(grid, u.hessian())

    ti = np.rint((t0 - tx.t[0]) / h).astype(int)
    xi = np.rint((x0 - tx.field.grid.origin[1]) / h).astype(int)
    window = tx.field.values[ti : ti + K, xi : xi + nx]
    assert tx.inside[ti : ti + K, xi : xi + nx].all()

    v1 = window[0]
    # N = (1, 0) for the model metric at these points up to normalization:
    # use the exact normal contraction N^0 v_t + N^1 v_x from differences
    vt = (tx.field.values[ti + 1, xi : xi + nx] - tx.field.values[ti - 1, xi : xi + nx]) / (2 * h)
    vx = np.gradient(window[0], h)
    from negcurv import normal_field

    N = normal_field(dom, u.hessian()).values
    v2 = N[0, 0] * vt + N[1, 0] * vx
    rep = solve_linear(u, ScalarField.zeros(grid), CauchyData(v1, v2), dom)
    errs = []
    for k in range(1, K):
        m = dom.leaf_mask(k)
        errs.append(np.abs(rep.leaves[k][m] - window[k][m]).max())
    scale = np.abs(window).max()
    assert max(errs) / scale < 0.02
