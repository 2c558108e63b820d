import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from negcurv import (
    CausalMask,
    Direction,
    EmptyDomain,
    GraphSurface,
    GridSpec,
    NotLorentzian,
    NotSpacelike,
    QuadraticForm,
    build_slab_domain,
    causal_cone,
    causal_diamond,
    char_speeds,
    hyperbolic_paraboloid,
    normal_field,
    validate_spacelike,
)


def quadratic_metric(coeffs, grid):
    return GraphSurface.from_catalog(grid, QuadraticForm(coeffs)).hessian()


def minkowski(grid):
    return quadratic_metric((-1.0,) + (1.0,) * (grid.dim - 1), grid)


# ---------------------------------------------------------------------------
# characteristic speeds


def test_char_speed_minkowski():
    grid = GridSpec.cube(-1.0, 1.0, 9, 2)
    np.testing.assert_allclose(char_speeds(minkowski(grid)), 1.0, atol=1e-13)


def test_char_speed_anisotropic():
    # g = diag(-1, 4): null slope dx/dt satisfies -1 + 4 s^2 = 0, s = 1/2
    grid = GridSpec.cube(-1.0, 1.0, 9, 2)
    np.testing.assert_allclose(
        char_speeds(quadratic_metric((-1.0, 4.0), grid)), 0.5, atol=1e-13
    )


def test_char_speed_paraboloid_hessian_is_one():
    grid = GridSpec.cube(-2.0, 2.0, 9, 3)
    h = GraphSurface.from_catalog(grid, hyperbolic_paraboloid(3)).hessian()
    np.testing.assert_allclose(char_speeds(h), 1.0, atol=1e-13)


def test_char_speed_rejects_bad_slices():
    grid = GridSpec.cube(-1.0, 1.0, 5, 2)
    with pytest.raises(NotSpacelike):
        char_speeds(quadratic_metric((1.0, -1.0), grid))  # time axis spacelike


# ---------------------------------------------------------------------------
# slab construction


def test_slab_trims_match_unit_speed():
    grid = GridSpec((0.0, -1.0), 0.125, (5, 17))
    dom = build_slab_domain(grid, minkowski(grid))
    np.testing.assert_array_equal(dom.trims, [0, 1, 2, 3, 4])
    assert dom.cmax == pytest.approx(1.0)
    # leaf k spans indices [k, 16-k]
    assert dom.leaf_bounds(3) == [(3, 13)]
    assert dom.leaf_mask(4).sum() == 9


def test_slab_trims_half_speed():
    grid = GridSpec((0.0, -1.0), 0.125, (5, 17))
    dom = build_slab_domain(grid, quadratic_metric((-1.0, 4.0), grid))
    np.testing.assert_array_equal(dom.trims, [0, 1, 1, 2, 2])


def test_slab_empty_domain():
    grid = GridSpec.cube(0.0, 1.0, 9, 2)  # 9 leaves, 9 wide: trims eat it
    with pytest.raises(EmptyDomain):
        build_slab_domain(grid, minkowski(grid))


def test_slab_rejects_riemannian():
    grid = GridSpec.cube(0.0, 1.0, 5, 2)
    with pytest.raises(NotLorentzian):
        build_slab_domain(grid, quadratic_metric((1.0, 1.0), grid))


def test_domain_masks_nest_and_interior():
    grid = GridSpec((0.0, -1.0), 0.125, (5, 17))
    dom = build_slab_domain(grid, minkowski(grid))
    masks = dom.leaf_masks()
    for k in range(1, dom.leaf_count):
        assert np.all(masks[k] <= masks[k - 1])  # leaves shrink in time
    assert dom.mask_full().sum() == sum(m.sum() for m in masks)
    inner = dom.interior_mask(margin=1)
    assert inner.sum() > 0
    assert np.all(inner <= dom.mask_full())
    assert not (inner & dom.lateral_mask()).any()
    times = dom.leaf_times()
    assert times[0] == 0.0 and times[-1] == 1.0


# ---------------------------------------------------------------------------
# spacelike validation and normals


def test_validate_spacelike_minkowski():
    grid = GridSpec((0.0, -1.0), 0.125, (5, 17))
    dom = build_slab_domain(grid, minkowski(grid))
    rep = validate_spacelike(dom, minkowski(grid))
    assert rep.passed
    assert min(rep.leaf_min_eig) == pytest.approx(1.0)
    # unit-speed trims make the lateral facets exactly null
    assert rep.lateral_min_margin == pytest.approx(0.0, abs=1e-12)


def test_validate_spacelike_strictly_spacelike_lateral():
    grid = GridSpec((0.0, -1.0), 0.125, (5, 17))
    # c = 0.4: the one-cell trim steps are strictly steeper than the cone
    metric = quadratic_metric((-1.0, 6.25), grid)
    dom = build_slab_domain(grid, metric)
    rep = validate_spacelike(dom, metric)
    assert rep.passed
    assert rep.lateral_min_margin > 0


def test_normal_field_unit_future():
    grid = GridSpec((0.0, -1.0), 0.125, (5, 17))
    metric = quadratic_metric((-1.0, 4.0), grid)
    dom = build_slab_domain(grid, metric)
    N = normal_field(dom, metric).values
    assert np.all(N[0] > 0)  # future oriented
    full = metric.full()
    g_NN = np.einsum("i...,ij...,j...->...", N, full, N)
    np.testing.assert_allclose(g_NN, -1.0, atol=1e-12)


# ---------------------------------------------------------------------------
# causal cones


def seed_at(grid, idx):
    s = np.zeros(grid.shape, dtype=bool)
    s[idx] = True
    return s


def test_cone_minkowski_exact():
    grid = GridSpec.cube(0.0, 1.0, 9, 2)
    metric = minkowski(grid)
    seed = seed_at(grid, (0, 4))
    cone = causal_cone(metric, seed, Direction.FUTURE)
    assert isinstance(cone, CausalMask)
    k_idx, j_idx = np.meshgrid(np.arange(9), np.arange(9), indexing="ij")
    expected = np.abs(j_idx - 4) <= k_idx  # unit speed, dt = h
    np.testing.assert_array_equal(cone.membership, expected)


def test_cone_half_speed():
    grid = GridSpec.cube(0.0, 1.0, 9, 2)
    metric = quadratic_metric((-1.0, 4.0), grid)
    cone = causal_cone(metric, seed_at(grid, (0, 4)), Direction.FUTURE)
    k_idx, j_idx = np.meshgrid(np.arange(9), np.arange(9), indexing="ij")
    expected = np.abs(j_idx - 4) <= 0.5 * k_idx + 1e-9
    np.testing.assert_array_equal(cone.membership, expected)


def test_cone_future_past_duality():
    grid = GridSpec.cube(0.0, 1.0, 9, 2)
    metric = minkowski(grid)
    fut = causal_cone(metric, seed_at(grid, (0, 4)), Direction.FUTURE).membership
    past = causal_cone(metric, seed_at(grid, (8, 4)), Direction.PAST).membership
    np.testing.assert_array_equal(past, fut[::-1])


@given(st.integers(0, 8), st.integers(0, 8))
@settings(max_examples=20, deadline=None)
def test_cone_monotone_in_seed(i, j):
    grid = GridSpec.cube(0.0, 1.0, 9, 2)
    metric = minkowski(grid)
    small = seed_at(grid, (0, 4))
    big = small | seed_at(grid, (i, j))
    cs = causal_cone(metric, small, Direction.FUTURE).membership
    cb = causal_cone(metric, big, Direction.FUTURE).membership
    assert np.all(cs <= cb)


def test_cone_contains_seed_and_idempotent():
    grid = GridSpec.cube(0.0, 1.0, 9, 2)
    metric = minkowski(grid)
    seed = seed_at(grid, (2, 3)) | seed_at(grid, (5, 7))
    cone = causal_cone(metric, seed, Direction.FUTURE).membership
    assert np.all(seed <= cone)
    again = causal_cone(metric, cone, Direction.FUTURE).membership
    np.testing.assert_array_equal(again, cone)


def test_cone_dilation_widens():
    grid = GridSpec.cube(0.0, 1.0, 9, 2)
    metric = minkowski(grid)
    seed = seed_at(grid, (0, 4))
    base = causal_cone(metric, seed, Direction.FUTURE).membership
    wide = causal_cone(metric, seed, Direction.FUTURE, dilation_cells=1.0).membership
    assert np.all(base <= wide)
    assert wide.sum() > base.sum()


def test_causal_diamond():
    grid = GridSpec.cube(0.0, 1.0, 9, 2)
    metric = minkowski(grid)
    seed = seed_at(grid, (4, 4))
    dia = causal_diamond(metric, seed)
    assert dia[4, 4]
    assert dia.sum() == 1  # a point is its own diamond
    slab = np.zeros(grid.shape, dtype=bool)
    slab[0] = True
    slab[8] = True
    dia2 = causal_diamond(metric, slab)
    assert dia2.all()  # top and bottom leaves causally span the cube
