"""Finite-difference model operator: eigen-actions, cancellation, residuals."""
import numpy as np
import pytest
import sympy as sp

from scatjet.boundary_jets import ComplexEnergy
from scatjet.errors import GridTooCoarse
from scatjet.hyperbolic_model import (
    HalfSpaceGrid,
    green_residual_check,
    green_residual_convergence,
    hyperbolic_laplacian_apply,
    normal_operator_apply,
)

from oracles import model_laplacian_apply_sym


def _grid(n=1, points=33, **kw):
    return HalfSpaceGrid.make(n, (-0.75, 0.75), 1.0, points, **kw)


def _field(grid, fn):
    """Evaluate fn(s, z-array) on the ghost-extended grid."""
    axes = grid.axes(ghost=True)
    mesh = np.meshgrid(*axes, indexing="ij")
    s = np.exp(mesh[0])
    return fn(s, mesh[1:])


# -- grid validation --------------------------------------------------------


def test_grid_rejects_bad_inputs():
    with pytest.raises(ValueError):
        HalfSpaceGrid.make(4, (-1.0, 1.0), 1.0, 33)
    with pytest.raises(ValueError):
        HalfSpaceGrid.make(1, (1.0, -1.0), 1.0, 33)


def test_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        _grid(points=8)


def test_ghost_layer_shape_enforced():
    grid = _grid()
    with pytest.raises(ValueError, match="expected"):
        hyperbolic_laplacian_apply(np.zeros((33, 33)), grid)


# -- Laplacian eigen-actions ------------------------------------------------


def test_constant_annihilated():
    grid = _grid(n=2, points=17)
    f = _field(grid, lambda s, zs: np.ones_like(s))
    out = hyperbolic_laplacian_apply(f, grid)
    assert np.max(np.abs(out)) < 1e-12


@pytest.mark.parametrize("a", [1.0, 2.5, 0.5 + 1.0j])
def test_power_action(a):
    """f = s^a is an exact eigenfunction with eigenvalue a(n - a)."""
    grid = _grid(n=1)
    f = _field(grid, lambda s, zs: s**a)
    out = hyperbolic_laplacian_apply(f, grid)
    expected = a * (1 - a) * _field(grid, lambda s, zs: s**a)[1:-1, 1:-1]
    err = np.max(np.abs(out - expected))
    # error is pure tau-discretization, O(dtau^2)
    assert err <= 30.0 * grid.dtau**2


def test_quadratic_z_term_matches_symbolic_oracle():
    s_sym, z1 = sp.symbols("s z1", positive=True)
    expr = s_sym**2 * z1
    n = 2
    applied = model_laplacian_apply_sym(expr, s_sym, [z1, sp.Symbol("z2")])
    assert sp.simplify(applied - (-4 + 2 * n) * expr) == 0

    grid = _grid(n=2, points=25)
    f = _field(grid, lambda s, zs: s**2 * zs[0])
    out = hyperbolic_laplacian_apply(f, grid)
    want = _field(grid, lambda s, zs: (-4 + 2 * n) * s**2 * zs[0])
    sl = (slice(1, -1),) * 3
    h = max([grid.dtau] + [grid.dz(a) for a in range(grid.n)])
    assert np.max(np.abs(out - want[sl])) <= 50.0 * h**2


# -- normal operator --------------------------------------------------------


def test_normal_operator_linearity():
    grid = _grid(n=1, points=17)
    rng = np.random.default_rng(3)
    f = rng.standard_normal((19, 19))
    g = rng.standard_normal((19, 19))
    en = ComplexEnergy(1.0 + 2.0j)
    lhs = normal_operator_apply(2.0 * f - 3.0 * g, 1.3, 0.4, en, grid)
    rhs = 2.0 * normal_operator_apply(f, 1.3, 0.4, en, grid) - 3.0 * normal_operator_apply(
        g, 1.3, 0.4, en, grid
    )
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_normal_operator_unit_coefficients():
    """alpha = 1, v0 = 0 leaves the bare Laplacian plus the energy shift."""
    grid = _grid(n=1, points=17)
    f = _field(grid, lambda s, zs: s**2 + 0.3 * zs[0] ** 2)
    en = ComplexEnergy(2.0j)
    out = normal_operator_apply(f, 1.0, 0.0, en, grid)
    base = hyperbolic_laplacian_apply(f, grid)
    shift = (0.0 - en.lam_sq - 1.0 / 4.0) * f[1:-1, 1:-1]
    np.testing.assert_allclose(out, base - shift, atol=1e-12)


def _indicial_sigma(alpha, v0, lam, n):
    disc = (n / 2.0) ** 2 - (v0 - lam**2 - n**2 / 4.0) / alpha**2
    return n / 2.0 + np.sqrt(complex(disc))


def test_indicial_cancellation_two_grid():
    """s^sigma lies in the kernel; the discrete residual shrinks at 2nd order."""
    rng = np.random.default_rng(42)
    for _ in range(20):
        n = int(rng.integers(1, 3))
        alpha = float(rng.uniform(0.6, 1.8))
        v0 = float(rng.uniform(-0.5, 0.5))
        lam = complex(rng.uniform(1.0, 3.0), rng.uniform(0.5, 2.0))
        sigma = _indicial_sigma(alpha, v0, lam, n)
        en = ComplexEnergy(lam)
        resids = []
        for pts in (17, 33):
            grid = _grid(n=n, points=pts)
            f = _field(grid, lambda s, zs: s**sigma)
            out = normal_operator_apply(f, alpha, v0, en, grid)
            resids.append(np.max(np.abs(out)))
        ratio = resids[0] / resids[1]
        assert 3.5 <= ratio <= 4.5, (n, alpha, v0, lam, ratio)


# -- Green-kernel residual --------------------------------------------------


def test_green_residual_second_order():
    for n, sigma in ((1, 1.5), (2, 2.3)):
        coarse, fine, ratio = green_residual_convergence(sigma, n)
        assert coarse.max_residual > fine.max_residual
        assert 3.5 <= ratio <= 4.5, (n, sigma, ratio)
        assert fine.spacing < coarse.spacing


def test_green_residual_wrong_sign_guard():
    grid = _grid(n=1, points=65)
    good = green_residual_check(1.5, 1, grid)
    bad = green_residual_check(1.5, 1, grid, wrong_sign=True)
    # right sign: pure discretization error; wrong sign: O(1) defect
    assert bad.max_residual > 0.1
    assert bad.max_residual > 20.0 * good.max_residual


def test_green_residual_dimension_check():
    grid = _grid(n=2, points=17)
    with pytest.raises(ValueError):
        green_residual_check(1.5, 1, grid)


def test_green_report_fields():
    grid = _grid(n=1, points=17)
    rep = green_residual_check(1.5, 1, grid)
    assert rep.max_kernel > 0
    assert rep.n_points > 0
    assert rep.spacing == pytest.approx(max([grid.dtau] + [grid.dz(0)]))
